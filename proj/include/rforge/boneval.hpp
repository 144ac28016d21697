#pragma once

// Best-of-N selection and accuracy. pass_avg is scorer-independent; the
// selected-candidate accuracy is bounded below by the all-correct fraction
// and above by the any-correct fraction for every scorer.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "rforge/labeling.hpp"
#include "rforge/util.hpp"

namespace rforge {

// argmax with ties broken toward the lowest index.
inline std::size_t select_best(const std::vector<double>& scores) {
  if (scores.empty()) throw DataError("select_best: empty candidate list");
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw DataError("select_best: non-finite score");
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

struct BonCandidateSet {
  std::string question_id;
  std::vector<double> scores;
  std::vector<bool> correct;
};

struct BonResult {
  struct PerQuestion {
    std::string question_id;
    std::size_t selected_index = 0;
    bool selected_correct = false;
  };
  std::vector<PerQuestion> per_question;
  double bon_accuracy = 0.0;
  double pass_avg = 0.0;
  double floor = 0.0;    // fraction of questions with all candidates correct
  double ceiling = 0.0;  // fraction of questions with >= 1 correct candidate
  std::size_t n = 0;     // candidates per question

  json to_json() const {
    json j;
    j["n"] = n;
    j["bon_accuracy"] = bon_accuracy;
    j["pass_avg"] = pass_avg;
    j["floor"] = floor;
    j["ceiling"] = ceiling;
    j["questions"] = per_question.size();
    return j;
  }
};

inline BonResult bon_accuracy(const std::vector<BonCandidateSet>& questions) {
  if (questions.empty()) throw DataError("bon_accuracy: no questions");
  BonResult out;
  out.n = questions.front().scores.size();
  std::size_t selected_correct = 0, all_correct = 0, any_correct = 0, total_correct = 0,
              total_candidates = 0;
  for (const auto& q : questions) {
    if (q.scores.size() != out.n || q.correct.size() != out.n)
      throw DataError("bon_accuracy: ragged candidate counts at question " + q.question_id);
    std::size_t idx = select_best(q.scores);
    BonResult::PerQuestion pq;
    pq.question_id = q.question_id;
    pq.selected_index = idx;
    pq.selected_correct = q.correct[idx];
    out.per_question.push_back(pq);

    bool all = true, any = false;
    for (bool c : q.correct) {
      all = all && c;
      any = any || c;
      if (c) ++total_correct;
    }
    total_candidates += q.correct.size();
    if (pq.selected_correct) ++selected_correct;
    if (all) ++all_correct;
    if (any) ++any_correct;
  }
  double nq = static_cast<double>(questions.size());
  out.bon_accuracy = static_cast<double>(selected_correct) / nq;
  out.floor = static_cast<double>(all_correct) / nq;
  out.ceiling = static_cast<double>(any_correct) / nq;
  out.pass_avg = static_cast<double>(total_correct) / static_cast<double>(total_candidates);
  return out;
}

}  // namespace rforge
