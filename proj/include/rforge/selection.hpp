#pragma once

// Two-step dataset selection: Step 1 keeps datasets of moderate difficulty
// (accuracy in a configurable band, endpoints inclusive); Step 2 builds the
// discriminative question set from questions whose sampled responses contain
// both a correct and an incorrect answer.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rforge/corpus.hpp"
#include "rforge/grading.hpp"
#include "rforge/labeling.hpp"

namespace rforge {

struct SelectionConfig {
  double band_low = 0.40;
  double band_high = 0.70;
  int k_required = 5;
};

struct DatasetAccuracyReport {
  std::string dataset;
  std::size_t n_questions = 0;
  double accuracy = 0.0;
  bool retained = false;

  json to_json() const {
    json j;
    j["dataset"] = dataset;
    j["n_questions"] = n_questions;
    j["accuracy"] = accuracy;
    j["retained"] = retained;
    return j;
  }
  static DatasetAccuracyReport from_json(const json& j) {
    DatasetAccuracyReport r;
    r.dataset = j.at("dataset").get<std::string>();
    r.n_questions = j.at("n_questions").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<double>();
    r.retained = j.at("retained").get<bool>();
    return r;
  }
};

// One graded response per question.
inline DatasetAccuracyReport dataset_accuracy(const std::string& dataset,
                                              const std::vector<Correctness>& grades,
                                              const SelectionConfig& cfg = {}) {
  if (grades.empty()) throw DataError("dataset_accuracy: empty dataset " + dataset);
  std::size_t correct = 0;
  for (auto g : grades)
    if (g == Correctness::T) ++correct;
  DatasetAccuracyReport r;
  r.dataset = dataset;
  r.n_questions = grades.size();
  r.accuracy = static_cast<double>(correct) / static_cast<double>(grades.size());
  r.retained = r.accuracy >= cfg.band_low && r.accuracy <= cfg.band_high;
  return r;
}

struct DiscriminativeSet {
  std::set<std::string> question_ids;
};

// pool: question_id -> exactly k_required correctness labels from the
// reference model's sampled answers.
inline DiscriminativeSet build_discriminative_set(
    const std::map<std::string, std::vector<Correctness>>& pool,
    const SelectionConfig& cfg = {}) {
  DiscriminativeSet out;
  for (const auto& [qid, grades] : pool) {
    if (static_cast<int>(grades.size()) != cfg.k_required)
      throw DataError("question " + qid + " has " + std::to_string(grades.size()) +
                      " responses, expected " + std::to_string(cfg.k_required));
    bool any_t = false, any_f = false;
    for (auto g : grades) (g == Correctness::T ? any_t : any_f) = true;
    if (any_t && any_f) out.question_ids.insert(qid);
  }
  return out;
}

}  // namespace rforge
