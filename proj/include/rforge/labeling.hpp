#pragma once

// Correctness/confidence labeling of response pools. Consistency is computed
// within each (question, model) group of K rollouts, never across models.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "rforge/corpus.hpp"
#include "rforge/grading.hpp"

namespace rforge {

enum class Confidence : char { C = 'C', U = 'U' };

enum class Quadrant { TC, TU, FC, FU };

inline std::string to_string(Quadrant q) {
  switch (q) {
    case Quadrant::TC: return "T&C";
    case Quadrant::TU: return "T&U";
    case Quadrant::FC: return "F&C";
    case Quadrant::FU: return "F&U";
  }
  throw std::logic_error("bad Quadrant");
}

inline Quadrant quadrant_from_string(const std::string& s) {
  if (s == "T&C") return Quadrant::TC;
  if (s == "T&U") return Quadrant::TU;
  if (s == "F&C") return Quadrant::FC;
  if (s == "F&U") return Quadrant::FU;
  throw DataError("unknown quadrant: " + s);
}

inline Quadrant make_quadrant(Correctness c, Confidence u) {
  if (c == Correctness::T) return u == Confidence::C ? Quadrant::TC : Quadrant::TU;
  return u == Confidence::C ? Quadrant::FC : Quadrant::FU;
}

struct ResponseRecord {
  std::string question_id;
  std::string model_id;
  int sample_index = 0;
  std::string raw_text;
  ExtractedAnswer extracted;
  Correctness correctness = Correctness::F;
  double consistency = 0.0;
  Confidence confidence = Confidence::U;
  Quadrant quadrant = Quadrant::FU;

  json to_json() const {
    json j;
    j["question_id"] = question_id;
    j["model_id"] = model_id;
    j["sample_index"] = sample_index;
    j["raw_text"] = raw_text;
    j["extracted_raw_span"] = extracted.raw_span;
    j["extraction_ok"] = extracted.extraction_ok;
    j["correctness"] = std::string(1, static_cast<char>(correctness));
    j["consistency"] = consistency;
    j["confidence"] = std::string(1, static_cast<char>(confidence));
    j["quadrant"] = to_string(quadrant);
    return j;
  }

  static ResponseRecord from_json(const json& j) {
    ResponseRecord r;
    r.question_id = j.at("question_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.extracted.raw_span = j.at("extracted_raw_span").get<std::string>();
    r.extracted.extraction_ok = j.at("extraction_ok").get<bool>();
    r.correctness = j.at("correctness").get<std::string>() == "T" ? Correctness::T : Correctness::F;
    r.consistency = j.at("consistency").get<double>();
    r.confidence = j.at("confidence").get<std::string>() == "C" ? Confidence::C : Confidence::U;
    r.quadrant = quadrant_from_string(j.at("quadrant").get<std::string>());
    return r;
  }
};

struct QuadrantCounts {
  std::size_t tc = 0, tu = 0, fc = 0, fu = 0;

  void add(Quadrant q) {
    switch (q) {
      case Quadrant::TC: ++tc; break;
      case Quadrant::TU: ++tu; break;
      case Quadrant::FC: ++fc; break;
      case Quadrant::FU: ++fu; break;
    }
  }
  std::size_t total() const { return tc + tu + fc + fu; }
  std::size_t of(Quadrant q) const {
    switch (q) {
      case Quadrant::TC: return tc;
      case Quadrant::TU: return tu;
      case Quadrant::FC: return fc;
      case Quadrant::FU: return fu;
    }
    return 0;
  }
};

// u(a) = (1/K) * |{ j : a_j canonically equals a }| over one model's K rollouts.
inline double consistency_score(const std::vector<ExtractedAnswer>& pool_answers,
                                const ExtractedAnswer& a, KeyKind kind) {
  if (pool_answers.empty()) throw DataError("consistency_score: empty pool");
  std::size_t matches = 0;
  for (const auto& other : pool_answers)
    if (extracted_equal(other, a, kind)) ++matches;
  return static_cast<double>(matches) / static_cast<double>(pool_answers.size());
}

struct LabelingConfig {
  int k = 5;
  double tau = 0.5;  // confidence threshold; C iff u >= tau
};

// Labels all K responses of one (question, model) group.
inline std::vector<ResponseRecord> label_group(
    const std::string& question_id, const std::string& model_id,
    const std::vector<std::string>& texts, const AnswerKey& key,
    const LabelingConfig& cfg = {}) {
  if (static_cast<int>(texts.size()) != cfg.k)
    throw DataError("group (" + question_id + ", " + model_id + ") has " +
                    std::to_string(texts.size()) + " responses, expected " +
                    std::to_string(cfg.k));
  std::vector<ExtractedAnswer> answers;
  answers.reserve(texts.size());
  for (const auto& t : texts) answers.push_back(extract_answer(t));

  std::vector<ResponseRecord> out;
  out.reserve(texts.size());
  for (std::size_t j = 0; j < texts.size(); ++j) {
    ResponseRecord r;
    r.question_id = question_id;
    r.model_id = model_id;
    r.sample_index = static_cast<int>(j);
    r.raw_text = texts[j];
    r.extracted = answers[j];
    r.correctness = answers_equal(answers[j], key) ? Correctness::T : Correctness::F;
    r.consistency = consistency_score(answers, answers[j], key.kind);
    r.confidence = r.consistency >= cfg.tau ? Confidence::C : Confidence::U;
    r.quadrant = make_quadrant(r.correctness, r.confidence);
    out.push_back(std::move(r));
  }
  return out;
}

struct LabeledPool {
  std::vector<ResponseRecord> records;   // sorted by (question, model, index)
  QuadrantCounts global_counts;
  std::map<std::string, QuadrantCounts> per_question;
};

// pool: question_id -> model_id -> K raw texts; keys: question_id -> AnswerKey.
inline LabeledPool classify_pool(
    const std::map<std::string, std::map<std::string, std::vector<std::string>>>& pool,
    const std::map<std::string, AnswerKey>& keys, const LabelingConfig& cfg = {}) {
  LabeledPool out;
  for (const auto& [qid, by_model] : pool) {
    auto kit = keys.find(qid);
    if (kit == keys.end()) throw DataError("no answer key for question " + qid);
    for (const auto& [mid, texts] : by_model) {
      for (auto& r : label_group(qid, mid, texts, kit->second, cfg)) {
        out.global_counts.add(r.quadrant);
        out.per_question[qid].add(r.quadrant);
        out.records.push_back(std::move(r));
      }
    }
  }
  return out;
}

}  // namespace rforge
