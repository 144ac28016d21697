#pragma once

// Reward scoring for (question, response) items. Three sources:
//   yes_logprob  — exp(sum of token log-probabilities of "Yes") under the
//                  certainty-assessment template, via a logprob-capable backend
//   judge_prompt — pointwise probability parsed from a free-text judge reply
//   mock         — deterministic presets for tests

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rforge/backend.hpp"
#include "rforge/labeling.hpp"
#include "rforge/prompts.hpp"
#include "rforge/util.hpp"

namespace rforge {

enum class ScoreSource { YesLogprob, JudgePrompt, Mock };

inline std::string to_string(ScoreSource s) {
  switch (s) {
    case ScoreSource::YesLogprob: return "yes_logprob";
    case ScoreSource::JudgePrompt: return "judge_prompt";
    case ScoreSource::Mock: return "mock";
  }
  throw std::logic_error("bad ScoreSource");
}

struct RewardScore {
  double value = 0.0;  // in [0, 1]
  ScoreSource source = ScoreSource::Mock;
  std::vector<double> token_logprobs;  // yes_logprob only
};

// Sums log-probabilities over the backend-reported tokenization of "Yes".
// The backend must return the generated tokens with logprobs; when the
// generated token at a position is not part of "Yes", its top-candidates are
// consulted for the needed piece (top-k approximation of constrained decoding).
inline RewardScore score_yes_logprob(const std::string& question, const std::string& response,
                                     CompletionBackend& backend, const std::string& model,
                                     const std::string& item_key = "") {
  if (!backend.supports_logprobs())
    throw BackendError("backend '" + backend.id() + "' does not expose log-probabilities");

  CompletionRequest req;
  req.model = model;
  req.prompt = prompts::kSftInstruction + "\n\n" + prompts::sft_input(question, response);
  req.temperature = 0.0;
  req.max_tokens = 4;
  req.want_logprobs = true;
  req.item_key = item_key;
  auto result = backend.complete(req);
  if (result.logprobs.empty())
    throw BackendError("backend returned no log-probabilities for scoring");

  // Match the tokens of "Yes" position by position.
  RewardScore score;
  score.source = ScoreSource::YesLogprob;
  std::string needed = "Yes";
  std::size_t covered = 0;
  for (const auto& tok : result.logprobs) {
    if (covered >= needed.size()) break;
    std::string rest = needed.substr(covered);
    if (rest.rfind(tok.token, 0) == 0 && !tok.token.empty()) {
      score.token_logprobs.push_back(tok.logprob);
      covered += tok.token.size();
      continue;
    }
    // Generated token diverged; look for a prefix of the remainder among the
    // alternatives at this position.
    std::optional<std::pair<std::string, double>> best;
    for (const auto& [cand, lp] : tok.top_candidates)
      if (!cand.empty() && rest.rfind(cand, 0) == 0)
        if (!best || cand.size() > best->first.size()) best = {cand, lp};
    if (!best)
      throw BackendError("'Yes' tokens absent from returned candidates at position " +
                         std::to_string(score.token_logprobs.size()) + " (generated token: '" +
                         tok.token + "')");
    score.token_logprobs.push_back(best->second);
    covered += best->first.size();
  }
  if (covered < needed.size())
    throw BackendError("backend reply too short to cover the 'Yes' token sequence");

  double sum = 0.0;
  for (double lp : score.token_logprobs) sum += lp;
  score.value = std::exp(sum);
  return score;
}

// First {"probability": <number>} object anywhere in the reply wins; values
// outside (0,1) are clamped to [1e-6, 1-1e-6].
inline std::optional<double> parse_judge_probability(const std::string& reply) {
  const std::string key = "\"probability\"";
  std::size_t pos = 0;
  while ((pos = reply.find(key, pos)) != std::string::npos) {
    std::size_t colon = reply.find(':', pos + key.size());
    if (colon == std::string::npos) {
      pos += key.size();
      continue;
    }
    std::size_t start = colon + 1;
    while (start < reply.size() && std::isspace(static_cast<unsigned char>(reply[start]))) ++start;
    std::size_t end = start;
    while (end < reply.size() &&
           (std::isdigit(static_cast<unsigned char>(reply[end])) || reply[end] == '.' ||
            reply[end] == '-' || reply[end] == '+' || reply[end] == 'e' || reply[end] == 'E'))
      ++end;
    if (end > start) {
      try {
        double v = std::stod(reply.substr(start, end - start));
        if (std::isfinite(v)) return std::clamp(v, 1e-6, 1.0 - 1e-6);
      } catch (const std::exception&) {
        // fall through to the next occurrence
      }
    }
    pos = end > pos ? end : pos + key.size();
  }
  return std::nullopt;
}

inline RewardScore score_judge_prompt(const std::string& question, const std::string& response,
                                      CompletionBackend& backend, const std::string& model,
                                      const std::string& item_key = "") {
  CompletionRequest req;
  req.model = model;
  req.prompt = prompts::judge_prompt(question, response);
  req.temperature = 0.0;
  req.item_key = item_key;
  auto result = backend.complete(req);
  auto p = parse_judge_probability(result.text);
  if (!p)
    throw DataError("judge reply contains no parsable {\"probability\": ...} object: " +
                    result.text.substr(0, 200));
  RewardScore score;
  score.value = *p;
  score.source = ScoreSource::JudgePrompt;
  return score;
}

// Deterministic scorers for tests and synthetic evaluation runs.
class MockScorer {
 public:
  enum class Preset { Table, PerfectOracle, Random };

  static MockScorer table(std::map<std::pair<std::string, std::string>, double> oracle) {
    MockScorer s;
    s.preset_ = Preset::Table;
    s.oracle_ = std::move(oracle);
    return s;
  }
  static MockScorer perfect_oracle() {
    MockScorer s;
    s.preset_ = Preset::PerfectOracle;
    return s;
  }
  static MockScorer random(std::uint64_t seed) {
    MockScorer s;
    s.preset_ = Preset::Random;
    s.seed_ = seed;
    return s;
  }

  // Table lookups key on (question id, sha256 of the response text).
  RewardScore score(const ResponseRecord& r) const {
    RewardScore out;
    out.source = ScoreSource::Mock;
    switch (preset_) {
      case Preset::Table: {
        auto it = oracle_.find({r.question_id, sha256_hex(r.raw_text)});
        if (it == oracle_.end())
          throw DataError("mock scorer: no oracle entry for (" + r.question_id + ", <hash>)");
        out.value = it->second;
        return out;
      }
      case Preset::PerfectOracle:
        switch (r.quadrant) {
          case Quadrant::TC: out.value = 1.0; break;
          case Quadrant::TU: out.value = 0.6; break;
          case Quadrant::FC: out.value = 0.3; break;
          case Quadrant::FU: out.value = 0.0; break;
        }
        return out;
      case Preset::Random: {
        std::mt19937_64 rng(derive_seed(
            seed_, r.question_id + "\x1f" + r.model_id + "\x1f" + std::to_string(r.sample_index)));
        out.value = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return out;
      }
    }
    throw std::logic_error("bad preset");
  }

 private:
  Preset preset_ = Preset::PerfectOracle;
  std::map<std::pair<std::string, std::string>, double> oracle_;
  std::uint64_t seed_ = 0;
};

struct ScoredItem {
  std::string question_id;
  std::string response_id;  // "<model>#<index>"
  double value = 0.0;
  ScoreSource source = ScoreSource::Mock;

  json to_json() const {
    json j;
    j["question_id"] = question_id;
    j["response_id"] = response_id;
    j["value"] = value;
    j["source"] = to_string(source);
    return j;
  }
  static ScoredItem from_json(const json& j) {
    ScoredItem s;
    s.question_id = j.at("question_id").get<std::string>();
    s.response_id = j.at("response_id").get<std::string>();
    s.value = j.at("value").get<double>();
    std::string src = j.at("source").get<std::string>();
    s.source = src == "yes_logprob"   ? ScoreSource::YesLogprob
               : src == "judge_prompt" ? ScoreSource::JudgePrompt
                                       : ScoreSource::Mock;
    return s;
  }
};

inline std::string response_id(const ResponseRecord& r) {
  return r.model_id + "#" + std::to_string(r.sample_index);
}

}  // namespace rforge
