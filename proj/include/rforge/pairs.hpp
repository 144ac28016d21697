#pragma once

// Preference-pair construction from labeled pools. Natural mode emits one
// pair per question, drawing the pair type uniformly over the question's
// available types, so the emitted distribution tracks what the pools
// naturally produce (an availability-frequency-weighted draw is available
// behind a flag, but it over-samples the majority type whenever available
// sets overlap). Exhaustive mode emits one pair per available type. The two
// ablation modes key on a single label each.

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "rforge/labeling.hpp"
#include "rforge/prompts.hpp"
#include "rforge/util.hpp"

namespace rforge {

enum class PairType { TcTu, TcFc, TcFu };

inline constexpr std::array<PairType, 3> kAllPairTypes = {PairType::TcTu, PairType::TcFc,
                                                          PairType::TcFu};

inline std::string to_string(PairType t) {
  switch (t) {
    case PairType::TcTu: return "T&C|T&U";
    case PairType::TcFc: return "T&C|F&C";
    case PairType::TcFu: return "T&C|F&U";
  }
  throw std::logic_error("bad PairType");
}

inline PairType pair_type_from_string(const std::string& s) {
  if (s == "T&C|T&U") return PairType::TcTu;
  if (s == "T&C|F&C") return PairType::TcFc;
  if (s == "T&C|F&U") return PairType::TcFu;
  throw DataError("unknown pair type: " + s);
}

inline Quadrant partner_quadrant(PairType t) {
  switch (t) {
    case PairType::TcTu: return Quadrant::TU;
    case PairType::TcFc: return Quadrant::FC;
    case PairType::TcFu: return Quadrant::FU;
  }
  throw std::logic_error("bad PairType");
}

struct PreferencePair {
  std::string question_id;
  ResponseRecord chosen;    // quadrant T&C by construction
  ResponseRecord rejected;
  PairType pair_type = PairType::TcFu;

  json to_json() const {
    json j;
    j["question_id"] = question_id;
    j["pair_type"] = to_string(pair_type);
    j["chosen"] = chosen.to_json();
    j["rejected"] = rejected.to_json();
    return j;
  }
  static PreferencePair from_json(const json& j) {
    PreferencePair p;
    p.question_id = j.at("question_id").get<std::string>();
    p.pair_type = pair_type_from_string(j.at("pair_type").get<std::string>());
    p.chosen = ResponseRecord::from_json(j.at("chosen"));
    p.rejected = ResponseRecord::from_json(j.at("rejected"));
    return p;
  }
};

struct DistributionReport {
  struct Row {
    std::size_t available = 0;
    std::size_t emitted = 0;
    double available_fraction = 0.0;
    double emitted_fraction = 0.0;
  };
  std::map<PairType, Row> rows;
  std::size_t questions_seen = 0;
  std::size_t pairs_emitted = 0;

  json to_json() const {
    json j;
    j["questions_seen"] = questions_seen;
    j["pairs_emitted"] = pairs_emitted;
    json types = json::object();
    for (const auto& [t, row] : rows) {
      json r;
      r["available"] = row.available;
      r["emitted"] = row.emitted;
      r["available_fraction"] = row.available_fraction;
      r["emitted_fraction"] = row.emitted_fraction;
      types[to_string(t)] = r;
    }
    j["types"] = types;
    return j;
  }
};

inline std::set<PairType> available_pair_types(const std::vector<ResponseRecord>& pool) {
  bool any_tc = false;
  QuadrantCounts counts;
  for (const auto& r : pool) {
    counts.add(r.quadrant);
    if (r.quadrant == Quadrant::TC) any_tc = true;
  }
  std::set<PairType> out;
  if (!any_tc) return out;
  for (PairType t : kAllPairTypes)
    if (counts.of(partner_quadrant(t)) > 0) out.insert(t);
  return out;
}

enum class PairMode { Natural, Exhaustive, CorrectnessOnly, ConfidenceOnly };

inline std::string to_string(PairMode m) {
  switch (m) {
    case PairMode::Natural: return "natural";
    case PairMode::Exhaustive: return "exhaustive";
    case PairMode::CorrectnessOnly: return "correctness_only";
    case PairMode::ConfidenceOnly: return "confidence_only";
  }
  throw std::logic_error("bad PairMode");
}

inline PairMode pair_mode_from_string(const std::string& s) {
  if (s == "natural") return PairMode::Natural;
  if (s == "exhaustive") return PairMode::Exhaustive;
  if (s == "correctness_only") return PairMode::CorrectnessOnly;
  if (s == "confidence_only") return PairMode::ConfidenceOnly;
  throw DataError("unknown pair mode: " + s);
}

struct PairConfig {
  PairMode mode = PairMode::Natural;
  std::uint64_t seed = 0;
  std::size_t budget = SIZE_MAX;  // max questions considered
  // Natural mode: draw the pair type per question uniformly over available
  // types (default) or weighted by global availability frequency.
  bool weighted_type_draw = false;
  double confidence_only_threshold = 0.5;  // strict > for the ablation
};

namespace detail {

inline const ResponseRecord* draw_uniform(const std::vector<const ResponseRecord*>& v,
                                          std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace detail

struct PairBuildResult {
  std::vector<PreferencePair> pairs;
  DistributionReport report;
};

// pools: question_id -> its labeled responses (all models). Determinism: each
// question gets its own RNG stream derived from (seed, question_id), so the
// output is independent of iteration order and parallelization.
inline PairBuildResult build_pairs(
    const std::map<std::string, std::vector<ResponseRecord>>& pools, const PairConfig& cfg) {
  if (cfg.budget == 0) throw DataError("build_pairs: budget must be positive");

  PairBuildResult out;
  for (PairType t : kAllPairTypes) out.report.rows[t];

  // Pass 1: global availability census (natural mode needs the frequencies;
  // the report wants them in every mode).
  std::map<std::string, std::set<PairType>> avail;
  std::size_t considered = 0;
  for (const auto& [qid, pool] : pools) {
    if (considered >= cfg.budget) break;
    ++considered;
    auto types = available_pair_types(pool);
    for (PairType t : types) ++out.report.rows[t].available;
    avail.emplace(qid, std::move(types));
  }
  out.report.questions_seen = considered;
  std::size_t total_avail = 0;
  for (const auto& [t, row] : out.report.rows) total_avail += row.available;
  if (total_avail > 0)
    for (auto& [t, row] : out.report.rows)
      row.available_fraction =
          static_cast<double>(row.available) / static_cast<double>(total_avail);

  // Pass 2: emission.
  std::size_t visited = 0;
  for (const auto& [qid, pool] : pools) {
    if (visited >= cfg.budget) break;
    ++visited;
    std::mt19937_64 rng(derive_seed(cfg.seed, qid));

    if (cfg.mode == PairMode::CorrectnessOnly || cfg.mode == PairMode::ConfidenceOnly) {
      std::vector<const ResponseRecord*> pos, neg;
      for (const auto& r : pool) {
        bool positive = cfg.mode == PairMode::CorrectnessOnly
                            ? r.correctness == Correctness::T
                            : r.consistency > cfg.confidence_only_threshold;
        (positive ? pos : neg).push_back(&r);
      }
      if (pos.empty() || neg.empty()) continue;
      PreferencePair p;
      p.question_id = qid;
      p.chosen = *detail::draw_uniform(pos, rng);
      p.rejected = *detail::draw_uniform(neg, rng);
      // pair_type reported by the rejected side's quadrant partner when it
      // is one of the three canonical partners; T&C|F&U otherwise.
      switch (p.rejected.quadrant) {
        case Quadrant::TU: p.pair_type = PairType::TcTu; break;
        case Quadrant::FC: p.pair_type = PairType::TcFc; break;
        default: p.pair_type = PairType::TcFu; break;
      }
      out.pairs.push_back(std::move(p));
      continue;
    }

    const auto& types = avail.at(qid);
    if (types.empty()) continue;

    std::vector<const ResponseRecord*> tc;
    std::map<PairType, std::vector<const ResponseRecord*>> partners;
    for (const auto& r : pool) {
      if (r.quadrant == Quadrant::TC) tc.push_back(&r);
      for (PairType t : types)
        if (r.quadrant == partner_quadrant(t)) partners[t].push_back(&r);
    }

    auto emit = [&](PairType t) {
      PreferencePair p;
      p.question_id = qid;
      p.pair_type = t;
      p.chosen = *detail::draw_uniform(tc, rng);
      p.rejected = *detail::draw_uniform(partners.at(t), rng);
      ++out.report.rows[t].emitted;
      out.pairs.push_back(std::move(p));
    };

    if (cfg.mode == PairMode::Exhaustive) {
      for (PairType t : kAllPairTypes)
        if (types.count(t)) emit(t);
      continue;
    }

    // Natural: one pair per question, type drawn by weight.
    std::vector<PairType> candidates(types.begin(), types.end());
    std::vector<double> weights;
    for (PairType t : candidates)
      weights.push_back(cfg.weighted_type_draw
                            ? static_cast<double>(out.report.rows[t].available)
                            : 1.0);
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    emit(candidates[d(rng)]);
  }

  out.report.pairs_emitted = out.pairs.size();
  if (cfg.mode == PairMode::Natural || cfg.mode == PairMode::Exhaustive) {
    std::size_t total = 0;
    for (const auto& [t, row] : out.report.rows) total += row.emitted;
    if (total > 0)
      for (auto& [t, row] : out.report.rows)
        row.emitted_fraction = static_cast<double>(row.emitted) / static_cast<double>(total);
  }
  return out;
}

struct SftRecord {
  std::string instruction;
  std::string input;
  std::string output;  // exactly "Yes" or "No"

  json to_json() const {
    json j;
    j["instruction"] = instruction;
    j["input"] = input;
    j["output"] = output;
    return j;
  }
  static SftRecord from_json(const json& j) {
    SftRecord r;
    r.instruction = j.at("instruction").get<std::string>();
    r.input = j.at("input").get<std::string>();
    r.output = j.at("output").get<std::string>();
    if (r.output != "Yes" && r.output != "No")
      throw DataError("sft output must be exactly 'Yes' or 'No'");
    return r;
  }
};

// Two records per pair: chosen -> "Yes", rejected -> "No". question_text is
// looked up per question id; inputs embed the response verbatim.
inline std::vector<SftRecord> export_sft(
    const std::vector<PreferencePair>& pairs,
    const std::map<std::string, std::string>& question_texts) {
  std::vector<SftRecord> out;
  out.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    auto it = question_texts.find(p.question_id);
    if (it == question_texts.end())
      throw DataError("export_sft: no question text for " + p.question_id);
    SftRecord yes;
    yes.instruction = prompts::kSftInstruction;
    yes.input = prompts::sft_input(it->second, p.chosen.raw_text);
    yes.output = "Yes";
    SftRecord no;
    no.instruction = prompts::kSftInstruction;
    no.input = prompts::sft_input(it->second, p.rejected.raw_text);
    no.output = "No";
    out.push_back(std::move(yes));
    out.push_back(std::move(no));
  }
  return out;
}

}  // namespace rforge
