#pragma once

// Pipeline stages and the run manifest. Each stage reads upstream artifacts
// from the run directory, writes its own outputs, and records input/output
// hashes in manifest.json. No stage mutates an upstream artifact; deleting a
// downstream artifact and re-running regenerates it identically given seeds
// and a warm cache.

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "rforge/boneval.hpp"
#include "rforge/corpus.hpp"
#include "rforge/fixtures.hpp"
#include "rforge/labeling.hpp"
#include "rforge/pairs.hpp"
#include "rforge/ppolab.hpp"
#include "rforge/reward.hpp"
#include "rforge/sampling.hpp"
#include "rforge/selection.hpp"
#include "rforge/util.hpp"

namespace rforge::pipeline {

struct RunConfig {
  std::filesystem::path corpus_path;
  std::filesystem::path out_dir;
  std::filesystem::path cache_dir;  // empty -> out_dir/cache

  std::string reference_model = "model-a";
  SamplingSpec sampling;
  SelectionConfig selection;
  LabelingConfig labeling;
  PairConfig pairs;
  std::string scorer = "perfect_oracle";  // perfect_oracle | random | yes_logprob | judge_prompt
  std::string scorer_model;
  std::uint64_t scorer_seed = 0;
  ppolab::PpoConfig ppo;
  std::string ppo_reward = "confidence_penalizing";
  std::filesystem::path ppo_scenario;  // empty -> default scenario
  int parallelism = 8;
};

// Minimal sectioned key=value config file. '#' starts a comment; [section]
// prefixes keys as section.key. Flags override by writing into the same map.
inline std::map<std::string, std::string> parse_config_file(const std::filesystem::path& p) {
  std::map<std::string, std::string> kv;
  std::string section;
  for (const auto& raw : split_lines(read_file(p))) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("config line without '=': " + line);
    std::string key = trim(line.substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline void apply_config(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
  auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("corpus")) cfg.corpus_path = *v;
  if (auto* v = get("out")) cfg.out_dir = *v;
  if (auto* v = get("cache")) cfg.cache_dir = *v;
  if (auto* v = get("parallelism")) cfg.parallelism = std::stoi(*v);
  if (auto* v = get("sampling.models")) {
    cfg.sampling.models.clear();
    std::string s = *v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t comma = s.find(',', pos);
      std::string m = trim(s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos));
      if (!m.empty()) cfg.sampling.models.push_back(m);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  if (auto* v = get("sampling.k")) cfg.sampling.k = std::stoi(*v);
  if (auto* v = get("sampling.temperature")) cfg.sampling.temperature = std::stod(*v);
  if (auto* v = get("sampling.max_tokens")) cfg.sampling.max_tokens = std::stoi(*v);
  if (auto* v = get("sampling.seed")) cfg.sampling.seed = std::stoull(*v);
  if (auto* v = get("selection.band_low")) cfg.selection.band_low = std::stod(*v);
  if (auto* v = get("selection.band_high")) cfg.selection.band_high = std::stod(*v);
  if (auto* v = get("selection.reference_model")) cfg.reference_model = *v;
  if (auto* v = get("labeling.tau")) cfg.labeling.tau = std::stod(*v);
  if (auto* v = get("pairs.mode")) cfg.pairs.mode = pair_mode_from_string(*v);
  if (auto* v = get("pairs.seed")) cfg.pairs.seed = std::stoull(*v);
  if (auto* v = get("pairs.weighted_type_draw")) cfg.pairs.weighted_type_draw = *v == "true";
  if (auto* v = get("scorer.kind")) cfg.scorer = *v;
  if (auto* v = get("scorer.model")) cfg.scorer_model = *v;
  if (auto* v = get("scorer.seed")) cfg.scorer_seed = std::stoull(*v);
  if (auto* v = get("ppo.epsilon")) cfg.ppo.epsilon = std::stod(*v);
  if (auto* v = get("ppo.learning_rate")) cfg.ppo.learning_rate = std::stod(*v);
  if (auto* v = get("ppo.iterations")) cfg.ppo.iterations = std::stoi(*v);
  if (auto* v = get("ppo.batch_size")) cfg.ppo.batch_size = std::stoi(*v);
  if (auto* v = get("ppo.seed")) cfg.ppo.seed = std::stoull(*v);
  if (auto* v = get("ppo.reward")) cfg.ppo_reward = *v;
  if (auto* v = get("ppo.scenario")) cfg.ppo_scenario = *v;
}

// Artifact filenames within a run directory.
namespace artifact {
inline constexpr const char* kAccuracyReport = "accuracy_report.jsonl";
inline constexpr const char* kDiscriminative = "discriminative.jsonl";
inline constexpr const char* kResponses = "responses.jsonl";
inline constexpr const char* kLabeled = "labeled.jsonl";
inline constexpr const char* kQuadrantSummary = "quadrant_summary.json";
inline constexpr const char* kPairs = "pairs.jsonl";
inline constexpr const char* kDistribution = "distribution.json";
inline constexpr const char* kSft = "sft.jsonl";
inline constexpr const char* kScores = "scores.jsonl";
inline constexpr const char* kBon = "bon.json";
inline constexpr const char* kPpoTrace = "ppo_trace.csv";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

class Manifest {
 public:
  explicit Manifest(std::filesystem::path run_dir) : path_(run_dir / artifact::kManifest) {
    if (std::filesystem::exists(path_)) doc_ = json::parse(read_file(path_));
    else {
      doc_["tool_version"] = "0.1.0";
      doc_["stages"] = json::object();
    }
  }

  void record_stage(const std::string& stage, const std::vector<std::filesystem::path>& inputs,
                    const std::vector<std::filesystem::path>& outputs) {
    json entry;
    json in = json::object(), out = json::object();
    for (const auto& p : inputs) in[p.filename().string()] = file_sha256(p);
    for (const auto& p : outputs) out[p.filename().string()] = file_sha256(p);
    entry["inputs"] = in;
    entry["outputs"] = out;
    entry["completed_at"] = static_cast<long>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch()).count());
    doc_["stages"][stage] = entry;
    // Atomic update: write to temp, rename over.
    auto tmp = path_;
    tmp += ".tmp";
    write_file(tmp, doc_.dump(2) + "\n");
    std::filesystem::rename(tmp, path_);
  }

  bool has_stage(const std::string& stage) const {
    return doc_.at("stages").contains(stage);
  }
  const json& doc() const { return doc_; }

 private:
  std::filesystem::path path_;
  json doc_;
};

inline void require_artifact(const std::filesystem::path& p, const std::string& producer) {
  if (!std::filesystem::exists(p))
    throw DataError("missing artifact " + p.string() + "; run the '" + producer +
                    "' stage first");
}

struct StageContext {
  RunConfig cfg;
  CompletionBackend* backend = nullptr;  // sampling + scoring backends
  MockScorer* mock_scorer = nullptr;     // set when cfg.scorer is a mock preset

  std::filesystem::path out(const char* name) const { return cfg.out_dir / name; }
};

// Step 1 + Step 2: dataset accuracy band filter, then the discriminative set.
inline void stage_filter(StageContext& ctx) {
  auto questions = load_dataset(ctx.cfg.corpus_path);
  if (questions.empty()) throw DataError("corpus is empty");
  Manifest manifest(ctx.cfg.out_dir);

  ResponseCache cache(ctx.cfg.cache_dir.empty() ? ctx.cfg.out_dir / "cache" : ctx.cfg.cache_dir);

  // Step 1: one greedy response per question from the reference model.
  SamplingSpec step1;
  step1.models = {ctx.cfg.reference_model};
  step1.k = 1;
  step1.temperature = 0.0;
  step1.seed = ctx.cfg.sampling.seed;
  auto graded_once = sample_responses(questions, step1, *ctx.backend, &cache, ctx.cfg.parallelism);

  std::map<std::string, const QuestionRecord*> by_id;
  for (const auto& q : questions) by_id[q.id] = &q;
  std::map<std::string, std::vector<Correctness>> per_dataset;
  for (const auto& r : graded_once) {
    if (!r.ok) throw DataError("reference sampling failed for " + r.question_id + ": " + r.error);
    per_dataset[by_id.at(r.question_id)->dataset].push_back(
        grade(r.text, by_id.at(r.question_id)->answer_key));
  }
  std::vector<DatasetAccuracyReport> reports;
  std::set<std::string> retained_datasets;
  for (const auto& [name, grades] : per_dataset) {
    reports.push_back(dataset_accuracy(name, grades, ctx.cfg.selection));
    if (reports.back().retained) retained_datasets.insert(name);
  }
  write_jsonl(reports, ctx.out(artifact::kAccuracyReport));

  // Step 2: k sampled responses per retained question; keep those with both
  // a correct and an incorrect answer.
  std::vector<QuestionRecord> retained_questions;
  for (const auto& q : questions)
    if (retained_datasets.count(q.dataset)) retained_questions.push_back(q);

  SamplingSpec step2 = ctx.cfg.sampling;
  step2.models = {ctx.cfg.reference_model};
  step2.k = ctx.cfg.selection.k_required;
  auto sampled = sample_responses(retained_questions, step2, *ctx.backend, &cache,
                                  ctx.cfg.parallelism);
  std::map<std::string, std::vector<Correctness>> pools;
  for (const auto& r : sampled) {
    if (!r.ok) throw DataError("step-2 sampling failed for " + r.question_id + ": " + r.error);
    pools[r.question_id].push_back(grade(r.text, by_id.at(r.question_id)->answer_key));
  }
  auto disc = build_discriminative_set(pools, ctx.cfg.selection);
  std::vector<QuestionRecord> discriminative;
  for (const auto& q : retained_questions)
    if (disc.question_ids.count(q.id)) discriminative.push_back(q);
  write_jsonl(discriminative, ctx.out(artifact::kDiscriminative));

  manifest.record_stage("filter", {ctx.cfg.corpus_path},
                        {ctx.out(artifact::kAccuracyReport), ctx.out(artifact::kDiscriminative)});
}

inline void stage_sample(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kDiscriminative), "filter");
  auto questions = load_dataset(ctx.out(artifact::kDiscriminative));
  Manifest manifest(ctx.cfg.out_dir);
  ResponseCache cache(ctx.cfg.cache_dir.empty() ? ctx.cfg.out_dir / "cache" : ctx.cfg.cache_dir);
  auto responses =
      sample_responses(questions, ctx.cfg.sampling, *ctx.backend, &cache, ctx.cfg.parallelism);
  write_jsonl(responses, ctx.out(artifact::kResponses));
  manifest.record_stage("sample", {ctx.out(artifact::kDiscriminative)},
                        {ctx.out(artifact::kResponses)});
}

inline void stage_label(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kResponses), "sample");
  auto questions = load_dataset(ctx.cfg.corpus_path);
  auto responses = load_jsonl<RawResponse>(ctx.out(artifact::kResponses));
  Manifest manifest(ctx.cfg.out_dir);

  std::map<std::string, AnswerKey> keys;
  for (const auto& q : questions) keys[q.id] = q.answer_key;
  LabelingConfig lcfg = ctx.cfg.labeling;
  lcfg.k = ctx.cfg.sampling.k;
  auto labeled = classify_pool(group_responses(responses), keys, lcfg);
  write_jsonl(labeled.records, ctx.out(artifact::kLabeled));

  json summary;
  summary["total"] = labeled.global_counts.total();
  summary["tc"] = labeled.global_counts.tc;
  summary["tu"] = labeled.global_counts.tu;
  summary["fc"] = labeled.global_counts.fc;
  summary["fu"] = labeled.global_counts.fu;
  write_file(ctx.out(artifact::kQuadrantSummary), summary.dump(2) + "\n");

  manifest.record_stage("label", {ctx.out(artifact::kResponses)},
                        {ctx.out(artifact::kLabeled), ctx.out(artifact::kQuadrantSummary)});
}

inline std::map<std::string, std::vector<ResponseRecord>> load_labeled_pools(
    const std::filesystem::path& p) {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  for (auto& r : load_jsonl<ResponseRecord>(p)) pools[r.question_id].push_back(std::move(r));
  return pools;
}

inline void stage_pairs(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kLabeled), "label");
  Manifest manifest(ctx.cfg.out_dir);
  auto pools = load_labeled_pools(ctx.out(artifact::kLabeled));
  auto result = build_pairs(pools, ctx.cfg.pairs);
  write_jsonl(result.pairs, ctx.out(artifact::kPairs));
  write_file(ctx.out(artifact::kDistribution), result.report.to_json().dump(2) + "\n");
  manifest.record_stage("pairs", {ctx.out(artifact::kLabeled)},
                        {ctx.out(artifact::kPairs), ctx.out(artifact::kDistribution)});
}

inline void stage_export_sft(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kPairs), "pairs");
  auto questions = load_dataset(ctx.cfg.corpus_path);
  Manifest manifest(ctx.cfg.out_dir);
  auto pairs = load_jsonl<PreferencePair>(ctx.out(artifact::kPairs));
  std::map<std::string, std::string> texts;
  for (const auto& q : questions) texts[q.id] = q.prompt_text;
  auto records = export_sft(pairs, texts);
  write_jsonl(records, ctx.out(artifact::kSft));
  manifest.record_stage("export-sft", {ctx.out(artifact::kPairs)}, {ctx.out(artifact::kSft)});
}

inline void stage_score(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kLabeled), "label");
  auto questions = load_dataset(ctx.cfg.corpus_path);
  Manifest manifest(ctx.cfg.out_dir);
  auto records = load_jsonl<ResponseRecord>(ctx.out(artifact::kLabeled));

  std::map<std::string, std::string> texts;
  for (const auto& q : questions) texts[q.id] = q.prompt_text;

  std::vector<ScoredItem> scores;
  scores.reserve(records.size());
  for (const auto& r : records) {
    ScoredItem item;
    item.question_id = r.question_id;
    item.response_id = response_id(r);
    if (ctx.cfg.scorer == "perfect_oracle" || ctx.cfg.scorer == "random") {
      MockScorer scorer = ctx.cfg.scorer == "random" ? MockScorer::random(ctx.cfg.scorer_seed)
                                                     : MockScorer::perfect_oracle();
      auto s = scorer.score(r);
      item.value = s.value;
      item.source = s.source;
    } else if (ctx.cfg.scorer == "yes_logprob") {
      auto s = score_yes_logprob(texts.at(r.question_id), r.raw_text, *ctx.backend,
                                 ctx.cfg.scorer_model, r.question_id);
      item.value = s.value;
      item.source = s.source;
    } else if (ctx.cfg.scorer == "judge_prompt") {
      auto s = score_judge_prompt(texts.at(r.question_id), r.raw_text, *ctx.backend,
                                  ctx.cfg.scorer_model, r.question_id);
      item.value = s.value;
      item.source = s.source;
    } else {
      throw DataError("unknown scorer: " + ctx.cfg.scorer);
    }
    scores.push_back(std::move(item));
  }
  write_jsonl(scores, ctx.out(artifact::kScores));
  manifest.record_stage("score", {ctx.out(artifact::kLabeled)}, {ctx.out(artifact::kScores)});
}

inline void stage_bon(StageContext& ctx) {
  require_artifact(ctx.out(artifact::kLabeled), "label");
  require_artifact(ctx.out(artifact::kScores), "score");
  Manifest manifest(ctx.cfg.out_dir);
  auto records = load_jsonl<ResponseRecord>(ctx.out(artifact::kLabeled));
  auto scores = load_jsonl<ScoredItem>(ctx.out(artifact::kScores));

  std::map<std::pair<std::string, std::string>, double> by_key;
  for (const auto& s : scores) by_key[{s.question_id, s.response_id}] = s.value;

  std::map<std::string, BonCandidateSet> sets;
  for (const auto& r : records) {
    auto& set = sets[r.question_id];
    set.question_id = r.question_id;
    set.scores.push_back(by_key.at({r.question_id, response_id(r)}));
    set.correct.push_back(r.correctness == Correctness::T);
  }
  std::vector<BonCandidateSet> ordered;
  ordered.reserve(sets.size());
  for (auto& [qid, set] : sets) ordered.push_back(std::move(set));
  auto result = bon_accuracy(ordered);
  write_file(ctx.out(artifact::kBon), result.to_json().dump(2) + "\n");
  manifest.record_stage("bon", {ctx.out(artifact::kLabeled), ctx.out(artifact::kScores)},
                        {ctx.out(artifact::kBon)});
}

inline void stage_ppo_sim(StageContext& ctx) {
  Manifest manifest(ctx.cfg.out_dir);
  ppolab::LabEnvironment env =
      ctx.cfg.ppo_scenario.empty()
          ? ppolab::LabEnvironment::default_scenario()
          : ppolab::LabEnvironment::from_json(nlohmann::json::parse(read_file(ctx.cfg.ppo_scenario)));
  ppolab::RewardFunction reward;
  auto kind = ppolab::reward_kind_from_string(ctx.cfg.ppo_reward);
  reward = kind == ppolab::RewardKind::RuleBased ? ppolab::RewardFunction::rule_based()
                                                 : ppolab::RewardFunction::confidence_penalizing();
  reward.kind = kind;
  auto result = ppolab::run_training(env, reward, ctx.cfg.ppo);
  std::filesystem::create_directories(ctx.cfg.out_dir);
  write_file(ctx.out(artifact::kPpoTrace), ppolab::trace_to_csv(result));
  std::vector<std::filesystem::path> inputs;
  if (!ctx.cfg.ppo_scenario.empty()) inputs.push_back(ctx.cfg.ppo_scenario);
  manifest.record_stage("ppo-sim", inputs, {ctx.out(artifact::kPpoTrace)});
}

inline std::string render_report(const std::filesystem::path& run_dir) {
  auto manifest_path = run_dir / artifact::kManifest;
  require_artifact(manifest_path, "any");
  json manifest = json::parse(read_file(manifest_path));
  std::ostringstream out;
  out << "run report: " << run_dir.string() << "\n";

  auto quad_path = run_dir / artifact::kQuadrantSummary;
  if (std::filesystem::exists(quad_path)) {
    json q = json::parse(read_file(quad_path));
    double total = q.at("total").get<double>();
    out << "\nquadrant proportions (" << q.at("total").get<std::size_t>() << " responses)\n";
    for (const char* k : {"tc", "tu", "fc", "fu"}) {
      double n = q.at(k).get<double>();
      out << "  " << k << ": " << n << " (" << (total > 0 ? n / total : 0.0) << ")\n";
    }
  }
  auto dist_path = run_dir / artifact::kDistribution;
  if (std::filesystem::exists(dist_path)) {
    json d = json::parse(read_file(dist_path));
    out << "\npair-type distribution (" << d.at("pairs_emitted").get<std::size_t>()
        << " pairs from " << d.at("questions_seen").get<std::size_t>() << " questions)\n";
    for (const auto& [type, row] : d.at("types").items())
      out << "  " << type << ": available " << row.at("available_fraction").get<double>()
          << ", emitted " << row.at("emitted_fraction").get<double>() << "\n";
  }
  auto bon_path = run_dir / artifact::kBon;
  if (std::filesystem::exists(bon_path)) {
    json b = json::parse(read_file(bon_path));
    out << "\nbest-of-" << b.at("n").get<std::size_t>() << "\n"
        << "  accuracy: " << b.at("bon_accuracy").get<double>() << "\n"
        << "  pass_avg: " << b.at("pass_avg").get<double>() << "\n"
        << "  floor/ceiling: " << b.at("floor").get<double>() << " / "
        << b.at("ceiling").get<double>() << "\n";
  }
  auto trace_path = run_dir / artifact::kPpoTrace;
  if (std::filesystem::exists(trace_path)) {
    auto lines = split_lines(read_file(trace_path));
    if (lines.size() > 1) {
      // last non-empty data row
      std::size_t last = lines.size() - 1;
      while (last > 0 && lines[last].empty()) --last;
      out << "\nppo trace: " << (last) << " iterations, final row: " << lines[last] << "\n";
    }
  }
  return out.str();
}

}  // namespace rforge::pipeline
