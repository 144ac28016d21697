// Pipeline driver. Subcommands mirror the stages:
//   filter, sample, label, pairs, export-sft, score, bon, ppo-sim, report
// plus gen-fixtures for regenerating the bundled toy corpus and mock script.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 backend error.

#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "rforge/fixtures.hpp"
#include "rforge/http_backend.hpp"
#include "rforge/pipeline.hpp"

using namespace rforge;

namespace {

std::unique_ptr<CompletionBackend> make_backend(const std::string& spec) {
  if (spec.rfind("mock:", 0) == 0) {
    auto script = load_jsonl<fixtures::ScriptEntry>(spec.substr(5));
    return std::make_unique<MockBackend>(fixtures::make_mock_backend(script));
  }
  if (spec.rfind("http:", 0) == 0 || spec.rfind("https:", 0) == 0) {
    const char* key_env = std::getenv("RFORGE_API_KEY");
    return std::make_unique<HttpBackend>(spec, "/v1/chat/completions",
                                         key_env ? key_env : "");
  }
  throw DataError("backend must be 'mock:<script.jsonl>' or an http(s) URL, got: " + spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reward-data forge: difficulty filtering, rollout labeling, "
               "preference-pair export, reward scoring, best-of-n evaluation, "
               "and a desk-scale PPO lab"};
  app.require_subcommand(1);

  pipeline::RunConfig cfg;
  cfg.sampling.models = fixtures::kModels;
  std::string config_path, backend_spec = "mock:fixtures/script.jsonl";
  std::uint64_t global_seed = 0;
  bool seed_set = false;

  app.add_option("--config", config_path, "sectioned key=value config file");
  app.add_option("--out", cfg.out_dir, "run directory");
  app.add_option("--corpus", cfg.corpus_path, "canonical-jsonl corpus");
  app.add_option("--backend", backend_spec, "mock:<script.jsonl> or http(s) base URL");
  app.add_option("--parallelism", cfg.parallelism, "max in-flight backend requests");
  auto* seed_opt = app.add_option("--seed", global_seed, "seed for all stochastic stages");

  auto* filter = app.add_subcommand("filter", "dataset accuracy band + discriminative set");
  filter->add_option("--band-low", cfg.selection.band_low, "retention band lower bound");
  filter->add_option("--band-high", cfg.selection.band_high, "retention band upper bound");
  filter->add_option("--reference-model", cfg.reference_model, "grading reference model");

  auto* sample = app.add_subcommand("sample", "k rollouts per question per model");
  sample->add_option("--models", cfg.sampling.models, "model ids")->delimiter(',');
  sample->add_option("--k", cfg.sampling.k, "rollouts per question per model");
  sample->add_option("--temperature", cfg.sampling.temperature, "decoding temperature");
  sample->add_option("--max-tokens", cfg.sampling.max_tokens, "completion cap");

  auto* label = app.add_subcommand("label", "correctness/confidence quadrants");
  label->add_option("--tau", cfg.labeling.tau, "confidence threshold (C iff u >= tau)");

  auto* pairs_cmd = app.add_subcommand("pairs", "preference-pair construction");
  std::string pair_mode = "natural";
  pairs_cmd->add_option("--mode", pair_mode,
                        "natural | exhaustive | correctness_only | confidence_only");
  pairs_cmd->add_flag("--weighted-type-draw", cfg.pairs.weighted_type_draw,
                      "draw pair types availability-weighted instead of uniformly");

  app.add_subcommand("export-sft", "emit Yes/No training records");

  auto* score = app.add_subcommand("score", "reward-score every labeled response");
  score->add_option("--scorer", cfg.scorer,
                    "perfect_oracle | random | yes_logprob | judge_prompt");
  score->add_option("--scorer-model", cfg.scorer_model, "model id for backend scorers");

  auto* bon = app.add_subcommand("bon", "best-of-n selection accuracy");
  (void)bon;

  auto* ppo = app.add_subcommand("ppo-sim", "contextual-bandit PPO lab");
  ppo->add_option("--scenario", cfg.ppo_scenario, "environment JSON (default scenario if unset)");
  ppo->add_option("--reward", cfg.ppo_reward,
                  "rule_based | confidence_penalizing | mock_scorer");
  ppo->add_option("--epsilon", cfg.ppo.epsilon, "clip range");
  ppo->add_option("--lr", cfg.ppo.learning_rate, "learning rate");
  ppo->add_option("--iterations", cfg.ppo.iterations, "training iterations");
  ppo->add_option("--batch-size", cfg.ppo.batch_size, "samples per iteration");

  auto* report = app.add_subcommand("report", "human-readable run summary");

  auto* genfix = app.add_subcommand("gen-fixtures", "regenerate the bundled toy fixtures");
  std::string fixture_dir = "fixtures";
  std::uint64_t fixture_seed = 17;
  genfix->add_option("--dir", fixture_dir, "output directory");
  genfix->add_option("--fixture-seed", fixture_seed, "generation seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (!config_path.empty()) pipeline::apply_config(cfg, pipeline::parse_config_file(config_path));
    seed_set = seed_opt->count() > 0;
    if (seed_set) {
      cfg.sampling.seed = global_seed;
      cfg.pairs.seed = global_seed;
      cfg.scorer_seed = global_seed;
      cfg.ppo.seed = global_seed;
    }
    cfg.pairs.mode = pair_mode_from_string(pair_mode);

    if (genfix->parsed()) {
      auto fx = fixtures::generate_fixtures(fixture_seed);
      std::filesystem::path dir(fixture_dir);
      write_jsonl(fx.corpus, dir / "corpus.jsonl");
      write_jsonl(fx.script, dir / "script.jsonl");
      std::cout << "wrote " << fx.corpus.size() << " questions and " << fx.script.size()
                << " scripted responses under " << dir.string() << "\n";
      return 0;
    }
    if (report->parsed()) {
      std::cout << pipeline::render_report(cfg.out_dir);
      return 0;
    }

    if (cfg.out_dir.empty()) {
      std::cerr << "error: --out is required\n";
      return 1;
    }

    pipeline::StageContext ctx;
    ctx.cfg = cfg;
    std::unique_ptr<CompletionBackend> backend;
    bool needs_backend = filter->parsed() || sample->parsed() ||
                         (score->parsed() && (cfg.scorer == "yes_logprob" ||
                                              cfg.scorer == "judge_prompt"));
    if (needs_backend) {
      backend = make_backend(backend_spec);
      ctx.backend = backend.get();
    }

    if (filter->parsed()) pipeline::stage_filter(ctx);
    else if (sample->parsed()) pipeline::stage_sample(ctx);
    else if (label->parsed()) pipeline::stage_label(ctx);
    else if (pairs_cmd->parsed()) pipeline::stage_pairs(ctx);
    else if (app.get_subcommand("export-sft")->parsed()) pipeline::stage_export_sft(ctx);
    else if (score->parsed()) pipeline::stage_score(ctx);
    else if (bon->parsed()) pipeline::stage_bon(ctx);
    else if (ppo->parsed()) pipeline::stage_ppo_sim(ctx);
    return 0;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
