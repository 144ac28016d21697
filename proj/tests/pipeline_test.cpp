#include <doctest.h>

#include <filesystem>

#include "rforge/fixtures.hpp"
#include "rforge/pipeline.hpp"

using namespace rforge;
using namespace rforge::pipeline;

namespace {

struct Run {
  std::filesystem::path dir;
  std::filesystem::path corpus;
  MockBackend backend;
  StageContext ctx;

  explicit Run(const char* name) {
    dir = std::filesystem::temp_directory_path() / "rforge_pipeline_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    auto fx = fixtures::generate_fixtures();
    corpus = dir / "corpus.jsonl";
    write_jsonl(fx.corpus, corpus);
    backend = fixtures::make_mock_backend(fx.script);
    ctx.cfg.corpus_path = corpus;
    ctx.cfg.out_dir = dir / "run";
    ctx.cfg.sampling.models = fixtures::kModels;
    ctx.cfg.selection.band_low = 0.0;  // the toy corpus is one dataset; keep it
    ctx.cfg.selection.band_high = 1.0;
    ctx.backend = &backend;
  }
};

}  // namespace

TEST_CASE("stages demand their prerequisites by name") {
  Run run("prereq");
  CHECK_THROWS_WITH_AS(stage_label(run.ctx), doctest::Contains("'sample'"), DataError);
  CHECK_THROWS_WITH_AS(stage_sample(run.ctx), doctest::Contains("'filter'"), DataError);
  CHECK_THROWS_WITH_AS(stage_bon(run.ctx), doctest::Contains("'label'"), DataError);
}

TEST_CASE("full pipeline on the toy corpus with the mock backend") {
  Run run("full");
  stage_filter(run.ctx);
  stage_sample(run.ctx);
  stage_label(run.ctx);
  stage_pairs(run.ctx);
  stage_export_sft(run.ctx);
  stage_score(run.ctx);
  stage_bon(run.ctx);
  stage_ppo_sim(run.ctx);

  Manifest manifest(run.ctx.cfg.out_dir);
  for (const char* stage : {"filter", "sample", "label", "pairs", "export-sft", "score", "bon",
                            "ppo-sim"})
    CHECK(manifest.has_stage(stage));

  // report lists the three pair-type fractions and they sum to 1
  auto report = render_report(run.ctx.cfg.out_dir);
  CHECK(report.find("T&C|F&U") != std::string::npos);
  json dist = json::parse(read_file(run.ctx.cfg.out_dir / artifact::kDistribution));
  double total = 0.0;
  for (const auto& [k, v] : dist.at("types").items())
    total += v.at("emitted_fraction").get<double>();
  CHECK(total == doctest::Approx(1.0));

  // report fractions equal recomputation from the raw pair file
  auto pairs = load_jsonl<PreferencePair>(run.ctx.cfg.out_dir / artifact::kPairs);
  std::map<PairType, std::size_t> counts;
  for (const auto& p : pairs) ++counts[p.pair_type];
  for (const auto& [k, v] : dist.at("types").items()) {
    double expect = counts.count(pair_type_from_string(k))
                        ? static_cast<double>(counts[pair_type_from_string(k)]) / pairs.size()
                        : 0.0;
    CHECK(v.at("emitted_fraction").get<double>() == doctest::Approx(expect));
  }
}

TEST_CASE("re-running pairs with the same seed yields an identical file") {
  Run run("rerun");
  stage_filter(run.ctx);
  stage_sample(run.ctx);
  stage_label(run.ctx);
  stage_pairs(run.ctx);
  auto h1 = file_sha256(run.ctx.cfg.out_dir / artifact::kPairs);
  std::filesystem::remove(run.ctx.cfg.out_dir / artifact::kPairs);
  stage_pairs(run.ctx);
  CHECK(file_sha256(run.ctx.cfg.out_dir / artifact::kPairs) == h1);
}

TEST_CASE("report omits the ppo section without the ppo stage") {
  Run run("noppo");
  stage_filter(run.ctx);
  stage_sample(run.ctx);
  stage_label(run.ctx);
  auto report = render_report(run.ctx.cfg.out_dir);
  CHECK(report.find("ppo trace") == std::string::npos);
}

TEST_CASE("config file parsing with sections and overrides") {
  auto dir = std::filesystem::temp_directory_path() / "rforge_pipeline_test";
  std::filesystem::create_directories(dir);
  auto p = dir / "run.conf";
  write_file(p,
             "# toy run\n"
             "corpus = corpus.jsonl\n"
             "parallelism = 4\n"
             "[sampling]\n"
             "models = m1, m2\n"
             "k = 3\n"
             "temperature = 0.9\n"
             "[pairs]\n"
             "mode = exhaustive\n"
             "seed = 42\n"
             "[ppo]\n"
             "epsilon = 0.1\n");
  RunConfig cfg;
  apply_config(cfg, parse_config_file(p));
  CHECK(cfg.corpus_path == "corpus.jsonl");
  CHECK(cfg.parallelism == 4);
  CHECK(cfg.sampling.models == std::vector<std::string>{"m1", "m2"});
  CHECK(cfg.sampling.k == 3);
  CHECK(cfg.sampling.temperature == doctest::Approx(0.9));
  CHECK(cfg.pairs.mode == PairMode::Exhaustive);
  CHECK(cfg.pairs.seed == 42);
  CHECK(cfg.ppo.epsilon == doctest::Approx(0.1));
  CHECK_THROWS_AS(parse_config_file(dir / "absent.conf"), DataError);
}
