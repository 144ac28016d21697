#include <doctest.h>

#include <random>

#include "rforge/pairs.hpp"

using namespace rforge;

namespace {

ResponseRecord rec(const std::string& qid, Quadrant q, int index, const std::string& model = "m") {
  ResponseRecord r;
  r.question_id = qid;
  r.model_id = model;
  r.sample_index = index;
  r.raw_text = "Answer: " + qid + "/" + model + "/" + std::to_string(index);
  r.extracted = {std::to_string(index), true};
  r.quadrant = q;
  r.correctness = (q == Quadrant::TC || q == Quadrant::TU) ? Correctness::T : Correctness::F;
  r.confidence = (q == Quadrant::TC || q == Quadrant::FC) ? Confidence::C : Confidence::U;
  r.consistency = r.confidence == Confidence::C ? 0.8 : 0.2;
  return r;
}

std::vector<ResponseRecord> pool_with(const std::string& qid,
                                      std::initializer_list<Quadrant> quads) {
  std::vector<ResponseRecord> v;
  int i = 0;
  for (auto q : quads) v.push_back(rec(qid, q, i++));
  return v;
}

}  // namespace

TEST_CASE("available pair types") {
  CHECK(available_pair_types(pool_with("q", {Quadrant::TC, Quadrant::TC, Quadrant::TC,
                                             Quadrant::FU, Quadrant::FU})) ==
        std::set<PairType>{PairType::TcFu});
  CHECK(available_pair_types(pool_with("q", {Quadrant::TU, Quadrant::FC, Quadrant::FU}))
            .empty());
  CHECK(available_pair_types(pool_with("q", {Quadrant::TC, Quadrant::TU, Quadrant::FC,
                                             Quadrant::FU})) ==
        std::set<PairType>{PairType::TcTu, PairType::TcFc, PairType::TcFu});
}

TEST_CASE("single available type is always selected in natural mode") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  pools["q"] = pool_with("q", {Quadrant::TC, Quadrant::FU, Quadrant::FU});
  PairConfig cfg;
  cfg.seed = 9;
  auto result = build_pairs(pools, cfg);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].pair_type == PairType::TcFu);
  CHECK(result.pairs[0].chosen.quadrant == Quadrant::TC);
}

TEST_CASE("every chosen side is T&C") {
  std::mt19937_64 rng(31);
  std::map<std::string, std::vector<ResponseRecord>> pools;
  std::uniform_int_distribution<int> qd(0, 3);
  for (int q = 0; q < 500; ++q) {
    std::vector<ResponseRecord> pool;
    for (int i = 0; i < 15; ++i)
      pool.push_back(rec("q" + std::to_string(q), static_cast<Quadrant>(qd(rng)), i));
    pools["q" + std::to_string(q)] = pool;
  }
  for (auto mode : {PairMode::Natural, PairMode::Exhaustive}) {
    PairConfig cfg;
    cfg.mode = mode;
    cfg.seed = 7;
    for (const auto& p : build_pairs(pools, cfg).pairs) {
      CHECK(p.chosen.quadrant == Quadrant::TC);
      CHECK(p.chosen.question_id == p.rejected.question_id);
    }
  }
}

TEST_CASE("exhaustive mode emits one pair per available type") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  pools["q1"] = pool_with("q1", {Quadrant::TC, Quadrant::TU, Quadrant::FC, Quadrant::FU});
  pools["q2"] = pool_with("q2", {Quadrant::TC, Quadrant::FU});
  pools["q3"] = pool_with("q3", {Quadrant::TU, Quadrant::FU});
  PairConfig cfg;
  cfg.mode = PairMode::Exhaustive;
  auto result = build_pairs(pools, cfg);
  CHECK(result.pairs.size() == 4);  // 3 + 1 + 0
}

TEST_CASE("fixed seed is bit-reproducible") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  for (int q = 0; q < 50; ++q)
    pools["q" + std::to_string(q)] =
        pool_with("q" + std::to_string(q),
                  {Quadrant::TC, Quadrant::TC, Quadrant::TU, Quadrant::FC, Quadrant::FU});
  PairConfig cfg;
  cfg.seed = 1234;
  auto a = build_pairs(pools, cfg);
  auto b = build_pairs(pools, cfg);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i)
    CHECK(a.pairs[i].to_json().dump() == b.pairs[i].to_json().dump());
  cfg.seed = 1235;
  auto c = build_pairs(pools, cfg);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.pairs.size(); ++i)
    any_diff = any_diff || a.pairs[i].to_json().dump() != c.pairs[i].to_json().dump();
  CHECK(any_diff);
}

// Synthetic corpus engineered so availability is 50/25/25 across the three
// types; natural-mode emitted fractions must track it within +-0.02 at n=10k.
TEST_CASE("natural mode tracks availability fractions") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  for (int q = 0; q < 10000; ++q) {
    std::string qid = "q" + std::to_string(q);
    // every question offers T&C|F&U; alternate questions add exactly one of
    // the other two types -> availability 50% / 25% / 25%
    std::vector<Quadrant> quads = {Quadrant::TC, Quadrant::TC, Quadrant::FU};
    quads.push_back(q % 2 == 0 ? Quadrant::TU : Quadrant::FC);
    pools[qid] = pool_with(qid, {quads[0], quads[1], quads[2], quads[3]});
  }
  PairConfig cfg;
  cfg.seed = 2718;
  auto result = build_pairs(pools, cfg);
  CHECK(result.pairs.size() == 10000);
  const auto& rows = result.report.rows;
  CHECK(rows.at(PairType::TcFu).available_fraction == doctest::Approx(0.5));
  CHECK(rows.at(PairType::TcTu).available_fraction == doctest::Approx(0.25));
  CHECK(rows.at(PairType::TcFu).emitted_fraction == doctest::Approx(0.5).epsilon(0.04));
  CHECK(std::fabs(rows.at(PairType::TcFu).emitted_fraction - 0.5) <= 0.02);
  CHECK(std::fabs(rows.at(PairType::TcTu).emitted_fraction - 0.25) <= 0.02);
  CHECK(std::fabs(rows.at(PairType::TcFc).emitted_fraction - 0.25) <= 0.02);
}

TEST_CASE("correctness_only ignores confidence labels") {
  std::map<std::string, std::vector<ResponseRecord>> pools, flipped;
  for (int q = 0; q < 100; ++q) {
    std::string qid = "q" + std::to_string(q);
    auto pool = pool_with(qid, {Quadrant::TC, Quadrant::TU, Quadrant::FC, Quadrant::FU});
    pools[qid] = pool;
    // permute confidence: swap C and U within each correctness class
    for (auto& r : pool) {
      r.confidence = r.confidence == Confidence::C ? Confidence::U : Confidence::C;
      r.quadrant = make_quadrant(r.correctness, r.confidence);
    }
    flipped[qid] = pool;
  }
  PairConfig cfg;
  cfg.mode = PairMode::CorrectnessOnly;
  cfg.seed = 5;
  auto a = build_pairs(pools, cfg);
  auto b = build_pairs(flipped, cfg);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].chosen.raw_text == b.pairs[i].chosen.raw_text);
    CHECK(a.pairs[i].rejected.raw_text == b.pairs[i].rejected.raw_text);
    CHECK(a.pairs[i].chosen.correctness == Correctness::T);
    CHECK(a.pairs[i].rejected.correctness == Correctness::F);
  }
}

TEST_CASE("confidence_only uses strict > 0.5 and ignores correctness") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  auto exactly_half = rec("q", Quadrant::TC, 0);
  exactly_half.consistency = 0.5;  // strict >: goes to the negative side
  auto high = rec("q", Quadrant::FC, 1);
  high.consistency = 0.6;
  pools["q"] = {exactly_half, high};
  PairConfig cfg;
  cfg.mode = PairMode::ConfidenceOnly;
  auto result = build_pairs(pools, cfg);
  REQUIRE(result.pairs.size() == 1);
  CHECK(result.pairs[0].chosen.sample_index == 1);   // the 0.6 record
  CHECK(result.pairs[0].rejected.sample_index == 0); // the 0.5 record
}

TEST_CASE("budget and empty pools") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  CHECK(build_pairs(pools, PairConfig{}).pairs.empty());
  PairConfig bad;
  bad.budget = 0;
  CHECK_THROWS_AS(build_pairs(pools, bad), DataError);
}

TEST_CASE("export_sft emits exactly two records per pair with verbatim bytes") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  pools["q1"] = pool_with("q1", {Quadrant::TC, Quadrant::FU});
  PairConfig cfg;
  auto pairs = build_pairs(pools, cfg).pairs;
  REQUIRE(pairs.size() == 1);
  std::map<std::string, std::string> texts = {{"q1", "What is 2+2?"}};
  auto records = export_sft(pairs, texts);
  REQUIRE(records.size() == 2);
  CHECK(records[0].output == "Yes");
  CHECK(records[1].output == "No");
  CHECK(records[0].instruction == prompts::kSftInstruction);
  CHECK(records[0].input ==
        "Question:\nWhat is 2+2?\n\nModel's Answer:\n" + pairs[0].chosen.raw_text);
  CHECK(records[1].input ==
        "Question:\nWhat is 2+2?\n\nModel's Answer:\n" + pairs[0].rejected.raw_text);
}

TEST_CASE("10k pairs export 20k records") {
  std::map<std::string, std::vector<ResponseRecord>> pools;
  std::map<std::string, std::string> texts;
  for (int q = 0; q < 10000; ++q) {
    std::string qid = "q" + std::to_string(q);
    pools[qid] = pool_with(qid, {Quadrant::TC, Quadrant::FU});
    texts[qid] = "question " + qid;
  }
  auto pairs = build_pairs(pools, PairConfig{}).pairs;
  REQUIRE(pairs.size() == 10000);
  CHECK(export_sft(pairs, texts).size() == 20000);
}
