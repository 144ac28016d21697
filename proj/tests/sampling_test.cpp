#include <doctest.h>

#include <filesystem>

#include "rforge/fixtures.hpp"
#include "rforge/sampling.hpp"

using namespace rforge;

namespace {

std::vector<QuestionRecord> toy_questions(int n) {
  std::vector<QuestionRecord> qs;
  for (int i = 0; i < n; ++i) {
    QuestionRecord q;
    q.id = "q" + std::to_string(i);
    q.dataset = "toy";
    q.domain = Domain::Other;
    q.prompt_text = "prompt " + std::to_string(i);
    q.answer_key = AnswerKey::choice('A');
    qs.push_back(std::move(q));
  }
  return qs;
}

MockBackend scripted_backend(const std::vector<QuestionRecord>& qs,
                             const std::vector<std::string>& models, int k) {
  MockBackend b;
  for (const auto& q : qs)
    for (const auto& m : models)
      for (int i = 0; i < k; ++i)
        b.script(q.id, m, i, "Answer: " + q.id + "/" + m + "/" + std::to_string(i));
  return b;
}

std::filesystem::path fresh_dir(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / "rforge_sampling_test" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("response count is questions x models x k") {
  auto qs = toy_questions(2);
  SamplingSpec spec;
  spec.models = {"m1", "m2"};
  spec.k = 5;
  auto backend = scripted_backend(qs, spec.models, spec.k);
  auto pool = sample_responses(qs, spec, backend);
  CHECK(pool.size() == 20);
  for (const auto& r : pool) CHECK(r.ok);
}

TEST_CASE("warm cache avoids backend calls and reproduces the pool") {
  auto qs = toy_questions(3);
  SamplingSpec spec;
  spec.models = {"m1"};
  spec.k = 2;
  auto backend = scripted_backend(qs, spec.models, spec.k);
  ResponseCache cache(fresh_dir("warm"));

  SamplingStats first, second;
  auto pool1 = sample_responses(qs, spec, backend, &cache, 4, {}, &first);
  CHECK(first.backend_calls == 6);
  CHECK(first.cache_hits == 0);

  MockBackend empty;  // any request would be a scripted miss
  auto pool2 = sample_responses(qs, spec, empty, &cache, 4, {}, &second);
  CHECK(second.backend_calls == 0);
  CHECK(second.cache_hits == 6);
  REQUIRE(pool1.size() == pool2.size());
  for (std::size_t i = 0; i < pool1.size(); ++i) CHECK(pool1[i].text == pool2[i].text);
}

TEST_CASE("permanent failure on one item leaves an error record, run continues") {
  auto qs = toy_questions(4);
  SamplingSpec spec;
  spec.models = {"m1"};
  spec.k = 5;
  auto backend = scripted_backend(qs, spec.models, spec.k);

  // Knock out one scripted entry by rebuilding without it.
  MockBackend faulty;
  for (const auto& q : qs)
    for (int i = 0; i < spec.k; ++i)
      if (!(q.id == "q2" && i == 3))
        faulty.script(q.id, "m1", i, "Answer: x");

  RetryPolicy retry;
  retry.max_attempts = 2;
  retry.initial_backoff = std::chrono::milliseconds(1);
  SamplingStats stats;
  auto pool = sample_responses(qs, spec, faulty, nullptr, 4, retry, &stats);
  CHECK(pool.size() == 20);
  std::size_t ok = 0, failed = 0;
  for (const auto& r : pool) (r.ok ? ok : failed)++;
  CHECK(ok == 19);
  CHECK(failed == 1);
  CHECK(stats.failures == 1);
}

TEST_CASE("pool is independent of worker count") {
  auto fx = fixtures::generate_fixtures();
  auto backend = fixtures::make_mock_backend(fx.script);
  SamplingSpec spec;
  spec.models = fixtures::kModels;
  spec.k = fixtures::kSamplesPerModel;

  auto serial = sample_responses(fx.corpus, spec, backend, nullptr, 1);
  auto parallel = sample_responses(fx.corpus, spec, backend, nullptr, 64);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].question_id == parallel[i].question_id);
    CHECK(serial[i].text == parallel[i].text);
  }
}

TEST_CASE("cache keys separate every tuple component") {
  auto k = ResponseCache::key("m", "p", 0.7, 1, 0);
  CHECK(k != ResponseCache::key("m2", "p", 0.7, 1, 0));
  CHECK(k != ResponseCache::key("m", "p2", 0.7, 1, 0));
  CHECK(k != ResponseCache::key("m", "p", 0.8, 1, 0));
  CHECK(k != ResponseCache::key("m", "p", 0.7, 2, 0));
  CHECK(k != ResponseCache::key("m", "p", 0.7, 1, 1));
}

TEST_CASE("spec validation") {
  SamplingSpec spec;
  spec.models = {"m"};
  spec.k = 0;
  CHECK_THROWS_AS(spec.validate(), DataError);
  spec.k = 1;
  spec.temperature = 2.5;
  CHECK_THROWS_AS(spec.validate(), DataError);
}
