#pragma once

// Rollout orchestration: |questions| x |models| x k completions against an
// abstract backend, with a content-addressed file cache, per-item retries,
// and bounded concurrency. Pool contents are independent of worker count:
// the output is sorted by (question, model, index) and every response is
// cached before grading ever sees it.

#include <atomic>
#include <algorithm>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rforge/backend.hpp"
#include "rforge/corpus.hpp"
#include "rforge/prompts.hpp"
#include "rforge/util.hpp"

namespace rforge {

struct SamplingSpec {
  std::vector<std::string> models;
  int k = 5;
  double temperature = 0.7;
  int max_tokens = 1024;
  std::uint64_t seed = 0;  // cache keying only; backends own their sampling

  void validate() const {
    if (models.empty()) throw DataError("sampling spec: no models");
    if (k < 1) throw DataError("sampling spec: k must be >= 1");
    if (temperature < 0.0 || temperature > 2.0)
      throw DataError("sampling spec: temperature out of [0, 2]");
  }
};

struct RawResponse {
  std::string question_id;
  std::string model_id;
  int sample_index = 0;
  std::string text;
  bool ok = false;
  std::string error;  // set when ok is false

  json to_json() const {
    json j;
    j["question_id"] = question_id;
    j["model_id"] = model_id;
    j["sample_index"] = sample_index;
    j["text"] = text;
    j["ok"] = ok;
    if (!ok) j["error"] = error;
    return j;
  }
  static RawResponse from_json(const json& j) {
    RawResponse r;
    r.question_id = j.at("question_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<int>();
    r.text = j.at("text").get<std::string>();
    r.ok = j.at("ok").get<bool>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
  }
};

// Content-addressed completion cache: cache/<model>/<hash>.json. Concurrent
// reads are lock-free (distinct files); writes go through a temp file rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path root) : root_(std::move(root)) {}

  static std::string key(const std::string& model, const std::string& prompt,
                         double temperature, std::uint64_t seed, int index) {
    std::string material = model + "\x1f" + prompt + "\x1f" + std::to_string(temperature) +
                           "\x1f" + std::to_string(seed) + "\x1f" + std::to_string(index);
    return sha256_hex(material);
  }

  std::optional<std::string> lookup(const std::string& model, const std::string& hash) const {
    auto p = path_for(model, hash);
    if (!std::filesystem::exists(p)) return std::nullopt;
    auto j = json::parse(read_file(p));
    return j.at("text").get<std::string>();
  }

  void store(const std::string& model, const std::string& hash, const std::string& text) {
    auto p = path_for(model, hash);
    std::filesystem::create_directories(p.parent_path());
    json j;
    j["text"] = text;
    auto tmp = p;
    tmp += ".tmp." + std::to_string(
        std::hash<std::thread::id>{}(std::this_thread::get_id()));
    write_file(tmp, j.dump());
    std::filesystem::rename(tmp, p);
  }

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path path_for(const std::string& model, const std::string& hash) const {
    return root_ / model / (hash + ".json");
  }
  std::filesystem::path root_;
};

struct SamplingStats {
  std::size_t backend_calls = 0;
  std::size_t cache_hits = 0;
  std::size_t failures = 0;
};

inline std::vector<RawResponse> sample_responses(
    const std::vector<QuestionRecord>& questions, const SamplingSpec& spec,
    CompletionBackend& backend, ResponseCache* cache = nullptr, int parallelism = 8,
    const RetryPolicy& retry = {}, SamplingStats* stats_out = nullptr) {
  spec.validate();
  if (parallelism < 1) throw DataError("parallelism must be >= 1");

  struct Item {
    const QuestionRecord* q;
    const std::string* model;
    int index;
  };
  std::vector<Item> items;
  items.reserve(questions.size() * spec.models.size() * static_cast<std::size_t>(spec.k));
  for (const auto& q : questions)
    for (const auto& m : spec.models)
      for (int i = 0; i < spec.k; ++i) items.push_back({&q, &m, i});

  std::vector<RawResponse> results(items.size());
  SamplingStats stats;
  std::mutex stats_mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= items.size()) return;
      const Item& it = items[idx];
      RawResponse& r = results[idx];
      r.question_id = it.q->id;
      r.model_id = *it.model;
      r.sample_index = it.index;

      std::string prompt = prompts::generation_prompt(it.q->prompt_text);
      std::string hash = ResponseCache::key(*it.model, prompt, spec.temperature, spec.seed, it.index);
      if (cache) {
        if (auto cached = cache->lookup(*it.model, hash)) {
          r.text = *cached;
          r.ok = true;
          std::lock_guard<std::mutex> lk(stats_mu);
          ++stats.cache_hits;
          continue;
        }
      }
      CompletionRequest req;
      req.model = *it.model;
      req.prompt = prompt;
      req.temperature = spec.temperature;
      req.max_tokens = spec.max_tokens;
      req.sample_index = it.index;
      req.item_key = it.q->id;
      try {
        auto result = with_retries(retry, [&] { return backend.complete(req); });
        r.text = result.text;
        r.ok = true;
        // Cache-store failures abort the whole run: a non-resumable run is
        // worse than a dead one.
        if (cache) cache->store(*it.model, hash, r.text);
        std::lock_guard<std::mutex> lk(stats_mu);
        ++stats.backend_calls;
      } catch (const BackendError& e) {
        r.ok = false;
        r.error = e.what();
        std::lock_guard<std::mutex> lk(stats_mu);
        ++stats.backend_calls;
        ++stats.failures;
      }
    }
  };

  std::vector<std::thread> threads;
  int n_threads = std::min<int>(parallelism, static_cast<int>(items.size()));
  threads.reserve(static_cast<std::size_t>(std::max(1, n_threads)));
  for (int t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // Fixed output order regardless of completion order.
  std::sort(results.begin(), results.end(), [](const RawResponse& a, const RawResponse& b) {
    return std::tie(a.question_id, a.model_id, a.sample_index) <
           std::tie(b.question_id, b.model_id, b.sample_index);
  });
  if (stats_out) *stats_out = stats;
  return results;
}

// Groups successful raw responses into question -> model -> texts for labeling.
inline std::map<std::string, std::map<std::string, std::vector<std::string>>> group_responses(
    const std::vector<RawResponse>& responses) {
  std::map<std::string, std::map<std::string, std::vector<std::string>>> out;
  for (const auto& r : responses)
    if (r.ok) out[r.question_id][r.model_id].push_back(r.text);
  return out;
}

}  // namespace rforge
