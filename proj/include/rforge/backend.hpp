#pragma once

// Abstract completion backend plus the two shipped implementations: an HTTP
// client speaking a chat-completions-style JSON protocol, and a deterministic
// scripted mock for tests and desk-scale runs.

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "rforge/util.hpp"

namespace rforge {

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
  // Alternative candidates at this position, token -> logprob.
  std::map<std::string, double> top_candidates;
};

struct CompletionRequest {
  std::string model;
  std::string prompt;
  double temperature = 0.7;
  int max_tokens = 1024;
  int sample_index = 0;
  bool want_logprobs = false;
  int top_logprobs = 20;
  // Caller-assigned key naming the item this request serves (question id or
  // scoring key). Ignored by network backends; used by the mock to address
  // its script.
  std::string item_key;
};

struct CompletionResult {
  std::string text;
  std::string finish_reason = "stop";
  std::vector<TokenLogprob> logprobs;  // empty unless requested and supported
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
  virtual bool supports_logprobs() const { return false; }
  virtual std::string id() const = 0;
};

// Scripted backend: (question-scoped key, model, sample index) -> canned text.
// Keys here are opaque; the sampler keys by question id.
class MockBackend : public CompletionBackend {
 public:
  struct Key {
    std::string item;
    std::string model;
    int index;
    bool operator<(const Key& o) const {
      return std::tie(item, model, index) < std::tie(o.item, o.model, o.index);
    }
  };

  void script(std::string item, std::string model, int index, std::string text,
              std::vector<TokenLogprob> logprobs = {}) {
    entries_[Key{std::move(item), std::move(model), index}] = {std::move(text), std::move(logprobs)};
  }

  CompletionResult complete(const CompletionRequest& req) override {
    auto it = entries_.find(Key{req.item_key, req.model, req.sample_index});
    if (it == entries_.end())
      throw BackendError("mock backend: no script for (" + req.item_key + ", " + req.model +
                         ", " + std::to_string(req.sample_index) + ")");
    CompletionResult r;
    r.text = it->second.text;
    r.logprobs = it->second.logprobs;
    return r;
  }

  bool supports_logprobs() const override { return true; }
  std::string id() const override { return "mock"; }

 private:
  struct Entry {
    std::string text;
    std::vector<TokenLogprob> logprobs;
  };
  std::map<Key, Entry> entries_;
};

// Retry wrapper shared by all network-facing call sites.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
};

template <typename Fn>
auto with_retries(const RetryPolicy& policy, Fn&& fn) -> decltype(fn()) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return fn();
    } catch (const BackendError&) {
      if (attempt >= policy.max_attempts) throw;
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
}

}  // namespace rforge
