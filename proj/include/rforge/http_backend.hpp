#pragma once

// Chat-completions HTTP client. POSTs
//   {"model": ..., "messages": [{"role":"user","content": ...}],
//    "temperature": ..., "max_tokens": ..., "logprobs": true, "top_logprobs": k}
// and reads the first choice's message content and, when requested, the
// per-token top-k log-probabilities.

#include <memory>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "rforge/backend.hpp"

namespace rforge {

class HttpBackend : public CompletionBackend {
 public:
  HttpBackend(std::string base_url, std::string path = "/v1/chat/completions",
              std::string api_key = "")
      : base_url_(std::move(base_url)), path_(std::move(path)), api_key_(std::move(api_key)) {}

  CompletionResult complete(const CompletionRequest& req) override {
    nlohmann::ordered_json body;
    body["model"] = req.model;
    body["messages"] = nlohmann::ordered_json::array(
        {{{"role", "user"}, {"content", req.prompt}}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    if (req.want_logprobs) {
      body["logprobs"] = true;
      body["top_logprobs"] = req.top_logprobs;
    }

    httplib::Client client(base_url_);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(path_, headers, body.dump(), "application/json");
    if (!res)
      throw BackendError("HTTP backend unreachable: " + base_url_ + path_);
    if (res->status != 200)
      throw BackendError("HTTP backend status " + std::to_string(res->status) + ": " + res->body);

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("HTTP backend returned malformed JSON: ") + e.what());
    }

    CompletionResult out;
    try {
      const auto& choice = reply.at("choices").at(0);
      out.text = choice.at("message").at("content").get<std::string>();
      if (choice.contains("finish_reason") && !choice.at("finish_reason").is_null())
        out.finish_reason = choice.at("finish_reason").get<std::string>();
      if (req.want_logprobs && choice.contains("logprobs") && !choice.at("logprobs").is_null()) {
        for (const auto& tok : choice.at("logprobs").at("content")) {
          TokenLogprob t;
          t.token = tok.at("token").get<std::string>();
          t.logprob = tok.at("logprob").get<double>();
          if (tok.contains("top_logprobs"))
            for (const auto& cand : tok.at("top_logprobs"))
              t.top_candidates[cand.at("token").get<std::string>()] =
                  cand.at("logprob").get<double>();
          out.logprobs.push_back(std::move(t));
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(std::string("HTTP backend reply missing fields: ") + e.what());
    }
    return out;
  }

  bool supports_logprobs() const override { return true; }
  std::string id() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  std::string path_;
  std::string api_key_;
};

}  // namespace rforge
