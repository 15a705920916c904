// Copyright 2026 The Credence Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "credence/cohort.hpp"
#include "credence/prompt_forge.hpp"

namespace credence {

struct ModelEndpoint {
  std::string name;      // label used in reports; defaults to model_name
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model_name;
  std::string api_key_env;  // variable holding the bearer token
  int max_inflight = 4;
  double timeout_s = 60.0;
  bool supports_logprobs = false;

  void validate() const;
  const std::string& display_name() const {
    return name.empty() ? model_name : name;
  }
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
};

struct ChatRequest {
  std::string model;
  std::string system_text;  // omitted from the wire when empty
  std::string user_text;
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int n = 1;
  bool logprobs = false;
  int top_logprobs = 0;
};

struct ChatChoice {
  std::string content;
  // Top alternatives at the first generated token, when requested.
  std::vector<TokenLogprob> first_token_top_logprobs;

  friend bool operator==(const ChatChoice&, const ChatChoice&) = default;
};

struct ChatResponse {
  std::vector<ChatChoice> choices;
  friend bool operator==(const ChatResponse&, const ChatResponse&) = default;
};

// Transport to a model. Implementations throw TransportError on failure.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ChatResponse chat(const ChatRequest& request) = 0;
  virtual std::vector<std::vector<float>> embed(
      const std::string& model, const std::vector<std::string>& texts) = 0;
};

enum class Verdict { kTrue, kFake, kUnparseable };

std::string_view verdict_name(Verdict v);
std::optional<Verdict> parse_verdict_name(std::string_view name);

// First whole-word, case-insensitive occurrence of "true" or "fake".
Verdict parse_verdict(std::string_view reply);

inline std::optional<Label> verdict_label(Verdict v) {
  if (v == Verdict::kTrue) return Label::kTrue;
  if (v == Verdict::kFake) return Label::kFake;
  return std::nullopt;
}

struct PredictionRecord {
  std::string pid;
  std::string claim_id;
  std::string condition_fingerprint;
  std::string condition_label;
  std::string model_name;
  std::optional<Axis> axis;
  std::optional<Group> group;  // persona group used in the prompt
  int run = 0;
  std::uint64_t seed = 0;
  Verdict predicted_label = Verdict::kUnparseable;
  std::optional<double> confidence;
  std::string confidence_method;  // "logprob" | "sampled" | ""
  std::string raw_text;
  std::string cache_key;
  double latency_ms = 0.0;
  bool cached = false;
};

// Equality over every field except cached and latency_ms.
bool same_outcome(const PredictionRecord& a, const PredictionRecord& b);

// Stable text form without cached/latency, used for multiset comparisons
// and record dumps.
std::string canonical_record(const PredictionRecord& r);

struct Sampling {
  double temperature = 0.0;
  std::uint64_t seed = 0;
  int n = 1;
};

// SHA-256 over (model, system, user, temperature, seed). Requests with
// n > 1 or logprobs add a variant tag so they never alias a plain call.
std::string cache_key(const ChatRequest& request);

// Append-only store of chat responses keyed by cache_key. An empty path
// keeps everything in memory. Thread-safe.
class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path file);

  std::optional<ChatResponse> get(const std::string& key) const;
  void put(const std::string& key, const ChatResponse& response);
  bool contains(const std::string& key) const;
  std::size_t size() const;
  const std::filesystem::path& path() const { return file_; }

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, ChatResponse> entries_;
};

struct GatewayOptions {
  int max_retries = 3;
  std::chrono::milliseconds backoff_base{1000};
  bool confidence_fallback = true;
  int fallback_samples = 10;
  int top_logprobs = 20;
};

struct ConfidenceEstimate {
  double value = 0.5;  // in [0.5, 1]
  Verdict label = Verdict::kUnparseable;
  std::string method;  // "logprob" or "sampled"
  double p_true = 0.0;
  double p_fake = 0.0;
};

class InflightLimiter;

// Shared across workers: bounded in-flight requests per endpoint,
// serialized cache writes.
class Gateway {
 public:
  Gateway(ModelEndpoint endpoint, std::shared_ptr<Backend> backend,
          std::shared_ptr<ResponseCache> cache = nullptr,
          GatewayOptions options = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  const ModelEndpoint& endpoint() const { return endpoint_; }
  const GatewayOptions& options() const { return options_; }

  ChatRequest make_request(const PersonaPrompt& prompt,
                           const Sampling& sampling) const;
  bool is_cached(const PersonaPrompt& prompt, const Sampling& sampling) const;

  // Throws TransportError after retries are exhausted.
  PredictionRecord complete(const PersonaPrompt& prompt,
                            const Sampling& sampling);

  // Renormalized first-token mass on true/fake for the zero-shot verdict
  // prompt; falls back to sampling when logprobs are unavailable.
  ConfidenceEstimate factual_confidence(const Claim& claim,
                                        std::uint64_t seed = 0);

  // One vector per text, cached by text hash. Throws ValidationError on
  // empty input or dimension drift.
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts);
  std::optional<std::size_t> embedding_dim() const;

 private:
  ChatResponse call_with_retries(const ChatRequest& request,
                                 const std::string& fingerprint);
  ChatResponse cached_chat(const ChatRequest& request,
                           const std::string& fingerprint, bool* hit);

  ModelEndpoint endpoint_;
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  GatewayOptions options_;
  std::unique_ptr<InflightLimiter> limiter_;
  mutable std::mutex embed_mu_;
  std::map<std::string, std::vector<float>> embed_cache_;
  std::optional<std::size_t> embed_dim_;
};

}  // namespace credence
