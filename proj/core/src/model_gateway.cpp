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

#include "credence/model_gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <thread>

#include "credence/error.hpp"
#include "credence/hash.hpp"
#include "credence/text.hpp"
#include "record_json.hpp"

namespace credence {

class InflightLimiter {
 public:
  explicit InflightLimiter(int slots) : free_(slots) {}
  void acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
  }
  void release() {
    {
      std::lock_guard lock(mu_);
      ++free_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  int free_;
};

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(InflightLimiter& l) : l_(l) { l_.acquire(); }
  ~SlotGuard() { l_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  InflightLimiter& l_;
};

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

}  // namespace

void ModelEndpoint::validate() const {
  if (model_name.empty()) throw ConfigError("endpoint: model_name is empty");
  if (max_inflight < 1) throw ConfigError("endpoint: max_inflight must be >= 1");
  if (!(timeout_s > 0)) throw ConfigError("endpoint: timeout must be > 0");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kTrue: return "true";
    case Verdict::kFake: return "fake";
    case Verdict::kUnparseable: return "unparseable";
  }
  return "?";
}

std::optional<Verdict> parse_verdict_name(std::string_view name) {
  if (name == "true") return Verdict::kTrue;
  if (name == "fake") return Verdict::kFake;
  if (name == "unparseable") return Verdict::kUnparseable;
  return std::nullopt;
}

Verdict parse_verdict(std::string_view reply) {
  const std::string lower = to_lower(reply);
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (i > 0 && is_word_char(lower[i - 1])) continue;
    for (auto [word, verdict] : {std::pair{std::string_view("true"),
                                           Verdict::kTrue},
                                 std::pair{std::string_view("fake"),
                                           Verdict::kFake}}) {
      if (lower.compare(i, word.size(), word) != 0) continue;
      const std::size_t end = i + word.size();
      if (end < lower.size() && is_word_char(lower[end])) continue;
      return verdict;
    }
  }
  return Verdict::kUnparseable;
}

nlohmann::ordered_json record_to_json(const PredictionRecord& r,
                                      bool include_volatile) {
  nlohmann::ordered_json j;
  j["pid"] = r.pid;
  j["claim_id"] = r.claim_id;
  j["condition"] = r.condition_label;
  j["condition_fingerprint"] = r.condition_fingerprint;
  j["model"] = r.model_name;
  j["axis"] = r.axis ? nlohmann::ordered_json(std::string(axis_name(*r.axis)))
                     : nlohmann::ordered_json(nullptr);
  j["group"] = r.group
                   ? nlohmann::ordered_json(std::string(group_name(*r.group)))
                   : nlohmann::ordered_json(nullptr);
  j["run"] = r.run;
  j["seed"] = r.seed;
  j["predicted_label"] = verdict_name(r.predicted_label);
  j["confidence"] = r.confidence ? nlohmann::ordered_json(*r.confidence)
                                 : nlohmann::ordered_json(nullptr);
  j["confidence_method"] = r.confidence_method;
  j["raw_text"] = r.raw_text;
  j["cache_key"] = r.cache_key;
  if (include_volatile) {
    j["latency_ms"] = r.latency_ms;
    j["cached"] = r.cached;
  }
  return j;
}

nlohmann::ordered_json response_to_json(const ChatResponse& response) {
  nlohmann::ordered_json choices = nlohmann::ordered_json::array();
  for (const auto& c : response.choices) {
    nlohmann::ordered_json cj;
    cj["content"] = c.content;
    nlohmann::ordered_json lps = nlohmann::ordered_json::array();
    for (const auto& t : c.first_token_top_logprobs) {
      lps.push_back({{"token", t.token}, {"logprob", t.logprob}});
    }
    cj["top_logprobs"] = lps;
    choices.push_back(cj);
  }
  return choices;
}

ChatResponse response_from_json(const nlohmann::json& j) {
  ChatResponse r;
  for (const auto& cj : j) {
    ChatChoice c;
    c.content = cj.at("content").get<std::string>();
    for (const auto& t : cj.at("top_logprobs")) {
      c.first_token_top_logprobs.push_back(
          {t.at("token").get<std::string>(), t.at("logprob").get<double>()});
    }
    r.choices.push_back(std::move(c));
  }
  return r;
}

bool same_outcome(const PredictionRecord& a, const PredictionRecord& b) {
  return canonical_record(a) == canonical_record(b);
}

std::string canonical_record(const PredictionRecord& r) {
  return record_to_json(r, false).dump();
}

std::string cache_key(const ChatRequest& request) {
  KeyBuilder kb;
  kb.add(std::string_view(request.model))
      .add(std::string_view(request.system_text))
      .add(std::string_view(request.user_text))
      .add(request.temperature)
      .add(static_cast<std::int64_t>(request.seed));
  if (request.n != 1 || request.logprobs) {
    kb.add(std::string_view("variant"))
        .add(static_cast<std::int64_t>(request.n))
        .add(static_cast<std::int64_t>(request.logprobs ? request.top_logprobs
                                                        : -1));
  }
  return kb.hex();
}

ResponseCache::ResponseCache(std::filesystem::path file)
    : file_(std::move(file)) {
  if (file_.empty()) return;
  if (file_.has_parent_path()) {
    std::filesystem::create_directories(file_.parent_path());
  }
  std::ifstream in(file_);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      entries_[j.at("key").get<std::string>()] =
          response_from_json(j.at("choices"));
    } catch (const nlohmann::json::exception&) {
      // A torn final line from an interrupted writer; later lines win.
    }
  }
}

std::optional<ChatResponse> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool ResponseCache::contains(const std::string& key) const {
  std::lock_guard lock(mu_);
  return entries_.count(key) != 0;
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void ResponseCache::put(const std::string& key, const ChatResponse& response) {
  std::lock_guard lock(mu_);
  if (entries_.count(key)) return;
  entries_[key] = response;
  if (file_.empty()) return;
  std::ofstream out(file_, std::ios::app);
  nlohmann::ordered_json j;
  j["key"] = key;
  j["choices"] = response_to_json(response);
  out << j.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot append to response cache " + file_.string());
}

Gateway::Gateway(ModelEndpoint endpoint, std::shared_ptr<Backend> backend,
                 std::shared_ptr<ResponseCache> cache, GatewayOptions options)
    : endpoint_(std::move(endpoint)),
      backend_(std::move(backend)),
      cache_(cache ? std::move(cache) : std::make_shared<ResponseCache>()),
      options_(options) {
  endpoint_.validate();
  if (!backend_) throw ConfigError("gateway: backend is null");
  limiter_ = std::make_unique<InflightLimiter>(endpoint_.max_inflight);
}

Gateway::~Gateway() = default;

ChatRequest Gateway::make_request(const PersonaPrompt& prompt,
                                  const Sampling& sampling) const {
  ChatRequest req;
  req.model = endpoint_.model_name;
  req.system_text = prompt.system_text;
  req.user_text = prompt.user_text;
  req.temperature = sampling.temperature;
  req.seed = sampling.seed;
  req.n = sampling.n;
  return req;
}

bool Gateway::is_cached(const PersonaPrompt& prompt,
                        const Sampling& sampling) const {
  return cache_->contains(cache_key(make_request(prompt, sampling)));
}

ChatResponse Gateway::call_with_retries(const ChatRequest& request,
                                        const std::string& fingerprint) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.backoff_base * (1 << (attempt - 1)));
    }
    try {
      SlotGuard slot(*limiter_);
      return backend_->chat(request);
    } catch (const TransportError& e) {
      last_error = e.what();
    }
  }
  throw TransportError("request " + fingerprint.substr(0, 16) + " failed after " +
                           std::to_string(options_.max_retries) +
                           " retries: " + last_error,
                       fingerprint);
}

ChatResponse Gateway::cached_chat(const ChatRequest& request,
                                  const std::string& fingerprint, bool* hit) {
  const std::string key = cache_key(request);
  if (auto r = cache_->get(key)) {
    if (hit) *hit = true;
    return *r;
  }
  if (hit) *hit = false;
  ChatResponse resp = call_with_retries(request, fingerprint);
  cache_->put(key, resp);
  return resp;
}

PredictionRecord Gateway::complete(const PersonaPrompt& prompt,
                                   const Sampling& sampling) {
  const ChatRequest req = make_request(prompt, sampling);
  PredictionRecord rec;
  rec.pid = prompt.participant_ref;
  rec.claim_id = prompt.claim_ref;
  rec.condition_fingerprint = prompt.condition.fingerprint();
  rec.condition_label = prompt.condition.label();
  rec.model_name = endpoint_.display_name();
  rec.group = prompt.persona_group;
  if (prompt.persona_group) rec.axis = axis_of(*prompt.persona_group);
  rec.seed = sampling.seed;
  rec.cache_key = cache_key(req);

  const auto t0 = std::chrono::steady_clock::now();
  bool hit = false;
  const ChatResponse resp = cached_chat(req, rec.cache_key, &hit);
  rec.latency_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  rec.cached = hit;
  rec.raw_text = resp.choices.empty() ? "" : resp.choices.front().content;
  rec.predicted_label = parse_verdict(rec.raw_text);
  return rec;
}

ConfidenceEstimate Gateway::factual_confidence(const Claim& claim,
                                               std::uint64_t seed) {
  ChatRequest req;
  req.model = endpoint_.model_name;
  req.user_text = verdict_user_text(claim);
  req.seed = seed;
  const std::string fp = sha256_hex("confidence:" + claim.claim_id);

  ConfidenceEstimate est;
  if (endpoint_.supports_logprobs) {
    req.logprobs = true;
    req.top_logprobs = options_.top_logprobs;
    const ChatResponse resp = cached_chat(req, fp, nullptr);
    double p_true = 0.0, p_fake = 0.0;
    if (!resp.choices.empty()) {
      for (const auto& t : resp.choices.front().first_token_top_logprobs) {
        const std::string tok = to_lower(trim(t.token));
        if (tok == "true") p_true += std::exp(t.logprob);
        if (tok == "fake") p_fake += std::exp(t.logprob);
      }
    }
    if (p_true + p_fake > 0.0) {
      est.p_true = p_true;
      est.p_fake = p_fake;
      est.value = std::max(p_true, p_fake) / (p_true + p_fake);
      est.label = p_true > p_fake   ? Verdict::kTrue
                  : p_fake > p_true ? Verdict::kFake
                                    : Verdict::kUnparseable;
      est.method = "logprob";
      return est;
    }
  }
  if (!options_.confidence_fallback) {
    throw CapabilityError("endpoint " + endpoint_.display_name() +
                          " exposes no usable logprobs and the sampling "
                          "fallback is disabled");
  }
  req.logprobs = false;
  req.top_logprobs = 0;
  req.temperature = 1.0;
  req.n = options_.fallback_samples;
  const ChatResponse resp = cached_chat(req, fp, nullptr);
  int n_true = 0, n_fake = 0;
  for (const auto& c : resp.choices) {
    switch (parse_verdict(c.content)) {
      case Verdict::kTrue: ++n_true; break;
      case Verdict::kFake: ++n_fake; break;
      case Verdict::kUnparseable: break;
    }
  }
  est.method = "sampled";
  const int total = n_true + n_fake;
  if (total > 0) {
    est.p_true = static_cast<double>(n_true) / total;
    est.p_fake = static_cast<double>(n_fake) / total;
    est.value = std::clamp(std::max(est.p_true, est.p_fake), 0.5, 1.0);
    est.label = n_true > n_fake   ? Verdict::kTrue
                : n_fake > n_true ? Verdict::kFake
                                  : Verdict::kUnparseable;
  }
  return est;
}

std::optional<std::size_t> Gateway::embedding_dim() const {
  std::lock_guard lock(embed_mu_);
  return embed_dim_;
}

std::vector<std::vector<float>> Gateway::embed(
    const std::vector<std::string>& texts) {
  if (texts.empty()) throw ValidationError("embed: no texts given");
  for (const auto& t : texts) {
    if (t.empty()) throw ValidationError("embed: empty text");
  }
  std::vector<std::string> keys;
  std::vector<std::string> missing;
  {
    std::lock_guard lock(embed_mu_);
    for (const auto& t : texts) {
      keys.push_back(sha256_hex(t));
      if (!embed_cache_.count(keys.back())) missing.push_back(t);
    }
  }
  if (!missing.empty()) {
    std::vector<std::vector<float>> fresh;
    {
      SlotGuard slot(*limiter_);
      fresh = backend_->embed(endpoint_.model_name, missing);
    }
    if (fresh.size() != missing.size()) {
      throw ValidationError("embed: backend returned " +
                            std::to_string(fresh.size()) + " vectors for " +
                            std::to_string(missing.size()) + " texts");
    }
    std::lock_guard lock(embed_mu_);
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      const std::size_t d = fresh[i].size();
      if (d == 0 || (embed_dim_ && *embed_dim_ != d)) {
        throw ValidationError(
            "embed: dimension drift (" + std::to_string(d) + " vs " +
            std::to_string(embed_dim_.value_or(0)) + ")");
      }
      embed_dim_ = d;
      embed_cache_[sha256_hex(missing[i])] = std::move(fresh[i]);
    }
  }
  std::vector<std::vector<float>> out;
  std::lock_guard lock(embed_mu_);
  for (const auto& k : keys) out.push_back(embed_cache_.at(k));
  return out;
}

}  // namespace credence
