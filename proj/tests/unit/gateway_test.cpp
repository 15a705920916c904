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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>
#include <vector>

#include "credence/error.hpp"
#include "credence/mock_backend.hpp"
#include "credence/prompt_forge.hpp"

namespace credence {
namespace {

namespace fs = std::filesystem;

ModelEndpoint endpoint(int inflight = 4, bool logprobs = false) {
  ModelEndpoint e;
  e.name = "mock";
  e.model_name = "mock-model";
  e.max_inflight = inflight;
  e.supports_logprobs = logprobs;
  return e;
}

PersonaPrompt prompt(const std::string& sys, const std::string& user) {
  PersonaPrompt p;
  p.system_text = sys;
  p.user_text = user;
  p.participant_ref = "p1";
  p.claim_ref = "c1";
  return p;
}

GatewayOptions fast_options(int retries = 3) {
  GatewayOptions o;
  o.max_retries = retries;
  o.backoff_base = std::chrono::milliseconds(0);
  return o;
}

class FlakyBackend : public Backend {
 public:
  explicit FlakyBackend(int failures) : failures_(failures) {}
  ChatResponse chat(const ChatRequest&) override {
    if (calls_++ < failures_) throw TransportError("connection reset", "");
    return ChatResponse{{ChatChoice{"true", {}}}};
  }
  std::vector<std::vector<float>> embed(const std::string&,
                                        const std::vector<std::string>&) override {
    return {};
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  std::atomic<int> calls_{0};
};

fs::path temp_path(const std::string& name) {
  auto p = fs::temp_directory_path() / ("credence_gateway_" + name);
  fs::remove_all(p);
  return p;
}

TEST(CacheKey, CoversEveryRequestField) {
  ChatRequest base;
  base.model = "m";
  base.system_text = "s";
  base.user_text = "u";
  const auto k = cache_key(base);
  EXPECT_EQ(k, cache_key(base));
  auto v = base;
  v.model = "m2";
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.system_text = "";
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.user_text = "u2";
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.temperature = 0.5;
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.seed = 1;
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.n = 10;
  EXPECT_NE(cache_key(v), k);
  v = base;
  v.logprobs = true;
  EXPECT_NE(cache_key(v), k);
}

TEST(Gateway, SecondCallIsServedFromCache) {
  auto backend = std::make_shared<MockBackend>();
  Gateway gw(endpoint(), backend);
  const auto p = prompt("sys", "Is it true?");
  const auto a = gw.complete(p, {0.0, 1, 1});
  EXPECT_FALSE(a.cached);
  EXPECT_TRUE(gw.is_cached(p, {0.0, 1, 1}));
  const auto b = gw.complete(p, {0.0, 1, 1});
  EXPECT_TRUE(b.cached);
  EXPECT_EQ(backend->calls(), 1u);
  EXPECT_TRUE(same_outcome(a, b));
  EXPECT_EQ(canonical_record(a), canonical_record(b));
  gw.complete(p, {0.0, 2, 1});
  EXPECT_EQ(backend->calls(), 2u);
}

TEST(Gateway, CachePersistsAcrossInstances) {
  const auto file = temp_path("persist") / "cache.ndjson";
  const auto p = prompt("", "Claim: x");
  PredictionRecord first;
  {
    auto backend = std::make_shared<MockBackend>();
    Gateway gw(endpoint(), backend, std::make_shared<ResponseCache>(file));
    first = gw.complete(p, {0.0, 3, 1});
  }
  {
    std::ofstream torn(file, std::ios::app);
    torn << "{\"key\":\"abc\",\"choi";  // interrupted writer
  }
  auto backend = std::make_shared<MockBackend>();
  auto cache = std::make_shared<ResponseCache>(file);
  EXPECT_EQ(cache->size(), 1u);
  Gateway gw(endpoint(), backend, cache);
  const auto again = gw.complete(p, {0.0, 3, 1});
  EXPECT_TRUE(again.cached);
  EXPECT_EQ(backend->calls(), 0u);
  EXPECT_TRUE(same_outcome(first, again));
}

TEST(Gateway, RetriesTransientFailures) {
  auto flaky = std::make_shared<FlakyBackend>(2);
  Gateway gw(endpoint(), flaky, nullptr, fast_options(3));
  const auto r = gw.complete(prompt("", "u"), {});
  EXPECT_EQ(r.predicted_label, Verdict::kTrue);
  EXPECT_EQ(flaky->calls(), 3);
}

TEST(Gateway, ExhaustedRetriesCarryTheFingerprint) {
  auto dead = std::make_shared<FlakyBackend>(1000);
  Gateway gw(endpoint(), dead, nullptr, fast_options(2));
  const auto p = prompt("", "u");
  try {
    gw.complete(p, {});
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_EQ(e.fingerprint(), cache_key(gw.make_request(p, {})));
  }
  EXPECT_EQ(dead->calls(), 3);
  EXPECT_FALSE(gw.is_cached(p, {}));
}

TEST(Gateway, InflightBoundIsRespected) {
  MockOptions opts;
  opts.delay = std::chrono::microseconds(2000);
  auto backend = std::make_shared<MockBackend>(opts);
  Gateway gw(endpoint(2), backend);
  std::vector<std::jthread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&gw, t] {
      for (int i = 0; i < 5; ++i)
        gw.complete(prompt("", "u" + std::to_string(t * 10 + i)), {});
    });
  }
  threads.clear();
  EXPECT_EQ(backend->calls(), 40u);
  EXPECT_LE(backend->max_observed_inflight(), 2);
  EXPECT_GE(backend->max_observed_inflight(), 1);
}

TEST(Gateway, LogprobConfidenceRenormalizesVerdictMass) {
  auto backend = std::make_shared<MockBackend>();
  Gateway gw(endpoint(4, true), backend);
  Claim c{"c1", "The moon is made of cheese.", Label::kFake,
          DatasetKind::kPandora};
  ChatRequest req;
  req.model = "mock-model";
  req.user_text = verdict_user_text(c);
  req.logprobs = true;
  req.top_logprobs = 20;
  const auto resp = backend->chat(req);
  double pt = 0, pf = 0;
  for (const auto& t : resp.choices[0].first_token_top_logprobs) {
    if (t.token == "true") pt = std::exp(t.logprob);
    if (t.token == "fake") pf = std::exp(t.logprob);
  }
  const auto est = gw.factual_confidence(c);
  EXPECT_EQ(est.method, "logprob");
  EXPECT_NEAR(est.value, std::max(pt, pf) / (pt + pf), 1e-12);
  EXPECT_GE(est.value, 0.5);
  EXPECT_LE(est.value, 1.0);
}

TEST(Gateway, SamplingFallbackWithoutLogprobs) {
  MockOptions opts;
  int counter = 0;
  opts.responder = [&counter](const ChatRequest&, int choice) {
    ++counter;
    return choice < 7 ? std::string("True") : std::string("Fake");
  };
  auto backend = std::make_shared<MockBackend>(opts);
  Gateway gw(endpoint(4, false), backend);
  Claim c{"c1", "x", Label::kTrue, DatasetKind::kPandora};
  const auto est = gw.factual_confidence(c);
  EXPECT_EQ(est.method, "sampled");
  EXPECT_NEAR(est.value, 0.7, 1e-12);
  EXPECT_EQ(est.label, Verdict::kTrue);
  EXPECT_EQ(counter, 10);

  auto strict_opts = fast_options();
  strict_opts.confidence_fallback = false;
  Gateway strict(endpoint(4, false), std::make_shared<MockBackend>(), nullptr,
                 strict_opts);
  EXPECT_THROW(strict.factual_confidence(c), CapabilityError);
}

TEST(Gateway, EmbeddingsAreCachedAndChecked) {
  MockOptions opts;
  opts.embedding_dim = 16;
  auto backend = std::make_shared<MockBackend>(opts);
  Gateway gw(endpoint(), backend);
  const auto a = gw.embed({"alpha", "beta"});
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0].size(), 16u);
  EXPECT_EQ(a[0], mock_embedding("alpha", 16));
  double norm = 0;
  for (float v : a[0]) norm += double(v) * v;
  EXPECT_NEAR(norm, 1.0, 1e-5);
  const auto calls = backend->calls();
  gw.embed({"beta", "alpha"});
  EXPECT_EQ(backend->calls(), calls);
  EXPECT_EQ(gw.embedding_dim(), 16u);
  EXPECT_THROW(gw.embed({}), ValidationError);
  EXPECT_THROW(gw.embed({""}), ValidationError);
}

TEST(MockBackend, BlindResponderIgnoresSystemPrompt) {
  auto blind = MockBackend::demographics_blind();
  ChatRequest a, b;
  a.user_text = b.user_text = "Claim: x";
  a.system_text = "You are female";
  b.system_text = "You are male";
  EXPECT_EQ(blind(a, 0), blind(b, 0));
  auto keyed = MockBackend::keyed_on_token("female");
  EXPECT_EQ(parse_verdict(keyed(a, 0)), Verdict::kFake);
  EXPECT_EQ(parse_verdict(keyed(b, 0)), Verdict::kTrue);
}

TEST(Endpoint, ValidationRejectsBadSettings) {
  auto e = endpoint();
  e.max_inflight = 0;
  EXPECT_THROW(e.validate(), ConfigError);
  e = endpoint();
  e.model_name.clear();
  EXPECT_THROW(e.validate(), ConfigError);
  EXPECT_THROW(Gateway(endpoint(), nullptr), ConfigError);
}

}  // namespace
}  // namespace credence
