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

#include "credence/mock_backend.hpp"

#include <cmath>
#include <cstring>
#include <thread>

#include "credence/error.hpp"
#include "credence/hash.hpp"
#include "credence/rng.hpp"

namespace credence {
namespace {

std::uint64_t hash64(std::string_view s) {
  const Digest d = sha256(s);
  std::uint64_t v = 0;
  std::memcpy(&v, d.data(), sizeof(v));
  return v;
}

}  // namespace

MockBackend::MockBackend(MockOptions options) : options_(std::move(options)) {
  if (!options_.responder) options_.responder = demographics_blind();
}

ChatResponse MockBackend::chat(const ChatRequest& request) {
  ++calls_;
  const int now = ++inflight_;
  int prev = max_inflight_.load();
  while (now > prev && !max_inflight_.compare_exchange_weak(prev, now)) {
  }
  if (options_.delay.count() > 0) std::this_thread::sleep_for(options_.delay);

  ChatResponse resp;
  for (int i = 0; i < std::max(1, request.n); ++i) {
    ChatChoice c;
    c.content = options_.responder(request, i);
    if (request.logprobs && options_.emit_logprobs) {
      // First-token mass split between the two verdict tokens, with the
      // remainder on a filler token.
      Rng rng(hash64("logprob:" + request.user_text));
      const double mass = 0.5 + 0.45 * rng.uniform();
      const double share = rng.uniform();
      c.first_token_top_logprobs = {
          {"true", std::log(mass * share)},
          {"fake", std::log(mass * (1.0 - share))},
          {"The", std::log(1.0 - mass)},
      };
    }
    resp.choices.push_back(std::move(c));
  }
  --inflight_;
  return resp;
}

std::vector<std::vector<float>> MockBackend::embed(
    const std::string& /*model*/, const std::vector<std::string>& texts) {
  ++calls_;
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(mock_embedding(t, options_.embedding_dim));
  return out;
}

MockResponder MockBackend::demographics_blind() {
  return [](const ChatRequest& req, int choice) -> std::string {
    const std::uint64_t h =
        hash64(req.user_text + "#" + std::to_string(req.seed) + "#" +
               std::to_string(choice));
    return (h & 1u) ? "True." : "Fake.";
  };
}

MockResponder MockBackend::keyed_on_token(std::string token) {
  return [token = std::move(token)](const ChatRequest& req, int) {
    return req.system_text.find(token) != std::string::npos
               ? std::string("fake")
               : std::string("true");
  };
}

MockResponder MockBackend::constant(std::string reply) {
  return [reply = std::move(reply)](const ChatRequest&, int) { return reply; };
}

std::vector<float> mock_embedding(const std::string& text, std::size_t dim) {
  if (dim == 0) throw ValidationError("mock embedding dimension must be > 0");
  Rng rng(hash64("embed:" + text));
  std::vector<float> v(dim);
  double norm = 0.0;
  for (auto& x : v) {
    const double g = rng.normal();
    x = static_cast<float>(g);
    norm += g * g;
  }
  norm = std::sqrt(norm);
  for (auto& x : v) x = static_cast<float>(x / norm);
  return v;
}

}  // namespace credence
