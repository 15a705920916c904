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

#include <atomic>
#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "credence/model_gateway.hpp"

namespace credence {

// Reply for one sampled choice.
using MockResponder =
    std::function<std::string(const ChatRequest& request, int choice_index)>;

struct MockOptions {
  MockResponder responder;  // defaults to demographics_blind()
  std::size_t embedding_dim = 64;
  bool emit_logprobs = true;
  // Artificial service time; lets tests observe overlapping requests.
  std::chrono::microseconds delay{0};
};

// Deterministic in-process backend. Replies are pure functions of the
// request text and sampling seed.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockOptions options = {});

  ChatResponse chat(const ChatRequest& request) override;
  std::vector<std::vector<float>> embed(
      const std::string& model, const std::vector<std::string>& texts) override;

  std::size_t calls() const { return calls_.load(); }
  int max_observed_inflight() const { return max_inflight_.load(); }

  // Verdict from a hash of (user text, seed, choice); ignores the system
  // prompt entirely.
  static MockResponder demographics_blind();
  // "fake" iff the system prompt contains `token`, else "true".
  static MockResponder keyed_on_token(std::string token);
  // Always the same reply.
  static MockResponder constant(std::string reply);

 private:
  MockOptions options_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<int> inflight_{0};
  std::atomic<int> max_inflight_{0};
};

// Deterministic unit-norm vector for a text.
std::vector<float> mock_embedding(const std::string& text, std::size_t dim);

}  // namespace credence
