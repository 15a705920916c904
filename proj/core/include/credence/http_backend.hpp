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

#include <string>
#include <vector>

#include "credence/model_gateway.hpp"

namespace credence {

// OpenAI-compatible chat-completions and embeddings client.
//   POST {base_url}/chat/completions
//   POST {base_url}/embeddings
// Non-2xx responses and connection failures raise TransportError; the
// gateway owns retries.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(ModelEndpoint endpoint);

  ChatResponse chat(const ChatRequest& request) override;
  std::vector<std::vector<float>> embed(
      const std::string& model, const std::vector<std::string>& texts) override;

  // Wire bodies, exposed for tests.
  static std::string chat_body(const ChatRequest& request);
  static ChatResponse parse_chat_response(const std::string& body);
  static std::string embed_body(const std::string& model,
                                const std::vector<std::string>& texts);
  static std::vector<std::vector<float>> parse_embed_response(
      const std::string& body);

 private:
  std::string post(const std::string& route, const std::string& body);

  ModelEndpoint endpoint_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace credence
