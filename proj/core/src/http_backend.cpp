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

#include "credence/http_backend.hpp"

#include <cstdlib>
#include <regex>

#include "credence/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace credence {

HttpBackend::HttpBackend(ModelEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint_.base_url, m, kUrl)) {
    throw ConfigError("endpoint base_url is not an http(s) URL: '" +
                      endpoint_.base_url + "'");
  }
  scheme_host_port_ = m[1];
  path_prefix_ = m[2].matched ? std::string(m[2]) : "";
  while (!path_prefix_.empty() && path_prefix_.back() == '/')
    path_prefix_.pop_back();
}

std::string HttpBackend::chat_body(const ChatRequest& request) {
  nlohmann::ordered_json body;
  body["model"] = request.model;
  nlohmann::ordered_json messages = nlohmann::ordered_json::array();
  if (!request.system_text.empty()) {
    messages.push_back({{"role", "system"}, {"content", request.system_text}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user_text}});
  body["messages"] = messages;
  body["temperature"] = request.temperature;
  body["seed"] = request.seed;
  body["n"] = request.n;
  if (request.logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = request.top_logprobs;
  }
  return body.dump();
}

ChatResponse HttpBackend::parse_chat_response(const std::string& body) {
  ChatResponse out;
  try {
    const auto j = nlohmann::json::parse(body);
    for (const auto& choice : j.at("choices")) {
      ChatChoice c;
      const auto& msg = choice.at("message");
      if (msg.contains("content") && msg["content"].is_string()) {
        c.content = msg["content"].get<std::string>();
      }
      if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
          choice["logprobs"].contains("content") &&
          choice["logprobs"]["content"].is_array() &&
          !choice["logprobs"]["content"].empty()) {
        const auto& first = choice["logprobs"]["content"][0];
        if (first.contains("top_logprobs")) {
          for (const auto& t : first["top_logprobs"]) {
            c.first_token_top_logprobs.push_back(
                {t.at("token").get<std::string>(),
                 t.at("logprob").get<double>()});
          }
        }
      }
      out.choices.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("malformed chat response: ") + e.what(),
                         "");
  }
  return out;
}

std::string HttpBackend::embed_body(const std::string& model,
                                    const std::vector<std::string>& texts) {
  nlohmann::ordered_json body;
  body["model"] = model;
  body["input"] = texts;
  return body.dump();
}

std::vector<std::vector<float>> HttpBackend::parse_embed_response(
    const std::string& body) {
  std::vector<std::vector<float>> out;
  try {
    const auto j = nlohmann::json::parse(body);
    for (const auto& d : j.at("data")) {
      out.push_back(d.at("embedding").get<std::vector<float>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(
        std::string("malformed embedding response: ") + e.what(), "");
  }
  return out;
}

std::string HttpBackend::post(const std::string& route,
                              const std::string& body) {
  httplib::Client client(scheme_host_port_);
  const auto secs = static_cast<time_t>(endpoint_.timeout_s);
  const auto usecs = static_cast<time_t>(
      (endpoint_.timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    if (const char* key = std::getenv(endpoint_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }
  auto res = client.Post(path_prefix_ + route, headers, body,
                         "application/json");
  if (!res) {
    throw TransportError("POST " + route + " to " + scheme_host_port_ +
                             " failed: " + httplib::to_string(res.error()),
                         "");
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("POST " + route + " returned HTTP " +
                             std::to_string(res->status),
                         "");
  }
  return res->body;
}

ChatResponse HttpBackend::chat(const ChatRequest& request) {
  return parse_chat_response(post("/chat/completions", chat_body(request)));
}

std::vector<std::vector<float>> HttpBackend::embed(
    const std::string& model, const std::vector<std::string>& texts) {
  return parse_embed_response(post("/embeddings", embed_body(model, texts)));
}

}  // namespace credence
