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

#include "credence/config.hpp"

#include <fstream>
#include <sstream>

#include "credence/error.hpp"
#include "credence/prompt_forge.hpp"
#include "json.hpp"

namespace credence {
namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

TrainHyper read_hyper(const json& j, TrainHyper h) {
  read_opt(j, "lr", h.lr);
  read_opt(j, "batch", h.batch);
  read_opt(j, "epochs", h.epochs);
  read_opt(j, "seed", h.seed);
  read_opt(j, "weight_decay", h.weight_decay);
  return h;
}

ordered write_hyper(const TrainHyper& h) {
  return ordered{{"lr", h.lr},
                 {"batch", h.batch},
                 {"epochs", h.epochs},
                 {"seed", h.seed},
                 {"weight_decay", h.weight_decay}};
}

bool same_hyper(const TrainHyper& a, const TrainHyper& b) {
  return a.lr == b.lr && a.batch == b.batch && a.epochs == b.epochs &&
         a.seed == b.seed && a.weight_decay == b.weight_decay;
}

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  auto same_endpoints = [&] {
    if (a.endpoints.size() != b.endpoints.size()) return false;
    for (std::size_t i = 0; i < a.endpoints.size(); ++i) {
      const auto& x = a.endpoints[i];
      const auto& y = b.endpoints[i];
      if (x.mock != y.mock || x.endpoint.name != y.endpoint.name ||
          x.endpoint.base_url != y.endpoint.base_url ||
          x.endpoint.model_name != y.endpoint.model_name ||
          x.endpoint.api_key_env != y.endpoint.api_key_env ||
          x.endpoint.max_inflight != y.endpoint.max_inflight ||
          x.endpoint.timeout_s != y.endpoint.timeout_s ||
          x.endpoint.supports_logprobs != y.endpoint.supports_logprobs) {
        return false;
      }
    }
    return true;
  };
  auto same_datasets = [&] {
    if (a.datasets.size() != b.datasets.size()) return false;
    for (std::size_t i = 0; i < a.datasets.size(); ++i) {
      if (a.datasets[i].kind != b.datasets[i].kind ||
          a.datasets[i].path != b.datasets[i].path) {
        return false;
      }
    }
    return true;
  };
  const auto& pa = a.panels;
  const auto& pb = b.panels;
  return a.version == b.version && same_datasets() &&
         a.survey_questions == b.survey_questions &&
         a.survey_distributions == b.survey_distributions && same_endpoints() &&
         a.settings == b.settings && a.axes == b.axes && a.seed == b.seed &&
         a.runs == b.runs && a.temperature == b.temperature &&
         a.held_out_per_participant == b.held_out_per_participant &&
         a.max_retries == b.max_retries && a.backoff_ms == b.backoff_ms &&
         a.output_dir == b.output_dir && a.cache_dir == b.cache_dir &&
         pa.utility == pb.utility && pa.shortcut == pb.shortcut &&
         pa.complementarity == pb.complementarity && pa.epsilon == pb.epsilon &&
         pa.min_n == pb.min_n && pa.dropout == pb.dropout &&
         pa.swap_beliefs == pb.swap_beliefs &&
         same_hyper(a.adapter.phase1, b.adapter.phase1) &&
         same_hyper(a.adapter.phase2, b.adapter.phase2) &&
         a.adapter.embeddings == b.adapter.embeddings &&
         a.adapter.validation_fraction == b.adapter.validation_fraction &&
         a.adapter.mock_embedding_dim == b.adapter.mock_embedding_dim &&
         a.thematic.k == b.thematic.k &&
         a.thematic.iterations == b.thematic.iterations &&
         a.thematic.seed == b.thematic.seed;
}

RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.base_dir = base_dir;
  try {
    require_keys(j,
                 {"version", "datasets", "survey", "endpoints", "settings",
                  "axes", "seed", "runs", "temperature",
                  "held_out_per_participant", "retries", "output_dir",
                  "cache_dir", "panels", "adapter", "thematic"},
                 "config");
    c.version = j.value("version", -1);
    if (c.version != kConfigVersion) {
      throw ConfigError("unsupported config version " + std::to_string(c.version) +
                        " (expected " + std::to_string(kConfigVersion) + ")");
    }
    if (!j.contains("seed")) {
      throw ConfigError("config must set an explicit integer 'seed'");
    }
    c.seed = j.at("seed").get<std::uint64_t>();

    for (const json& d : j.value("datasets", json::array())) {
      require_keys(d, {"kind", "path"}, "datasets[]");
      const auto kind = parse_dataset_kind(d.at("kind").get<std::string>());
      if (!kind) {
        throw ConfigError("unknown dataset kind '" +
                          d.at("kind").get<std::string>() + "'");
      }
      c.datasets.push_back({*kind, d.at("path").get<std::string>()});
    }
    if (j.contains("survey")) {
      const json& s = j.at("survey");
      require_keys(s, {"questions", "distributions"}, "survey");
      read_opt(s, "questions", c.survey_questions);
      read_opt(s, "distributions", c.survey_distributions);
    }
    for (const json& e : j.value("endpoints", json::array())) {
      require_keys(e,
                   {"name", "base_url", "model", "api_key_env", "max_inflight",
                    "timeout_s", "supports_logprobs", "mock"},
                   "endpoints[]");
      EndpointEntry entry;
      ModelEndpoint& ep = entry.endpoint;
      ep.model_name = e.at("model").get<std::string>();
      read_opt(e, "name", ep.name);
      read_opt(e, "base_url", ep.base_url);
      read_opt(e, "api_key_env", ep.api_key_env);
      read_opt(e, "max_inflight", ep.max_inflight);
      read_opt(e, "timeout_s", ep.timeout_s);
      read_opt(e, "supports_logprobs", ep.supports_logprobs);
      read_opt(e, "mock", entry.mock);
      c.endpoints.push_back(std::move(entry));
    }
    read_opt(j, "settings", c.settings);
    for (const json& a : j.value("axes", json::array())) {
      const auto axis = parse_axis(a.get<std::string>());
      if (!axis) throw ConfigError("unknown axis '" + a.get<std::string>() + "'");
      c.axes.push_back(*axis);
    }
    read_opt(j, "runs", c.runs);
    read_opt(j, "temperature", c.temperature);
    read_opt(j, "held_out_per_participant", c.held_out_per_participant);
    if (j.contains("retries")) {
      const json& r = j.at("retries");
      require_keys(r, {"max_retries", "backoff_ms"}, "retries");
      read_opt(r, "max_retries", c.max_retries);
      read_opt(r, "backoff_ms", c.backoff_ms);
    }
    read_opt(j, "output_dir", c.output_dir);
    read_opt(j, "cache_dir", c.cache_dir);
    if (j.contains("panels")) {
      const json& p = j.at("panels");
      require_keys(p,
                   {"utility", "shortcut", "complementarity", "epsilon",
                    "min_n", "dropout", "swap_beliefs"},
                   "panels");
      read_opt(p, "utility", c.panels.utility);
      read_opt(p, "shortcut", c.panels.shortcut);
      read_opt(p, "complementarity", c.panels.complementarity);
      read_opt(p, "epsilon", c.panels.epsilon);
      read_opt(p, "min_n", c.panels.min_n);
      read_opt(p, "dropout", c.panels.dropout);
      read_opt(p, "swap_beliefs", c.panels.swap_beliefs);
    }
    if (j.contains("adapter")) {
      const json& a = j.at("adapter");
      require_keys(a,
                   {"phase1", "phase2", "embeddings", "validation_fraction",
                    "mock_embedding_dim"},
                   "adapter");
      if (a.contains("phase1")) c.adapter.phase1 = read_hyper(a.at("phase1"), c.adapter.phase1);
      if (a.contains("phase2")) c.adapter.phase2 = read_hyper(a.at("phase2"), c.adapter.phase2);
      read_opt(a, "embeddings", c.adapter.embeddings);
      read_opt(a, "validation_fraction", c.adapter.validation_fraction);
      read_opt(a, "mock_embedding_dim", c.adapter.mock_embedding_dim);
    }
    if (j.contains("thematic")) {
      const json& t = j.at("thematic");
      require_keys(t, {"k", "iterations", "seed"}, "thematic");
      read_opt(t, "k", c.thematic.k);
      read_opt(t, "iterations", c.thematic.iterations);
      read_opt(t, "seed", c.thematic.seed);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config has a field of the wrong type: ") +
                      e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.parent_path());
}

std::string serialize_config(const RunConfig& c) {
  ordered j;
  j["version"] = c.version;
  j["seed"] = c.seed;
  j["datasets"] = ordered::array();
  for (const auto& d : c.datasets) {
    j["datasets"].push_back({{"kind", dataset_name(d.kind)}, {"path", d.path}});
  }
  j["survey"] = {{"questions", c.survey_questions},
                 {"distributions", c.survey_distributions}};
  j["endpoints"] = ordered::array();
  for (const auto& e : c.endpoints) {
    ordered o;
    o["name"] = e.endpoint.name;
    o["base_url"] = e.endpoint.base_url;
    o["model"] = e.endpoint.model_name;
    o["api_key_env"] = e.endpoint.api_key_env;
    o["max_inflight"] = e.endpoint.max_inflight;
    o["timeout_s"] = e.endpoint.timeout_s;
    o["supports_logprobs"] = e.endpoint.supports_logprobs;
    o["mock"] = e.mock;
    j["endpoints"].push_back(std::move(o));
  }
  j["settings"] = c.settings;
  j["axes"] = ordered::array();
  for (Axis a : c.axes) j["axes"].push_back(axis_name(a));
  j["runs"] = c.runs;
  j["temperature"] = c.temperature;
  j["held_out_per_participant"] = c.held_out_per_participant;
  j["retries"] = {{"max_retries", c.max_retries}, {"backoff_ms", c.backoff_ms}};
  j["output_dir"] = c.output_dir;
  j["cache_dir"] = c.cache_dir;
  j["panels"] = {{"utility", c.panels.utility},
                 {"shortcut", c.panels.shortcut},
                 {"complementarity", c.panels.complementarity},
                 {"epsilon", c.panels.epsilon},
                 {"min_n", c.panels.min_n},
                 {"dropout", c.panels.dropout},
                 {"swap_beliefs", c.panels.swap_beliefs}};
  j["adapter"] = {{"phase1", write_hyper(c.adapter.phase1)},
                  {"phase2", write_hyper(c.adapter.phase2)},
                  {"embeddings", c.adapter.embeddings},
                  {"validation_fraction", c.adapter.validation_fraction},
                  {"mock_embedding_dim", c.adapter.mock_embedding_dim}};
  j["thematic"] = {{"k", c.thematic.k},
                   {"iterations", c.thematic.iterations},
                   {"seed", c.thematic.seed}};
  return j.dump(2) + "\n";
}

void RunConfig::validate() const {
  auto must_exist = [&](const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path is empty");
    if (!std::filesystem::exists(resolve(path))) {
      throw ConfigError(std::string(what) + " not found: " + resolve(path).string());
    }
  };
  for (const auto& d : datasets) must_exist(d.path, "dataset");
  if (!survey_questions.empty()) must_exist(survey_questions, "survey questions");
  for (const auto& s : survey_distributions) must_exist(s, "survey distributions");
  if (!adapter.embeddings.empty()) must_exist(adapter.embeddings, "embeddings file");
  for (const auto& e : endpoints) {
    if (!e.mock.empty()) {
      if (e.mock != "demographics_blind" && e.mock.rfind("keyed:", 0) != 0 &&
          e.mock.rfind("constant:", 0) != 0) {
        throw ConfigError("unknown mock responder '" + e.mock + "'");
      }
      if (e.endpoint.model_name.empty()) throw ConfigError("endpoint model is empty");
      continue;
    }
    try {
      e.endpoint.validate();
    } catch (const ValidationError& err) {
      throw ConfigError(std::string("endpoint: ") + err.what());
    }
    const std::string& url = e.endpoint.base_url;
    if (url.rfind("http://", 0) != 0 && url.rfind("https://", 0) != 0) {
      throw ConfigError("endpoint '" + e.endpoint.display_name() +
                        "' needs an http(s) base_url or a mock responder");
    }
  }
  for (const auto& s : settings) {
    if (!find_setting(s, seed)) throw ConfigError("unknown setting '" + s + "'");
  }
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (held_out_per_participant < 0) {
    throw ConfigError("held_out_per_participant must be >= 0");
  }
  if (max_retries < 0 || backoff_ms < 0) throw ConfigError("invalid retry policy");
  if (!(panels.epsilon >= 0.0)) throw ConfigError("panels.epsilon must be >= 0");
  if (!(panels.dropout >= 0.0 && panels.dropout <= 1.0)) {
    throw ConfigError("panels.dropout must be in [0, 1]");
  }
  for (const TrainHyper* h : {&adapter.phase1, &adapter.phase2}) {
    if (!(h->lr > 0.0) || h->batch < 1 || h->epochs < 1 || h->weight_decay < 0.0) {
      throw ConfigError("invalid adapter hyperparameters");
    }
  }
  if (!(adapter.validation_fraction > 0.0 && adapter.validation_fraction < 1.0)) {
    throw ConfigError("adapter.validation_fraction must be in (0, 1)");
  }
  if (thematic.k < 1 || thematic.iterations < 1) {
    throw ConfigError("invalid thematic settings");
  }
  if (output_dir.empty() || cache_dir.empty()) {
    throw ConfigError("output_dir and cache_dir must be set");
  }
}

}  // namespace credence
