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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "credence/adapter.hpp"
#include "credence/cohort.hpp"
#include "credence/model_gateway.hpp"

namespace credence {

inline constexpr int kConfigVersion = 1;

struct DatasetEntry {
  DatasetKind kind = DatasetKind::kPandora;
  std::string path;
};

struct EndpointEntry {
  ModelEndpoint endpoint;
  // Mock responder spec: "demographics_blind", "keyed:<token>" or
  // "constant:<reply>". Empty means a live HTTP endpoint.
  std::string mock;
};

struct PanelConfig {
  bool utility = true;
  bool shortcut = true;
  bool complementarity = true;
  double epsilon = 0.05;
  std::size_t min_n = 3;
  double dropout = 0.7;
  bool swap_beliefs = false;
};

struct AdapterConfig {
  TrainHyper phase1 = phase1_defaults();
  TrainHyper phase2 = phase2_defaults();
  std::string embeddings;  // optional precomputed embeddings file
  double validation_fraction = 0.2;  // held out by participant
  // Dimension of mock embeddings when no file or live endpoint is used.
  std::size_t mock_embedding_dim = 64;
};

struct ThematicConfig {
  int k = 5;
  int iterations = 200;
  std::uint64_t seed = 0;
};

struct RunConfig {
  int version = kConfigVersion;
  std::vector<DatasetEntry> datasets;
  std::string survey_questions;
  std::vector<std::string> survey_distributions;
  std::vector<EndpointEntry> endpoints;
  std::vector<std::string> settings;  // names; empty means the 12 primary
  std::vector<Axis> axes;
  std::uint64_t seed = 0;
  int runs = 3;
  double temperature = 0.0;
  int held_out_per_participant = 2;
  int max_retries = 3;
  int backoff_ms = 1000;
  std::string output_dir = "out";
  std::string cache_dir = "cache";
  PanelConfig panels;
  AdapterConfig adapter;
  ThematicConfig thematic;

  // Directory relative paths are resolved against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& path) const;

  // Throws ConfigError naming the first problem: missing paths, unknown
  // settings, invalid endpoints or ranges.
  void validate() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

// Throws ConfigError on malformed input or a missing seed.
RunConfig parse_config(const std::string& text,
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& file);
std::string serialize_config(const RunConfig& config);

}  // namespace credence
