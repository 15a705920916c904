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
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "credence/adapter.hpp"
#include "credence/belief_store.hpp"
#include "credence/cohort.hpp"
#include "credence/config.hpp"
#include "credence/embeddings_file.hpp"
#include "credence/model_gateway.hpp"
#include "credence/prompt_forge.hpp"
#include "credence/report.hpp"

namespace credence {

struct PipelineOptions {
  bool force_mock = false;  // replace every endpoint with the blind mock
  // Reuse a non-empty cache directory. Without it a populated cache is a
  // configuration error, so stale responses are never picked up silently.
  bool resume = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::size_t> max_new_requests;
  int workers = 0;
};

struct DatasetHandle {
  std::string name;
  DatasetEntry entry;
  Cohort cohort;
};

// Input text for the susceptibility head: the claim plus up to two of the
// participant's observed beliefs.
std::string head_input_text(const Participant& participant, const Claim& claim,
                            const Cohort& cohort);

// Builds the backend for an endpoint entry: a MockBackend for mock entries,
// otherwise an HttpBackend.
std::shared_ptr<Backend> make_backend(const EndpointEntry& entry,
                                      std::size_t mock_embedding_dim);

class Pipeline {
 public:
  // Loads survey data, datasets and endpoints. Throws ConfigError,
  // ParseError or ValidationError.
  Pipeline(RunConfig config, PipelineOptions options = {});
  ~Pipeline();

  const RunConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }
  const BeliefStore& beliefs() const { return beliefs_; }
  const std::vector<DatasetHandle>& datasets() const { return datasets_; }
  std::filesystem::path output_dir() const;
  std::vector<Gateway*> gateways() const;
  const std::vector<Setting>& settings() const { return settings_; }

  // Each stage appends to the bundle. thematic needs run_sweeps first.
  void run_sweeps(ReportBundle& bundle);
  void run_panels(ReportBundle& bundle);
  void run_thematic(ReportBundle& bundle);
  Phase1Result train_adapter(ReportBundle& bundle);
  void train_heads(ReportBundle& bundle, const BeliefAdapter& adapter);
  void fill_manifest(ReportBundle& bundle) const;

  // Every stage enabled by the config, in order.
  ReportBundle run_all();

  // True when any stage recorded a transport failure.
  bool transport_failed(const ReportBundle& bundle) const {
    return !bundle.failures.empty();
  }

 private:
  std::vector<std::vector<float>> embed(const std::vector<std::string>& texts);
  std::vector<Axis> axes_for(const Cohort& cohort) const;

  RunConfig config_;
  PipelineOptions options_;
  std::uint64_t seed_ = 0;
  BeliefStore beliefs_;
  std::vector<DatasetHandle> datasets_;
  std::vector<Setting> settings_;
  std::vector<std::unique_ptr<Gateway>> gateways_;
  std::optional<EmbeddingTable> embeddings_;
  // (dataset, setting, model) -> records of the chosen condition, all axes.
  std::map<std::tuple<std::string, std::string, std::string>,
           std::vector<PredictionRecord>>
      chosen_records_;
  std::optional<double> phase1_kl_;
  long phase1_steps_ = 0;
  std::size_t records_total_ = 0;
  std::size_t cache_hits_ = 0;
};

}  // namespace credence
