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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "credence/adapter.hpp"
#include "credence/counterfactual.hpp"
#include "credence/sim_runner.hpp"
#include "credence/stats.hpp"
#include "credence/topics.hpp"

namespace credence {

// Index of the candidate with the highest weighted accuracy; ties go to the
// earlier candidate. nullopt when the span is empty.
std::optional<std::size_t> pick_best(std::span<const AxisAggregate> candidates);

struct AccuracyCell {
  std::string dataset;
  std::string setting;
  std::string model;
  Axis axis = Axis::kGender;
  std::optional<AxisAggregate> aggregate;
  std::string condition_label;  // chosen condition for best-dimension rows
  std::optional<double> veracity;
};

struct GroupRow {
  std::string dataset;
  std::string setting;
  AlignmentResult result;
  std::optional<double> veracity;
};

struct PanelRow {
  std::string dataset;
  PanelResult result;
};

struct BinRow {
  std::string dataset;
  std::string setting;
  std::string model;
  int bin = 0;
  BinAccuracy accuracy;
};

struct ConfidenceRow {
  std::string dataset;
  std::string setting;
  std::string model;
  std::optional<double> rho;  // nullopt: undefined (constant input or < 3)
  std::size_t n_records = 0;
};

struct TopicRow {
  std::string dataset;
  std::string setting;
  std::string model;
  TopicGap gap;
  std::vector<std::string> top_terms;
};

struct StatRow {
  std::string dataset;
  std::string model;
  std::string setting_a;
  std::string setting_b;
  std::size_t n_pairs = 0;
  std::optional<TestResult> t_test;  // over matched group accuracies
  std::optional<TestResult> z_test;  // over pooled counts on one axis
  std::string z_axis;
};

struct FtRow {
  std::string dataset;
  std::string embedding_model;
  Axis axis = Axis::kGender;
  std::optional<double> phase1_kl;  // absent for a loaded adapter
  long phase1_steps = 0;
  std::size_t n_train = 0;
  ClassificationMetrics validation;
  std::optional<ShortcutMetrics> zero;
  std::optional<ShortcutMetrics> swap;
};

struct SurveyRow {
  Axis axis = Axis::kGender;
  std::optional<double> modal_disagreement_pct;
  std::optional<double> mean_js_bits;
};

struct Manifest {
  std::uint64_t seed = 0;
  int runs = 0;
  double temperature = 0.0;
  std::vector<std::string> endpoints;
  std::vector<std::string> datasets;
  std::vector<std::pair<std::string, std::string>> conditions;  // label, fp
  std::size_t records = 0;
  std::size_t cache_hits = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;
};

struct ReportBundle {
  Manifest manifest;
  std::vector<std::string> datasets;
  std::vector<std::string> settings;
  std::vector<std::string> models;
  std::vector<Axis> axes;
  std::vector<AccuracyCell> cells;
  std::vector<GroupRow> groups;
  std::vector<PanelRow> panels;
  std::vector<BinRow> bins;
  std::vector<ConfidenceRow> confidence;
  std::vector<TopicRow> topics;
  std::vector<StatRow> stats;
  std::vector<FtRow> ft;
  std::vector<SurveyRow> survey;
  std::vector<SweepFailure> failures;
  std::vector<PredictionRecord> records;
};

// File name -> content. Deterministic: no timestamps, latencies or cache
// flags, and every row in a fixed order.
std::map<std::string, std::string> render_report(const ReportBundle& bundle);

// Writes render_report() into out_dir and returns the paths written.
// Throws Error naming the path on a write failure.
std::vector<std::filesystem::path> emit_report(
    const ReportBundle& bundle, const std::filesystem::path& out_dir);

}  // namespace credence
