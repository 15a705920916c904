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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "credence/cohort.hpp"
#include "credence/model_gateway.hpp"
#include "credence/prompt_forge.hpp"

namespace credence {

struct SweepOptions {
  int runs = 3;
  std::uint64_t base_seed = 0;  // run r samples with seed base_seed + r
  double temperature = 0.0;
  // Persona axis. Participants without a group on it are skipped.
  std::optional<Axis> axis;
  // Stop issuing uncached requests after this many; simulates an
  // interrupted sweep.
  std::optional<std::size_t> max_new_requests;
  // Worker threads; 0 uses the endpoint's max_inflight.
  int workers = 0;
};

struct SweepFailure {
  std::string pid;
  std::string claim_id;
  std::string condition_label;
  std::string model_name;
  int run = 0;
  std::string fingerprint;
  std::string error;
};

struct SweepResult {
  std::vector<PredictionRecord> records;
  std::vector<SweepFailure> failures;
  std::size_t planned = 0;
  std::size_t cache_hits = 0;
  bool interrupted = false;

  double cache_hit_rate() const {
    return records.empty() ? 0.0
                           : static_cast<double>(cache_hits) /
                                 static_cast<double>(records.size());
  }
};

// One record per (participant, evaluation claim, condition, model, run).
// Cached items are not re-requested. Transport errors are collected into
// the failure manifest instead of aborting.
SweepResult run_sweep(const Cohort& cohort, const PromptForge& forge,
                      std::span<const ConditionSpec> conditions,
                      std::span<Gateway* const> gateways,
                      const SweepOptions& options);

enum class ScoreTarget { kParticipantChoice, kGoldLabel };

struct AlignmentResult {
  std::string condition_fingerprint;
  std::string condition_label;
  std::string model_name;
  std::optional<Axis> axis;
  std::optional<Group> group;
  std::size_t n_requested = 0;
  std::size_t n_evaluated = 0;  // parseable
  std::size_t n_unparseable = 0;
  std::size_t n_correct = 0;
  bool empty = true;  // no parseable records
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double unparseable_rate = 0.0;
  std::vector<double> run_accuracies;  // indexed by run, parseable only
  double run_mean = 0.0;
  double run_std = 0.0;  // sample standard deviation over runs
  std::vector<std::string> warnings;
};

// Scores records against the cohort's labels. Throws ValidationError when
// a record references a judgment the cohort does not hold.
AlignmentResult score_records(std::span<const PredictionRecord> records,
                              const Cohort& cohort, ScoreTarget target);

inline AlignmentResult susceptibility_alignment(
    std::span<const PredictionRecord> records, const Cohort& cohort) {
  return score_records(records, cohort, ScoreTarget::kParticipantChoice);
}

// Accuracy against gold veracity labels; nullopt when nothing parseable.
std::optional<double> veracity_accuracy(
    std::span<const PredictionRecord> records, const Cohort& cohort);

struct BinAccuracy {
  std::size_t n = 0;
  std::size_t correct = 0;
  double accuracy = 0.0;
};

// Alignment accuracy per claim-entropy bin; empty bins are absent.
std::map<int, BinAccuracy> accuracy_by_entropy_bin(
    std::span<const PredictionRecord> records, const Cohort& cohort,
    int n_bins = 3);

// Spearman rank correlation with average ranks for ties. nullopt when
// either input is constant. Throws ValidationError on length mismatch or
// fewer than 3 points.
std::optional<double> spearman_rho(std::span<const double> x,
                                   std::span<const double> y);

// Correlation between a claim's factual confidence and whether the
// prediction matched the participant, restricted to gold-fake claims.
std::optional<double> confidence_alignment_rho(
    std::span<const PredictionRecord> records, const Cohort& cohort,
    const std::map<std::string, double, std::less<>>& confidence_by_claim);

// Results per (condition, model, axis, group), sorted by those keys.
std::vector<AlignmentResult> group_results(
    std::span<const PredictionRecord> records, const Cohort& cohort);

struct AxisAggregate {
  std::string condition_label;
  std::string condition_fingerprint;
  std::string model_name;
  Axis axis = Axis::kGender;
  double weighted_accuracy = 0.0;    // by parseable count
  double unweighted_accuracy = 0.0;  // mean over groups
  std::size_t n_evaluated = 0;
};

std::vector<AxisAggregate> aggregate_axes(
    std::span<const AlignmentResult> group_level);

}  // namespace credence
