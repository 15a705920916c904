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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "credence/cohort.hpp"
#include "credence/model_gateway.hpp"

namespace credence {

// Lowercased, ASCII-folded alphanumeric runs of length >= 2.
std::vector<std::string> tokenize(std::string_view text);

struct TfidfMatrix {
  std::vector<std::string> vocabulary;  // sorted
  Eigen::MatrixXd X;                    // documents x vocabulary
};

// Sublinear TF (1 + ln tf), smoothed IDF (ln((1+n)/(1+df)) + 1), rows
// L2-normalized.
TfidfMatrix tfidf(std::span<const std::string> documents);

struct NmfResult {
  Eigen::MatrixXd W;  // rows x k
  Eigen::MatrixXd H;  // k x cols
  // Frobenius error ||X - WH|| after initialization, then after each
  // iteration.
  std::vector<double> errors;
};

// Lee-Seung multiplicative updates. Throws TrainingError if the error
// increases by more than tolerance in any iteration.
NmfResult nmf(const Eigen::MatrixXd& X, int k, int iterations,
              std::uint64_t seed, double tolerance = 1e-8);

struct TopicModel {
  int k = 5;
  std::vector<std::string> claim_ids;
  std::vector<std::string> vocabulary;
  Eigen::MatrixXd W;  // claims x k
  Eigen::MatrixXd H;  // k x vocabulary
  std::vector<int> assignment;  // argmax topic per claim
  std::vector<double> errors;

  std::optional<int> topic_of(std::string_view claim_id) const;
  std::vector<std::string> top_terms(int topic, std::size_t n) const;
};

struct NmfOptions {
  int k = 5;
  int iterations = 200;
  std::uint64_t seed = 0;
};

// Throws ValidationError when k exceeds the number of claims or the
// vocabulary is empty.
TopicModel nmf_topics(std::span<const Claim> claims, const NmfOptions& options);

struct TopicGap {
  int topic = 0;
  Axis axis = Axis::kGender;
  std::optional<double> accuracy_first;   // first group of the axis
  std::optional<double> accuracy_second;  // second group
  std::size_t n_first = 0;
  std::size_t n_second = 0;
  double gap_ppts = 0.0;  // 100 * (first - second); 0 when a side is empty
  bool low_support = false;
};

inline constexpr std::size_t kTopicMinSupport = 5;

// Alignment accuracy gap per (topic, axis) over parseable records. A record
// counts for the axis it was run on, or for every axis the participant is
// annotated on when it carries none.
std::vector<TopicGap> topic_demographic_gaps(
    const TopicModel& model, std::span<const PredictionRecord> records,
    const Cohort& cohort, std::size_t min_support = kTopicMinSupport);

}  // namespace credence
