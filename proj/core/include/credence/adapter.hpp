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
#include <vector>

#include <Eigen/Dense>

#include "credence/adamw.hpp"
#include "credence/belief_store.hpp"
#include "credence/demographics.hpp"

namespace credence {

inline constexpr int kAdapterBins = 10;
inline constexpr int kBeliefEmbeddingDim =
    kAdapterBins * static_cast<int>(kAllDimensions.size());

// Softmax over the first k of 10 logits; the remaining bins are exactly 0.
// Throws ValidationError unless logits has 10 entries and 2 <= k <= 10.
Eigen::VectorXd masked_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits,
                               int k);

// Linear head mapping a frozen-encoder hidden state to 10 bin logits.
struct BeliefAdapter {
  Eigen::MatrixXd W;  // 10 x d_emb
  Eigen::VectorXd b;  // 10
  bool frozen = false;

  int d_emb() const { return static_cast<int>(W.cols()); }
  // W ~ uniform(+-1/sqrt(d_emb)), b = 0.
  static BeliefAdapter init(int d_emb, std::uint64_t seed);
  Eigen::VectorXd predict(const Eigen::Ref<const Eigen::VectorXd>& h,
                          int k) const;
};

// Binary classifier over [h; z_bel]. Class 0 is "true", class 1 is "fake".
struct SusceptibilityHead {
  Eigen::MatrixXd U;  // 2 x (d_emb + d_bel)
  Eigen::VectorXd c;  // 2
  int d_emb = 0;
  int d_bel = kBeliefEmbeddingDim;

  static SusceptibilityHead init(int d_emb, int d_bel, std::uint64_t seed);
  Eigen::Vector2d predict_proba(const Eigen::Ref<const Eigen::VectorXd>& h,
                                const Eigen::Ref<const Eigen::VectorXd>& z) const;
  Label predict(const Eigen::Ref<const Eigen::VectorXd>& h,
                const Eigen::Ref<const Eigen::VectorXd>& z) const;
};

// Hidden-state input text for one (group, question) pair.
std::string adapter_input_text(Group group, std::string_view question_text);

struct BeliefPair {
  Eigen::VectorXd h;
  std::vector<double> target;  // empirical distribution over k bins
  int k = 0;
};

// KL(target || model) over the valid bins, in nats, 0 log 0 = 0.
double masked_kl(std::span<const double> target,
                 const Eigen::Ref<const Eigen::VectorXd>& predicted);

struct Phase1Gradient {
  double loss = 0.0;  // mean KL over the batch
  Eigen::MatrixXd dW;
  Eigen::VectorXd db;
};

Phase1Gradient phase1_loss_grad(const BeliefAdapter& adapter,
                                std::span<const BeliefPair> batch);

struct TrainHyper {
  double lr = 5e-4;
  int batch = 16;
  int epochs = 2;
  std::uint64_t seed = 0;
  double weight_decay = 0.01;
};

inline TrainHyper phase1_defaults() { return {5e-4, 16, 2, 0, 0.01}; }
inline TrainHyper phase2_defaults() { return {5e-4, 8, 2, 0, 0.01}; }

struct Phase1Result {
  BeliefAdapter adapter;  // frozen on return
  std::vector<double> step_loss;   // batch loss before each update
  std::vector<double> epoch_loss;  // full-set mean KL after each epoch
  long steps = 0;
  AdamWConfig optimizer;
};

// Minimizes mean masked KL with AdamW. Throws ValidationError on
// inconsistent inputs and TrainingError on a non-finite loss.
Phase1Result phase1_train(std::span<const BeliefPair> pairs,
                          const TrainHyper& hyper,
                          std::optional<BeliefAdapter> initial = std::nullopt);

struct ProbeQuestion {
  BeliefDimension dimension = BeliefDimension::kWorldviewIdentity;
  int k = 0;
  Eigen::VectorXd h;  // hidden state of adapter_input_text(group, question)
};

struct BeliefEmbedding {
  Eigen::VectorXd z;  // kBeliefEmbeddingDim
  std::vector<std::string> warnings;
};

// Per dimension, the mean of the adapter's masked-softmax outputs over
// that dimension's probes, concatenated in taxonomy order. A dimension
// without probes yields a zero block and a warning. Requires a frozen
// adapter.
BeliefEmbedding belief_embedding(const BeliefAdapter& adapter,
                                 std::span<const ProbeQuestion> probes);

struct HeadExample {
  Eigen::VectorXd h;
  Eigen::VectorXd z;
  Label label = Label::kFake;
};

struct Phase2Gradient {
  double loss = 0.0;  // mean cross-entropy
  Eigen::MatrixXd dU;
  Eigen::VectorXd dc;
};

Phase2Gradient phase2_loss_grad(const SusceptibilityHead& head,
                                std::span<const HeadExample> batch);

struct ClassificationMetrics {
  std::size_t n = 0;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

ClassificationMetrics evaluate_head(const SusceptibilityHead& head,
                                    std::span<const HeadExample> examples);

struct EpochMetrics {
  double loss = 0.0;
  ClassificationMetrics train;
  std::optional<ClassificationMetrics> validation;
};

struct Phase2Result {
  SusceptibilityHead head;
  std::vector<EpochMetrics> epochs;
  long steps = 0;
  AdamWConfig optimizer;
};

// Trains U and c only. When an adapter is passed its parameters are
// compared bit for bit before and after; a change throws TrainingError.
// A single-class training set throws TrainingError.
Phase2Result phase2_train(std::span<const HeadExample> train,
                          const TrainHyper& hyper,
                          std::span<const HeadExample> validation = {},
                          const BeliefAdapter* frozen_adapter = nullptr);

enum class Perturbation { kZero, kSwap };

struct ShortcutExample {
  Eigen::VectorXd h;
  Eigen::VectorXd z;
  Eigen::VectorXd z_swapped;  // z_bel of the other group; used by kSwap
  Label label = Label::kFake;
};

struct ShortcutMetrics {
  double flip_rate = 0.0;   // fraction of changed predictions
  double prob_delta = 0.0;  // mean |delta p(originally predicted class)|
  double acc_drop = 0.0;    // accuracy before - accuracy after
  std::vector<Label> before;
  std::vector<Label> after;
};

// Throws ValidationError on an empty evaluation set.
ShortcutMetrics ft_shortcut_metrics(const SusceptibilityHead& head,
                                    std::span<const ShortcutExample> examples,
                                    Perturbation perturbation);

}  // namespace credence
