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

#include "credence/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "credence/error.hpp"
#include "credence/rng.hpp"

namespace credence {
namespace {

Eigen::MatrixXd uniform_init(int rows, int cols, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  // Column-major fill order is part of the seeded contract.
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-bound, bound);
  }
  return m;
}

// log-softmax over the first k logits.
Eigen::VectorXd masked_log_softmax(const Eigen::Ref<const Eigen::VectorXd>& z,
                                   int k) {
  const Eigen::VectorXd head = z.head(k);
  const double mx = head.maxCoeff();
  const double lse = mx + std::log((head.array() - mx).exp().sum());
  return head.array() - lse;
}

int class_index(Label label) { return label == Label::kTrue ? 0 : 1; }
Label class_label(int index) { return index == 0 ? Label::kTrue : Label::kFake; }

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed,
                                     int epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(epoch)));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

void check_hyper(const TrainHyper& hyper) {
  if (!(hyper.lr > 0.0) || hyper.batch < 1 || hyper.epochs < 1 ||
      hyper.weight_decay < 0.0) {
    throw ValidationError("invalid training hyperparameters");
  }
}

ClassificationMetrics metrics_from(std::span<const Label> truth,
                                   std::span<const Label> pred) {
  ClassificationMetrics m;
  m.n = truth.size();
  if (m.n == 0) return m;
  std::size_t tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0}, ok = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = class_index(truth[i]);
    const int p = class_index(pred[i]);
    if (t == p) {
      ++ok;
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  m.accuracy = static_cast<double>(ok) / static_cast<double>(m.n);
  double f1 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const std::size_t denom = 2 * tp[c] + fp[c] + fn[c];
    if (denom > 0) f1 += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(denom);
  }
  m.macro_f1 = f1 / 2.0;
  return m;
}

}  // namespace

Eigen::VectorXd masked_softmax(const Eigen::Ref<const Eigen::VectorXd>& logits,
                               int k) {
  if (logits.size() != kAdapterBins) {
    throw ValidationError("masked_softmax expects " +
                          std::to_string(kAdapterBins) + " logits, got " +
                          std::to_string(logits.size()));
  }
  if (k < kMinScale || k > kMaxScale) {
    throw ValidationError("masked_softmax: K out of range: " + std::to_string(k));
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(kAdapterBins);
  out.head(k) = masked_log_softmax(logits, k).array().exp();
  return out;
}

BeliefAdapter BeliefAdapter::init(int d_emb, std::uint64_t seed) {
  if (d_emb < 1) throw ValidationError("adapter embedding dimension must be >= 1");
  Rng rng(seed);
  BeliefAdapter a;
  a.W = uniform_init(kAdapterBins, d_emb, rng);
  a.b = Eigen::VectorXd::Zero(kAdapterBins);
  return a;
}

Eigen::VectorXd BeliefAdapter::predict(const Eigen::Ref<const Eigen::VectorXd>& h,
                                       int k) const {
  if (h.size() != W.cols()) {
    throw ValidationError("adapter input has dimension " +
                          std::to_string(h.size()) + ", expected " +
                          std::to_string(W.cols()));
  }
  return masked_softmax(W * h + b, k);
}

SusceptibilityHead SusceptibilityHead::init(int d_emb, int d_bel,
                                            std::uint64_t seed) {
  if (d_emb < 1 || d_bel < 0) throw ValidationError("invalid head dimensions");
  Rng rng(seed);
  SusceptibilityHead head;
  head.d_emb = d_emb;
  head.d_bel = d_bel;
  head.U = uniform_init(2, d_emb + d_bel, rng);
  head.c = Eigen::VectorXd::Zero(2);
  return head;
}

Eigen::Vector2d SusceptibilityHead::predict_proba(
    const Eigen::Ref<const Eigen::VectorXd>& h,
    const Eigen::Ref<const Eigen::VectorXd>& z) const {
  if (h.size() != d_emb || z.size() != d_bel) {
    throw ValidationError("head input dimensions do not match (" +
                          std::to_string(h.size()) + ", " +
                          std::to_string(z.size()) + ")");
  }
  const Eigen::Vector2d logits =
      U.leftCols(d_emb) * h + U.rightCols(d_bel) * z + c;
  const double mx = logits.maxCoeff();
  const Eigen::Vector2d e = (logits.array() - mx).exp();
  return e / e.sum();
}

Label SusceptibilityHead::predict(const Eigen::Ref<const Eigen::VectorXd>& h,
                                  const Eigen::Ref<const Eigen::VectorXd>& z) const {
  const Eigen::Vector2d p = predict_proba(h, z);
  return p(1) > p(0) ? Label::kFake : Label::kTrue;
}

std::string adapter_input_text(Group group, std::string_view question_text) {
  return "Demographic: " + std::string(persona_phrase(group)) +
         ". Question: " + std::string(question_text);
}

double masked_kl(std::span<const double> target,
                 const Eigen::Ref<const Eigen::VectorXd>& predicted) {
  double kl = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] > 0.0) {
      kl += target[i] * (std::log(target[i]) -
                         std::log(predicted(static_cast<Eigen::Index>(i))));
    }
  }
  return kl;
}

Phase1Gradient phase1_loss_grad(const BeliefAdapter& adapter,
                                std::span<const BeliefPair> batch) {
  if (batch.empty()) throw ValidationError("empty Phase-1 batch");
  Phase1Gradient g;
  g.dW = Eigen::MatrixXd::Zero(adapter.W.rows(), adapter.W.cols());
  g.db = Eigen::VectorXd::Zero(adapter.b.size());
  for (const BeliefPair& pair : batch) {
    const Eigen::VectorXd z = adapter.W * pair.h + adapter.b;
    const Eigen::VectorXd logp = masked_log_softmax(z, pair.k);
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(kAdapterBins);
    for (int i = 0; i < pair.k; ++i) {
      const double t = pair.target[static_cast<std::size_t>(i)];
      if (t > 0.0) g.loss += t * (std::log(t) - logp(i));
      dz(i) = std::exp(logp(i)) - t;
    }
    g.dW.noalias() += dz * pair.h.transpose();
    g.db += dz;
  }
  const double n = static_cast<double>(batch.size());
  g.loss /= n;
  g.dW /= n;
  g.db /= n;
  return g;
}

Phase1Result phase1_train(std::span<const BeliefPair> pairs,
                          const TrainHyper& hyper,
                          std::optional<BeliefAdapter> initial) {
  check_hyper(hyper);
  if (pairs.empty()) throw ValidationError("Phase-1 training set is empty");
  const Eigen::Index d = pairs.front().h.size();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const BeliefPair& p = pairs[i];
    if (p.h.size() != d) {
      throw ValidationError("Phase-1 pair " + std::to_string(i) +
                            " has embedding dimension " +
                            std::to_string(p.h.size()) + ", expected " +
                            std::to_string(d));
    }
    if (p.k < kMinScale || p.k > kMaxScale ||
        p.target.size() != static_cast<std::size_t>(p.k)) {
      throw ValidationError("Phase-1 pair " + std::to_string(i) +
                            " has a target that does not match K=" +
                            std::to_string(p.k));
    }
  }

  Phase1Result result;
  result.adapter = initial ? std::move(*initial)
                           : BeliefAdapter::init(static_cast<int>(d), hyper.seed);
  if (result.adapter.W.rows() != kAdapterBins || result.adapter.W.cols() != d) {
    throw ValidationError("initial adapter shape does not match the data");
  }
  result.adapter.frozen = false;
  result.optimizer = AdamWConfig{hyper.lr, 0.9, 0.999, 1e-8, hyper.weight_decay};
  AdamW opt(result.optimizer);
  BeliefAdapter& a = result.adapter;

  std::vector<BeliefPair> batch;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto order = epoch_order(pairs.size(), hyper.seed, epoch);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hyper.batch)) {
      batch.clear();
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
      for (std::size_t i = start; i < end; ++i) batch.push_back(pairs[order[i]]);
      const Phase1Gradient g = phase1_loss_grad(a, batch);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("Phase-1 loss is not finite at epoch " +
                            std::to_string(epoch) + ", step " +
                            std::to_string(result.steps) +
                            " (max |W| = " +
                            std::to_string(a.W.cwiseAbs().maxCoeff()) + ")");
      }
      result.step_loss.push_back(g.loss);
      const ParamBlock blocks[] = {
          {a.W.data(), g.dW.data(), static_cast<std::size_t>(a.W.size())},
          {a.b.data(), g.db.data(), static_cast<std::size_t>(a.b.size())}};
      opt.step(blocks);
      ++result.steps;
    }
    result.epoch_loss.push_back(phase1_loss_grad(a, pairs).loss);
  }
  a.frozen = true;
  return result;
}

BeliefEmbedding belief_embedding(const BeliefAdapter& adapter,
                                 std::span<const ProbeQuestion> probes) {
  if (!adapter.frozen) {
    throw ValidationError("belief_embedding requires a frozen adapter");
  }
  BeliefEmbedding out;
  out.z = Eigen::VectorXd::Zero(kBeliefEmbeddingDim);
  for (BeliefDimension dim : kAllDimensions) {
    const int block = static_cast<int>(dimension_index(dim)) * kAdapterBins;
    int count = 0;
    for (const ProbeQuestion& q : probes) {
      if (q.dimension != dim) continue;
      out.z.segment(block, kAdapterBins) += adapter.predict(q.h, q.k);
      ++count;
    }
    if (count == 0) {
      out.warnings.push_back("no probe questions for dimension " +
                             std::string(dimension_name(dim)) +
                             "; block left at zero");
    } else {
      out.z.segment(block, kAdapterBins) /= static_cast<double>(count);
    }
  }
  return out;
}

Phase2Gradient phase2_loss_grad(const SusceptibilityHead& head,
                                std::span<const HeadExample> batch) {
  if (batch.empty()) throw ValidationError("empty Phase-2 batch");
  Phase2Gradient g;
  g.dU = Eigen::MatrixXd::Zero(head.U.rows(), head.U.cols());
  g.dc = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd x(head.d_emb + head.d_bel);
  for (const HeadExample& ex : batch) {
    x << ex.h, ex.z;
    const Eigen::Vector2d logits = head.U * x + head.c;
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    const int y = class_index(ex.label);
    g.loss += lse - logits(y);
    Eigen::Vector2d dz = (logits.array() - lse).exp();
    dz(y) -= 1.0;
    g.dU.noalias() += dz * x.transpose();
    g.dc += dz;
  }
  const double n = static_cast<double>(batch.size());
  g.loss /= n;
  g.dU /= n;
  g.dc /= n;
  return g;
}

ClassificationMetrics evaluate_head(const SusceptibilityHead& head,
                                    std::span<const HeadExample> examples) {
  std::vector<Label> truth, pred;
  for (const HeadExample& ex : examples) {
    truth.push_back(ex.label);
    pred.push_back(head.predict(ex.h, ex.z));
  }
  return metrics_from(truth, pred);
}

Phase2Result phase2_train(std::span<const HeadExample> train,
                          const TrainHyper& hyper,
                          std::span<const HeadExample> validation,
                          const BeliefAdapter* frozen_adapter) {
  check_hyper(hyper);
  if (train.empty()) throw ValidationError("Phase-2 training set is empty");
  const Eigen::Index d_emb = train.front().h.size();
  const Eigen::Index d_bel = train.front().z.size();
  std::size_t per_class[2] = {0, 0};
  auto check = [&](const HeadExample& ex, const char* which) {
    if (ex.h.size() != d_emb || ex.z.size() != d_bel) {
      throw ValidationError(std::string("inconsistent dimensions in Phase-2 ") +
                            which + " set");
    }
  };
  for (const HeadExample& ex : train) {
    check(ex, "training");
    ++per_class[class_index(ex.label)];
  }
  for (const HeadExample& ex : validation) check(ex, "validation");
  if (per_class[0] == 0 || per_class[1] == 0) {
    throw TrainingError("Phase-2 training set has a single class (true=" +
                        std::to_string(per_class[0]) +
                        ", fake=" + std::to_string(per_class[1]) + ")");
  }
  if (frozen_adapter && !frozen_adapter->frozen) {
    throw TrainingError("Phase-2 requires a frozen belief adapter");
  }
  const Eigen::MatrixXd w_before =
      frozen_adapter ? frozen_adapter->W : Eigen::MatrixXd();
  const Eigen::VectorXd b_before =
      frozen_adapter ? frozen_adapter->b : Eigen::VectorXd();

  Phase2Result result;
  result.head = SusceptibilityHead::init(static_cast<int>(d_emb),
                                         static_cast<int>(d_bel), hyper.seed);
  result.optimizer = AdamWConfig{hyper.lr, 0.9, 0.999, 1e-8, hyper.weight_decay};
  AdamW opt(result.optimizer);
  SusceptibilityHead& head = result.head;

  std::vector<HeadExample> batch;
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto order = epoch_order(train.size(), hyper.seed, epoch);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(hyper.batch)) {
      batch.clear();
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
      for (std::size_t i = start; i < end; ++i) batch.push_back(train[order[i]]);
      const Phase2Gradient g = phase2_loss_grad(head, batch);
      if (!std::isfinite(g.loss)) {
        throw TrainingError("Phase-2 loss is not finite at epoch " +
                            std::to_string(epoch) + ", step " +
                            std::to_string(result.steps));
      }
      const ParamBlock blocks[] = {
          {head.U.data(), g.dU.data(), static_cast<std::size_t>(head.U.size())},
          {head.c.data(), g.dc.data(), static_cast<std::size_t>(head.c.size())}};
      opt.step(blocks);
      ++result.steps;
    }
    EpochMetrics m;
    m.loss = phase2_loss_grad(head, train).loss;
    m.train = evaluate_head(head, train);
    if (!validation.empty()) m.validation = evaluate_head(head, validation);
    result.epochs.push_back(m);
  }

  if (frozen_adapter) {
    const bool same =
        w_before.size() == frozen_adapter->W.size() &&
        b_before.size() == frozen_adapter->b.size() &&
        std::equal(w_before.data(), w_before.data() + w_before.size(),
                   frozen_adapter->W.data()) &&
        std::equal(b_before.data(), b_before.data() + b_before.size(),
                   frozen_adapter->b.data());
    if (!same) throw TrainingError("belief adapter changed during Phase 2");
  }
  return result;
}

ShortcutMetrics ft_shortcut_metrics(const SusceptibilityHead& head,
                                    std::span<const ShortcutExample> examples,
                                    Perturbation perturbation) {
  if (examples.empty()) {
    throw ValidationError("ft_shortcut_metrics: empty evaluation set");
  }
  ShortcutMetrics m;
  std::size_t flips = 0, ok_before = 0, ok_after = 0;
  double delta_sum = 0.0;
  for (const ShortcutExample& ex : examples) {
    const Eigen::VectorXd z_after =
        perturbation == Perturbation::kZero
            ? Eigen::VectorXd(Eigen::VectorXd::Zero(ex.z.size()))
            : ex.z_swapped;
    const Eigen::Vector2d p0 = head.predict_proba(ex.h, ex.z);
    const Eigen::Vector2d p1 = head.predict_proba(ex.h, z_after);
    const int c0 = p0(1) > p0(0) ? 1 : 0;
    const int c1 = p1(1) > p1(0) ? 1 : 0;
    m.before.push_back(class_label(c0));
    m.after.push_back(class_label(c1));
    if (c0 != c1) ++flips;
    if (class_label(c0) == ex.label) ++ok_before;
    if (class_label(c1) == ex.label) ++ok_after;
    delta_sum += std::abs(p1(c0) - p0(c0));
  }
  const double n = static_cast<double>(examples.size());
  m.flip_rate = static_cast<double>(flips) / n;
  m.prob_delta = delta_sum / n;
  m.acc_drop = static_cast<double>(ok_before) / n - static_cast<double>(ok_after) / n;
  return m;
}

}  // namespace credence
