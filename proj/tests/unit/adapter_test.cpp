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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "credence/error.hpp"
#include "credence/rng.hpp"
#include "synthetic.hpp"

namespace credence {
namespace {

Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * rng.normal();
  return v;
}

BeliefPair random_pair(Rng& rng, int d) {
  BeliefPair p;
  p.k = 2 + static_cast<int>(rng.bounded(9));
  p.h = random_vector(rng, d);
  p.target = testing::random_simplex(rng, p.k);
  return p;
}

double rel_error(double a, double b) {
  return std::fabs(a - b) / std::max({std::fabs(a), std::fabs(b), 1e-8});
}

TEST(MaskedSoftmax, TwoBinHandCase) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(kAdapterBins);
  z(0) = 2.0;
  z(5) = 50.0;  // masked out
  const auto p = masked_softmax(z, 2);
  const double e2 = std::exp(2.0);
  EXPECT_NEAR(p(0), e2 / (e2 + 1.0), 1e-15);
  EXPECT_NEAR(p(0), 0.8808, 1e-4);
  EXPECT_NEAR(p(1), 1.0 / (e2 + 1.0), 1e-15);
  for (int i = 2; i < kAdapterBins; ++i) EXPECT_EQ(p(i), 0.0);
}

TEST(MaskedSoftmax, SumsToOneAndRejectsBadK) {
  Rng rng(1);
  for (int k = 2; k <= 10; ++k) {
    const auto p = masked_softmax(random_vector(rng, kAdapterBins, 5.0), k);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_EQ(p.tail(kAdapterBins - k).cwiseAbs().sum(), 0.0);
  }
  const Eigen::VectorXd z = Eigen::VectorXd::Zero(kAdapterBins);
  EXPECT_THROW(masked_softmax(z, 1), ValidationError);
  EXPECT_THROW(masked_softmax(z, 11), ValidationError);
  EXPECT_THROW(masked_softmax(Eigen::VectorXd::Zero(4), 2), ValidationError);
}

TEST(MaskedKl, MatchesDirectSum) {
  Eigen::VectorXd pred = Eigen::VectorXd::Zero(kAdapterBins);
  pred(0) = 0.25;
  pred(1) = 0.75;
  const std::vector<double> t = {0.5, 0.5};
  EXPECT_NEAR(masked_kl(t, pred),
              0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75), 1e-15);
  const std::vector<double> one_hot = {1.0, 0.0};
  EXPECT_NEAR(masked_kl(one_hot, pred), std::log(4.0), 1e-15);
}

TEST(Phase1, GradientMatchesCentralDifferences) {
  Rng rng(21);
  const int d = 6;
  std::vector<BeliefPair> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_pair(rng, d));
  BeliefAdapter a = BeliefAdapter::init(d, 3);
  a.b = random_vector(rng, kAdapterBins, 0.3);
  const auto g = phase1_loss_grad(a, batch);
  const double h = 1e-6;
  for (int i = 0; i < a.W.rows(); ++i) {
    for (int j = 0; j < a.W.cols(); ++j) {
      BeliefAdapter plus = a, minus = a;
      plus.W(i, j) += h;
      minus.W(i, j) -= h;
      const double fd = (phase1_loss_grad(plus, batch).loss -
                         phase1_loss_grad(minus, batch).loss) / (2 * h);
      if (std::fabs(fd) < 1e-7 && std::fabs(g.dW(i, j)) < 1e-7) continue;
      EXPECT_LT(rel_error(g.dW(i, j), fd), 1e-4) << "W(" << i << "," << j << ")";
    }
  }
  for (int i = 0; i < a.b.size(); ++i) {
    BeliefAdapter plus = a, minus = a;
    plus.b(i) += h;
    minus.b(i) -= h;
    const double fd = (phase1_loss_grad(plus, batch).loss -
                       phase1_loss_grad(minus, batch).loss) / (2 * h);
    if (std::fabs(fd) < 1e-7 && std::fabs(g.db(i)) < 1e-7) continue;
    EXPECT_LT(rel_error(g.db(i), fd), 1e-4) << "b(" << i << ")";
  }
}

TEST(Phase1, LossIsMeanMaskedKl) {
  Rng rng(4);
  std::vector<BeliefPair> batch;
  for (int i = 0; i < 4; ++i) batch.push_back(random_pair(rng, 3));
  const BeliefAdapter a = BeliefAdapter::init(3, 9);
  double oracle = 0.0;
  for (const auto& p : batch) oracle += masked_kl(p.target, a.predict(p.h, p.k));
  EXPECT_NEAR(phase1_loss_grad(a, batch).loss, oracle / 4.0, 1e-12);
}

TEST(Phase1, FitsOrthogonalEmbeddings) {
  Rng rng(8);
  std::vector<BeliefPair> pairs;
  for (int i = 0; i < 4; ++i) {
    BeliefPair p;
    p.k = 3 + 2 * i;
    p.h = Eigen::VectorXd::Unit(4, i);
    p.target = testing::random_simplex(rng, p.k);
    pairs.push_back(p);
  }
  TrainHyper hyper{0.05, 16, 500, 1, 0.01};
  const auto r = phase1_train(pairs, hyper);
  EXPECT_EQ(r.steps, 500);
  EXPECT_TRUE(r.adapter.frozen);
  EXPECT_LT(r.epoch_loss.back(), 0.01);
  EXPECT_LT(r.epoch_loss.back(), r.step_loss.front());
}

TEST(Phase1, SeededTrainingIsReproducible) {
  Rng rng(5);
  std::vector<BeliefPair> pairs;
  for (int i = 0; i < 20; ++i) pairs.push_back(random_pair(rng, 5));
  TrainHyper hyper{0.01, 4, 3, 77, 0.01};
  const auto a = phase1_train(pairs, hyper);
  const auto b = phase1_train(pairs, hyper);
  EXPECT_EQ(a.step_loss, b.step_loss);
  EXPECT_TRUE(a.adapter.W == b.adapter.W);
  EXPECT_EQ(a.steps, 15);  // 3 epochs x ceil(20 / 4)
}

TEST(Phase1, RejectsInconsistentPairs) {
  Rng rng(5);
  std::vector<BeliefPair> pairs = {random_pair(rng, 3), random_pair(rng, 4)};
  EXPECT_THROW(phase1_train(pairs, phase1_defaults()), ValidationError);
  pairs = {random_pair(rng, 3)};
  pairs[0].target.push_back(0.0);
  EXPECT_THROW(phase1_train(pairs, phase1_defaults()), ValidationError);
  EXPECT_THROW(phase1_train({}, phase1_defaults()), ValidationError);
}

TEST(BeliefEmbedding, MeansPerDimensionAndWarnsOnGaps) {
  BeliefAdapter a = BeliefAdapter::init(3, 2);
  Rng rng(6);
  std::vector<ProbeQuestion> probes;
  probes.push_back({BeliefDimension::kEpistemicTrust, 4, random_vector(rng, 3)});
  probes.push_back({BeliefDimension::kEpistemicTrust, 2, random_vector(rng, 3)});
  probes.push_back({BeliefDimension::kHeuristics, 7, random_vector(rng, 3)});
  EXPECT_THROW(belief_embedding(a, probes), ValidationError);
  a.frozen = true;
  const auto e = belief_embedding(a, probes);
  ASSERT_EQ(e.z.size(), kBeliefEmbeddingDim);
  const Eigen::VectorXd trust =
      0.5 * (a.predict(probes[0].h, 4) + a.predict(probes[1].h, 2));
  const int ti = static_cast<int>(dimension_index(BeliefDimension::kEpistemicTrust));
  const int hi = static_cast<int>(dimension_index(BeliefDimension::kHeuristics));
  for (int i = 0; i < kAdapterBins; ++i) {
    EXPECT_NEAR(e.z(ti * kAdapterBins + i), trust(i), 1e-15);
    EXPECT_NEAR(e.z(hi * kAdapterBins + i), a.predict(probes[2].h, 7)(i), 1e-15);
  }
  EXPECT_EQ(e.warnings.size(), 5u);
  const int wi = static_cast<int>(dimension_index(BeliefDimension::kWorldviewIdentity));
  EXPECT_EQ(e.z.segment(wi * kAdapterBins, kAdapterBins).cwiseAbs().sum(), 0.0);
}

HeadExample random_example(Rng& rng, int d_emb, int d_bel) {
  return {random_vector(rng, d_emb), random_vector(rng, d_bel),
          rng.uniform() < 0.5 ? Label::kTrue : Label::kFake};
}

TEST(Phase2, GradientMatchesCentralDifferences) {
  Rng rng(31);
  std::vector<HeadExample> batch;
  for (int i = 0; i < 7; ++i) batch.push_back(random_example(rng, 4, 5));
  SusceptibilityHead head = SusceptibilityHead::init(4, 5, 11);
  head.c = random_vector(rng, 2, 0.2);
  const auto g = phase2_loss_grad(head, batch);
  const double h = 1e-6;
  for (int i = 0; i < head.U.rows(); ++i) {
    for (int j = 0; j < head.U.cols(); ++j) {
      auto plus = head, minus = head;
      plus.U(i, j) += h;
      minus.U(i, j) -= h;
      const double fd = (phase2_loss_grad(plus, batch).loss -
                         phase2_loss_grad(minus, batch).loss) / (2 * h);
      EXPECT_LT(rel_error(g.dU(i, j), fd), 1e-4) << "U(" << i << "," << j << ")";
    }
  }
  for (int i = 0; i < 2; ++i) {
    auto plus = head, minus = head;
    plus.c(i) += h;
    minus.c(i) -= h;
    const double fd = (phase2_loss_grad(plus, batch).loss -
                       phase2_loss_grad(minus, batch).loss) / (2 * h);
    EXPECT_LT(rel_error(g.dc(i), fd), 1e-4);
  }
}

TEST(Phase2, LossIsMeanCrossEntropy) {
  Rng rng(12);
  std::vector<HeadExample> batch;
  for (int i = 0; i < 5; ++i) batch.push_back(random_example(rng, 3, 2));
  const auto head = SusceptibilityHead::init(3, 2, 4);
  double oracle = 0.0;
  for (const auto& ex : batch) {
    const auto p = head.predict_proba(ex.h, ex.z);
    oracle -= std::log(p(ex.label == Label::kTrue ? 0 : 1));
  }
  EXPECT_NEAR(phase2_loss_grad(head, batch).loss, oracle / 5.0, 1e-12);
}

TEST(Phase2, EvaluateHeadMatchesCountingOracle) {
  Rng rng(13);
  std::vector<HeadExample> ex;
  for (int i = 0; i < 40; ++i) ex.push_back(random_example(rng, 3, 3));
  const auto head = SusceptibilityHead::init(3, 3, 5);
  std::size_t tp[2] = {}, fp[2] = {}, fn[2] = {}, ok = 0;
  for (const auto& e : ex) {
    const int t = e.label == Label::kTrue ? 0 : 1;
    const int p = head.predict(e.h, e.z) == Label::kTrue ? 0 : 1;
    if (t == p) {
      ++ok;
      ++tp[t];
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  double f1 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    if (denom > 0) f1 += 2.0 * tp[c] / denom;
  }
  const auto m = evaluate_head(head, ex);
  EXPECT_EQ(m.n, 40u);
  EXPECT_DOUBLE_EQ(m.accuracy, ok / 40.0);
  EXPECT_DOUBLE_EQ(m.macro_f1, f1 / 2.0);
}

TEST(Phase2, SingleClassTrainingSetIsRejected) {
  Rng rng(14);
  std::vector<HeadExample> ex;
  for (int i = 0; i < 5; ++i) {
    auto e = random_example(rng, 2, 2);
    e.label = Label::kTrue;
    ex.push_back(e);
  }
  EXPECT_THROW(phase2_train(ex, phase2_defaults()), TrainingError);
}

TEST(Phase2, LeavesFrozenAdapterBitIdentical) {
  Rng rng(15);
  BeliefAdapter adapter = BeliefAdapter::init(4, 1);
  adapter.frozen = true;
  const BeliefAdapter copy = adapter;
  std::vector<HeadExample> ex;
  for (int i = 0; i < 30; ++i) ex.push_back(random_example(rng, 4, 3));
  phase2_train(ex, TrainHyper{0.01, 8, 3, 2, 0.01}, {}, &adapter);
  EXPECT_EQ(std::memcmp(copy.W.data(), adapter.W.data(),
                        sizeof(double) * copy.W.size()), 0);
  EXPECT_EQ(std::memcmp(copy.b.data(), adapter.b.data(),
                        sizeof(double) * copy.b.size()), 0);
  BeliefAdapter unfrozen = BeliefAdapter::init(4, 1);
  EXPECT_THROW(phase2_train(ex, phase2_defaults(), {}, &unfrozen), TrainingError);
}

TEST(ShortcutMetrics, ZeroedBeliefWeightsGiveExactZeros) {
  Rng rng(16);
  SusceptibilityHead head = SusceptibilityHead::init(3, 6, 2);
  head.U.rightCols(6).setZero();
  std::vector<ShortcutExample> ex;
  for (int i = 0; i < 25; ++i) {
    ex.push_back({random_vector(rng, 3), random_vector(rng, 6),
                  random_vector(rng, 6),
                  rng.uniform() < 0.5 ? Label::kTrue : Label::kFake});
  }
  for (auto p : {Perturbation::kZero, Perturbation::kSwap}) {
    const auto m = ft_shortcut_metrics(head, ex, p);
    EXPECT_EQ(m.flip_rate, 0.0);
    EXPECT_EQ(m.prob_delta, 0.0);
    EXPECT_EQ(m.acc_drop, 0.0);
  }
}

TEST(ShortcutMetrics, MatchesBruteForce) {
  Rng rng(17);
  const auto head = SusceptibilityHead::init(2, 4, 8);
  std::vector<ShortcutExample> ex;
  for (int i = 0; i < 30; ++i) {
    ex.push_back({random_vector(rng, 2), random_vector(rng, 4, 3.0),
                  random_vector(rng, 4, 3.0),
                  rng.uniform() < 0.5 ? Label::kTrue : Label::kFake});
  }
  const auto m = ft_shortcut_metrics(head, ex, Perturbation::kSwap);
  double flips = 0, delta = 0, before = 0, after = 0;
  for (const auto& e : ex) {
    const auto p0 = head.predict_proba(e.h, e.z);
    const auto p1 = head.predict_proba(e.h, e.z_swapped);
    const int c0 = p0(1) > p0(0), c1 = p1(1) > p1(0);
    const int y = e.label == Label::kFake;
    flips += c0 != c1;
    delta += std::fabs(p1(c0) - p0(c0));
    before += c0 == y;
    after += c1 == y;
  }
  EXPECT_NEAR(m.flip_rate, flips / 30.0, 1e-15);
  EXPECT_NEAR(m.prob_delta, delta / 30.0, 1e-15);
  EXPECT_NEAR(m.acc_drop, (before - after) / 30.0, 1e-15);
  EXPECT_GT(flips, 0.0);
  EXPECT_THROW(ft_shortcut_metrics(head, {}, Perturbation::kZero), ValidationError);
}

}  // namespace
}  // namespace credence
