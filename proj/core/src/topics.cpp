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

#include "credence/topics.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "credence/error.hpp"
#include "credence/rng.hpp"

namespace credence {
namespace {

// Latin-1 supplement letters (U+00C0..U+00FF) folded to ASCII.
constexpr std::string_view kLatin1Fold =
    "AAAAAAACEEEEIIII"  // C0-CF
    "DNOOOOO*OUUUUYTs"  // D0-DF
    "aaaaaaaceeeeiiii"  // E0-EF
    "dnooooo/ouuuuyty"; // F0-FF

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.size() >= 2) tokens.push_back(cur);
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xC3 && i + 1 < text.size()) {
      const unsigned char next = static_cast<unsigned char>(text[i + 1]);
      if (next >= 0x80 && next <= 0xBF) {
        c = static_cast<unsigned char>(kLatin1Fold[next - 0x80]);
        ++i;
      }
    } else if (c >= 0x80) {
      flush();
      continue;
    }
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

TfidfMatrix tfidf(std::span<const std::string> documents) {
  std::vector<std::map<std::string, int>> tf(documents.size());
  std::set<std::string> vocab;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (std::string& t : tokenize(documents[d])) {
      vocab.insert(t);
      ++tf[d][std::move(t)];
    }
  }
  TfidfMatrix out;
  out.vocabulary.assign(vocab.begin(), vocab.end());
  std::map<std::string, Eigen::Index> column;
  for (std::size_t j = 0; j < out.vocabulary.size(); ++j) {
    column[out.vocabulary[j]] = static_cast<Eigen::Index>(j);
  }
  const auto n_docs = static_cast<Eigen::Index>(documents.size());
  const auto n_terms = static_cast<Eigen::Index>(out.vocabulary.size());
  Eigen::VectorXd df = Eigen::VectorXd::Zero(n_terms);
  for (const auto& counts : tf)
    for (const auto& [term, _] : counts) df(column[term]) += 1.0;
  out.X = Eigen::MatrixXd::Zero(n_docs, n_terms);
  for (Eigen::Index d = 0; d < n_docs; ++d) {
    for (const auto& [term, count] : tf[static_cast<std::size_t>(d)]) {
      const Eigen::Index j = column[term];
      const double idf =
          std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + df(j))) + 1.0;
      out.X(d, j) = (1.0 + std::log(static_cast<double>(count))) * idf;
    }
    const double norm = out.X.row(d).norm();
    if (norm > 0.0) out.X.row(d) /= norm;
  }
  return out;
}

NmfResult nmf(const Eigen::MatrixXd& X, int k, int iterations,
              std::uint64_t seed, double tolerance) {
  if (k < 1) throw ValidationError("nmf: k must be >= 1");
  if (X.size() == 0) throw ValidationError("nmf: empty matrix");
  if ((X.array() < 0.0).any()) throw ValidationError("nmf: negative entries");
  constexpr double kTiny = 1e-12;
  Rng rng(seed);
  const double scale = std::sqrt(std::max(X.mean(), kTiny) / k);
  NmfResult r;
  r.W.resize(X.rows(), k);
  r.H.resize(k, X.cols());
  for (Eigen::Index j = 0; j < r.W.cols(); ++j)
    for (Eigen::Index i = 0; i < r.W.rows(); ++i)
      r.W(i, j) = scale * (0.1 + rng.uniform());
  for (Eigen::Index j = 0; j < r.H.cols(); ++j)
    for (Eigen::Index i = 0; i < r.H.rows(); ++i)
      r.H(i, j) = scale * (0.1 + rng.uniform());
  r.errors.push_back((X - r.W * r.H).norm());
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd WtX = r.W.transpose() * X;
    const Eigen::MatrixXd WtWH = r.W.transpose() * r.W * r.H;
    r.H = r.H.cwiseProduct(WtX.cwiseQuotient((WtWH.array() + kTiny).matrix()));
    const Eigen::MatrixXd XHt = X * r.H.transpose();
    const Eigen::MatrixXd WHHt = r.W * (r.H * r.H.transpose());
    r.W = r.W.cwiseProduct(XHt.cwiseQuotient((WHHt.array() + kTiny).matrix()));
    const double err = (X - r.W * r.H).norm();
    if (!std::isfinite(err)) {
      throw TrainingError("nmf: reconstruction error is not finite at iteration " +
                          std::to_string(it));
    }
    if (err > r.errors.back() + tolerance) {
      throw TrainingError("nmf: reconstruction error increased at iteration " +
                          std::to_string(it) + " (" +
                          std::to_string(r.errors.back()) + " -> " +
                          std::to_string(err) + ")");
    }
    r.errors.push_back(err);
  }
  return r;
}

std::optional<int> TopicModel::topic_of(std::string_view claim_id) const {
  for (std::size_t i = 0; i < claim_ids.size(); ++i) {
    if (claim_ids[i] == claim_id) return assignment[i];
  }
  return std::nullopt;
}

std::vector<std::string> TopicModel::top_terms(int topic, std::size_t n) const {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(H.cols()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return H(topic, a) > H(topic, b);
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < std::min(n, idx.size()); ++i) {
    if (H(topic, idx[i]) <= 0.0) break;
    out.push_back(vocabulary[static_cast<std::size_t>(idx[i])]);
  }
  return out;
}

TopicModel nmf_topics(std::span<const Claim> claims, const NmfOptions& options) {
  if (options.k < 1 || static_cast<std::size_t>(options.k) > claims.size()) {
    throw ValidationError("nmf_topics: k=" + std::to_string(options.k) +
                          " needs at least that many claims (have " +
                          std::to_string(claims.size()) + ")");
  }
  std::vector<std::string> docs;
  TopicModel m;
  m.k = options.k;
  for (const Claim& c : claims) {
    docs.push_back(c.text);
    m.claim_ids.push_back(c.claim_id);
  }
  TfidfMatrix t = tfidf(docs);
  if (t.vocabulary.empty()) throw ValidationError("nmf_topics: empty vocabulary");
  NmfResult r = nmf(t.X, options.k, options.iterations, options.seed);
  m.vocabulary = std::move(t.vocabulary);
  m.W = std::move(r.W);
  m.H = std::move(r.H);
  m.errors = std::move(r.errors);
  for (Eigen::Index i = 0; i < m.W.rows(); ++i) {
    Eigen::Index best = 0;
    m.W.row(i).maxCoeff(&best);
    m.assignment.push_back(static_cast<int>(best));
  }
  return m;
}

std::vector<TopicGap> topic_demographic_gaps(
    const TopicModel& model, std::span<const PredictionRecord> records,
    const Cohort& cohort, std::size_t min_support) {
  // [topic][axis][side] -> (n, correct)
  struct Cell {
    std::size_t n = 0, ok = 0;
  };
  std::vector<std::array<std::array<Cell, 2>, 4>> cells(
      static_cast<std::size_t>(model.k));
  auto add = [&](int topic, Axis axis, Group g, bool ok) {
    const int side = g == groups_of(axis)[0] ? 0 : 1;
    Cell& c = cells[static_cast<std::size_t>(topic)][static_cast<std::size_t>(axis)]
                   [static_cast<std::size_t>(side)];
    ++c.n;
    if (ok) ++c.ok;
  };
  for (const PredictionRecord& rec : records) {
    const auto topic = model.topic_of(rec.claim_id);
    const ClaimJudgment* j = cohort.find_judgment(rec.pid, rec.claim_id);
    const auto pred = verdict_label(rec.predicted_label);
    if (!topic || !j || !pred) continue;
    const bool ok = *pred == j->participant_choice;
    if (rec.axis && rec.group) {
      add(*topic, *rec.axis, *rec.group, ok);
      continue;
    }
    const Participant* p = cohort.find_participant(rec.pid);
    for (Axis axis : kAllAxes) {
      if (const auto g = p->group(axis)) add(*topic, axis, *g, ok);
    }
  }
  std::vector<TopicGap> out;
  for (int t = 0; t < model.k; ++t) {
    for (Axis axis : kAllAxes) {
      if (!cohort.axis_available(axis)) continue;
      const auto& side = cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(axis)];
      TopicGap g;
      g.topic = t;
      g.axis = axis;
      g.n_first = side[0].n;
      g.n_second = side[1].n;
      if (side[0].n > 0)
        g.accuracy_first = static_cast<double>(side[0].ok) / static_cast<double>(side[0].n);
      if (side[1].n > 0)
        g.accuracy_second = static_cast<double>(side[1].ok) / static_cast<double>(side[1].n);
      if (g.accuracy_first && g.accuracy_second) {
        g.gap_ppts = 100.0 * (*g.accuracy_first - *g.accuracy_second);
      }
      g.low_support = side[0].n < min_support || side[1].n < min_support;
      out.push_back(g);
    }
  }
  return out;
}

}  // namespace credence
