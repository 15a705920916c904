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

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "credence/error.hpp"
#include "credence/rng.hpp"
#include "synthetic.hpp"

namespace credence {
namespace {

TEST(Tokenize, LowercasesFoldsAndDropsShortRuns) {
  EXPECT_EQ(tokenize("Vaccines CAUSE 5G-a problems!"),
            (std::vector<std::string>{"vaccines", "cause", "5g", "problems"}));
  EXPECT_EQ(tokenize("Caf\xC3\xA9 na\xC3\xAFve \xC3\x9C" "ber"),
            (std::vector<std::string>{"cafe", "naive", "uber"}));
  // Other non-ASCII bytes split tokens.
  EXPECT_EQ(tokenize("ab\xE2\x82\xAC" "cd"), (std::vector<std::string>{"ab", "cd"}));
  EXPECT_TRUE(tokenize("a b c").empty());
}

TEST(Tfidf, MatchesHandComputation) {
  const std::vector<std::string> docs = {"apple apple pear", "pear plum"};
  const auto t = tfidf(docs);
  ASSERT_EQ(t.vocabulary, (std::vector<std::string>{"apple", "pear", "plum"}));
  const double idf_rare = std::log(3.0 / 2.0) + 1.0;
  const double idf_common = 1.0;
  const double a = (1.0 + std::log(2.0)) * idf_rare;
  const double n0 = std::hypot(a, idf_common);
  EXPECT_NEAR(t.X(0, 0), a / n0, 1e-15);
  EXPECT_NEAR(t.X(0, 1), idf_common / n0, 1e-15);
  EXPECT_EQ(t.X(0, 2), 0.0);
  const double n1 = std::hypot(idf_common, idf_rare);
  EXPECT_NEAR(t.X(1, 1), idf_common / n1, 1e-15);
  EXPECT_NEAR(t.X(1, 2), idf_rare / n1, 1e-15);
  for (Eigen::Index r = 0; r < t.X.rows(); ++r) EXPECT_NEAR(t.X.row(r).norm(), 1.0, 1e-15);
}

TEST(Nmf, ErrorNeverIncreasesOnRandomMatrices) {
  Rng rng(44);
  for (int trial = 0; trial < 10; ++trial) {
    const int rows = 5 + trial, cols = 8 + 2 * trial;
    Eigen::MatrixXd X(rows, cols);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform();
    const auto r = nmf(X, 3, 150, static_cast<std::uint64_t>(trial), 0.0);
    ASSERT_EQ(r.errors.size(), 151u);
    for (std::size_t i = 1; i < r.errors.size(); ++i)
      EXPECT_LE(r.errors[i], r.errors[i - 1]) << "trial " << trial << " iter " << i;
    EXPECT_TRUE((r.W.array() >= 0.0).all());
    EXPECT_TRUE((r.H.array() >= 0.0).all());
  }
}

TEST(Nmf, RecoversRankOneMatrix) {
  Eigen::VectorXd u(6), v(9);
  u << 1, 2, 0.5, 3, 0.1, 1.5;
  v << 0.2, 1, 2, 0.7, 0.3, 1.1, 0.9, 0.05, 2.5;
  const Eigen::MatrixXd X = u * v.transpose();
  const auto r = nmf(X, 1, 500, 9);
  EXPECT_LE((X - r.W * r.H).norm() / X.norm(), 1e-6);
}

TEST(Nmf, RejectsBadInput) {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(nmf(X, 0, 10, 1), ValidationError);
  X(1, 1) = -1.0;
  EXPECT_THROW(nmf(X, 2, 10, 1), ValidationError);
  EXPECT_THROW(nmf(Eigen::MatrixXd(), 1, 10, 1), ValidationError);
}

std::vector<Claim> two_vocabulary_claims() {
  const std::vector<std::string> a = {"vaccine", "dose", "clinic", "virus", "immune"};
  const std::vector<std::string> b = {"ballot", "voter", "senate", "poll", "campaign"};
  std::vector<Claim> claims;
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const auto& words = i % 2 == 0 ? a : b;
    std::string text;
    for (int w = 0; w < 6; ++w) text += words[rng.bounded(words.size())] + " ";
    claims.push_back({"c" + std::to_string(i + 1), text, Label::kTrue, DatasetKind::kPandora});
  }
  return claims;
}

TEST(NmfTopics, SeparatesDisjointVocabularies) {
  const auto claims = two_vocabulary_claims();
  NmfOptions o;
  o.k = 2;
  o.iterations = 300;
  o.seed = 3;
  const auto m = nmf_topics(claims, o);
  ASSERT_EQ(m.assignment.size(), claims.size());
  // Purity: every topic holds claims from a single vocabulary.
  std::map<int, std::set<int>> sources;
  for (std::size_t i = 0; i < claims.size(); ++i) sources[m.assignment[i]].insert(int(i % 2));
  EXPECT_EQ(sources.size(), 2u);
  for (const auto& [topic, s] : sources) EXPECT_EQ(s.size(), 1u) << "topic " << topic;
  EXPECT_EQ(m.topic_of("c1"), m.assignment[0]);
  EXPECT_FALSE(m.topic_of("nope").has_value());
  const auto terms = m.top_terms(m.assignment[0], 5);
  EXPECT_EQ(std::set<std::string>(terms.begin(), terms.end()),
            (std::set<std::string>{"vaccine", "dose", "clinic", "virus", "immune"}));
}

TEST(NmfTopics, RejectsMoreTopicsThanClaims) {
  const auto claims = two_vocabulary_claims();
  NmfOptions o;
  o.k = 21;
  EXPECT_THROW(nmf_topics(claims, o), ValidationError);
  std::vector<Claim> blank = {{"c1", "a b", Label::kTrue, DatasetKind::kPandora}};
  o.k = 1;
  EXPECT_THROW(nmf_topics(blank, o), ValidationError);
}

TEST(TopicGaps, MatchBruteForce) {
  const auto syn = testing::synthetic_cohort({30, 10, 6, true, 12});
  const Cohort cohort = testing::parse_cohort(syn.csv);
  NmfOptions o;
  o.k = 3;
  o.seed = 2;
  const auto model = nmf_topics(cohort.claims(), o);

  // Unannotated records count for every axis; the first 20 carry the gender
  // axis explicitly with the participant's own group.
  std::vector<PredictionRecord> records;
  Rng rng(5);
  for (const auto& row : syn.rows) {
    const ClaimJudgment* j = cohort.find_judgment(row.pid, row.claim_id);
    if (j == nullptr || j->held_out) continue;
    PredictionRecord r;
    r.pid = row.pid;
    r.claim_id = row.claim_id;
    const double u = rng.uniform();
    r.predicted_label = u < 0.45 ? Verdict::kTrue : u < 0.9 ? Verdict::kFake : Verdict::kUnparseable;
    if (records.size() < 20) {
      r.axis = Axis::kGender;
      r.group = parse_group(row.gender);
    }
    records.push_back(r);
  }

  std::map<std::tuple<int, Axis, int>, std::pair<double, double>> cells;
  for (const auto& r : records) {
    const auto pred = verdict_label(r.predicted_label);
    if (!pred) continue;
    const int topic = *model.topic_of(r.claim_id);
    const Label choice = cohort.find_judgment(r.pid, r.claim_id)->participant_choice;
    const Participant* p = cohort.find_participant(r.pid);
    for (Axis axis : kAllAxes) {
      if (r.axis && *r.axis != axis) continue;
      const Group g = r.group && r.axis == axis ? *r.group : *p->group(axis);
      const int side = g == groups_of(axis)[0] ? 0 : 1;
      auto& c = cells[{topic, axis, side}];
      c.first += 1;
      c.second += *pred == choice;
    }
  }
  const auto gaps = topic_demographic_gaps(model, records, cohort, 5);
  ASSERT_EQ(gaps.size(), 3u * 4u);
  for (const auto& g : gaps) {
    const auto a = cells[{g.topic, g.axis, 0}];
    const auto b = cells[{g.topic, g.axis, 1}];
    EXPECT_EQ(g.n_first, std::size_t(a.first));
    EXPECT_EQ(g.n_second, std::size_t(b.first));
    if (a.first > 0 && b.first > 0) {
      EXPECT_NEAR(g.gap_ppts, 100.0 * (a.second / a.first - b.second / b.first), 1e-12);
    } else {
      EXPECT_EQ(g.gap_ppts, 0.0);
    }
    EXPECT_EQ(g.low_support, a.first < 5 || b.first < 5);
  }
}

}  // namespace
}  // namespace credence
