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

#include "credence/prompt_forge.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "credence/error.hpp"
#include "credence/text.hpp"
#include "synthetic.hpp"

namespace credence {
namespace {

class PromptForgeTest : public ::testing::Test {
 protected:
  PromptForgeTest()
      : store_(testing::synthetic_store(7, 3)),
        cohort_(testing::parse_cohort(
            testing::synthetic_cohort({12, 8, 5, true, 3}).csv)),
        forge_(store_, cohort_) {}

  const Participant& participant() const { return cohort_.participants()[0]; }
  const Claim& claim() const {
    return *cohort_.find_claim(participant().evaluation_claims[0]);
  }

  BeliefStore store_;
  Cohort cohort_;
  PromptForge forge_;
};

ConditionSpec make(bool demo, BeliefSource src) {
  ConditionSpec c;
  c.use_demographics = demo;
  c.belief_source = src;
  return c;
}

std::string replace_all(std::string s, const std::string& from,
                        const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos;
       pos += to.size()) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

TEST_F(PromptForgeTest, ZeroShotHasNoSystemText) {
  const auto p = forge_.render(participant(), claim(), ConditionSpec{}, std::nullopt);
  EXPECT_TRUE(p.system_text.empty());
  EXPECT_EQ(p.user_text, std::string(kVerdictInstruction) + claim().text);
  EXPECT_FALSE(p.persona_group.has_value());
}

TEST_F(PromptForgeTest, DemoSwapChangesOnlyThePersonaPhrase) {
  const auto c = make(true, BeliefSource::kNone);
  for (Axis axis : kAllAxes) {
    const auto [g1, g2] = groups_of(axis);
    const auto a = forge_.render_as(participant(), claim(), c, g1, std::nullopt);
    const auto b = forge_.render_as(participant(), claim(), c, g2, std::nullopt);
    EXPECT_EQ(a.user_text, b.user_text);
    EXPECT_NE(a.system_text, b.system_text);
    EXPECT_EQ(a.system_text,
              std::string(kPersonaLead) + std::string(persona_phrase(g1)) + ".");
    EXPECT_EQ(replace_all(a.system_text, std::string(persona_phrase(g1)),
                          std::string(persona_phrase(g2))),
              b.system_text);
  }
}

TEST_F(PromptForgeTest, PhraseOnlySwapKeepsImputedBlock) {
  const auto c = make(true, BeliefSource::kImputed);
  const auto a = forge_.render_as(participant(), claim(), c, Group::kFemale,
                                  Group::kFemale);
  const auto b = forge_.render_as(participant(), claim(), c, Group::kMale,
                                  Group::kFemale);
  const std::string lead_a =
      std::string(kPersonaLead) + std::string(persona_phrase(Group::kFemale)) + ".";
  const std::string lead_b =
      std::string(kPersonaLead) + std::string(persona_phrase(Group::kMale)) + ".";
  ASSERT_EQ(a.system_text.rfind(lead_a, 0), 0u);
  ASSERT_EQ(b.system_text.rfind(lead_b, 0), 0u);
  EXPECT_EQ(a.system_text.substr(lead_a.size()), b.system_text.substr(lead_b.size()));
}

TEST_F(PromptForgeTest, ImputedModalBlockListsEveryQuestion) {
  const auto c = make(false, BeliefSource::kImputed);
  const auto p = forge_.render_as(participant(), claim(), c, std::nullopt,
                                  Group::kOlder);
  for (const auto* q : store_.questions()) {
    const auto* d = store_.find_distribution(q->qid, Group::kOlder);
    const std::string item = q->text + ": modal answer " +
                             std::to_string(modal_response(*d)) + " of " +
                             std::to_string(q->scale_size);
    EXPECT_NE(p.system_text.find(item), std::string::npos) << q->qid;
  }
  EXPECT_EQ(p.system_text.find(kPersonaLead), std::string::npos);
  EXPECT_NE(p.system_text.find(kBeliefClosing), std::string::npos);
}

TEST_F(PromptForgeTest, DistributionEncodingUsesThreeDecimals) {
  auto c = make(false, BeliefSource::kImputed);
  c.belief_encoding = BeliefEncoding::kDistribution;
  c.dimensions = DimensionSet::only(BeliefDimension::kHeuristics);
  const auto p = forge_.render_as(participant(), claim(), c, std::nullopt,
                                  Group::kRural);
  const auto qs = store_.questions_in(BeliefDimension::kHeuristics);
  ASSERT_FALSE(qs.empty());
  for (const auto* q : qs) {
    std::string vec = "[";
    const auto* d = store_.find_distribution(q->qid, Group::kRural);
    for (std::size_t i = 0; i < d->probs.size(); ++i) {
      if (i) vec += ',';
      vec += format_fixed(d->probs[i], 3);
    }
    vec += "]";
    EXPECT_NE(p.system_text.find(q->text + ": " + vec), std::string::npos);
  }
  for (const auto* q : store_.questions_in(BeliefDimension::kEpistemicTrust))
    EXPECT_EQ(p.system_text.find(q->text), std::string::npos);
}

TEST_F(PromptForgeTest, ObservedBlockQuotesHeldOutJudgments) {
  const auto c = make(false, BeliefSource::kObserved);
  const auto p = forge_.render(participant(), claim(), c, std::nullopt);
  for (const auto& ob : participant().observed_beliefs) {
    const auto* cl = cohort_.find_claim(ob.claim_id);
    EXPECT_NE(p.system_text.find("judged the claim \"" + cl->text + "\" as " +
                                 std::string(label_name(ob.judged_label))),
              std::string::npos);
  }
  // Evaluation claims never leak into the context.
  for (const auto& id : participant().evaluation_claims)
    EXPECT_EQ(p.system_text.find(cohort_.find_claim(id)->text), std::string::npos);
}

TEST_F(PromptForgeTest, RenderRequiresAxisForPersonaConditions) {
  const auto c = make(true, BeliefSource::kNone);
  EXPECT_THROW(forge_.render(participant(), claim(), c, std::nullopt), ValidationError);
  const auto p = forge_.render(participant(), claim(), c, Axis::kEducation);
  EXPECT_EQ(p.persona_group, participant().group(Axis::kEducation));
}

TEST(BeliefDropout, KeepsRoundedShareInOrder) {
  std::vector<std::string> ids;
  for (int i = 1; i <= 120; ++i) ids.push_back("q" + std::to_string(i));
  const auto kept = apply_belief_dropout(ids, 0.7, 5);
  EXPECT_EQ(kept.size(), 36u);
  EXPECT_TRUE(std::is_sorted(kept.begin(), kept.end(), NaturalLess{}));
  std::set<std::string> all(ids.begin(), ids.end());
  for (const auto& k : kept) EXPECT_TRUE(all.count(k));
  EXPECT_EQ(kept, apply_belief_dropout(ids, 0.7, 5));
  EXPECT_NE(kept, apply_belief_dropout(ids, 0.7, 6));
  EXPECT_EQ(apply_belief_dropout(ids, 0.0, 5), ids);
  EXPECT_TRUE(apply_belief_dropout(ids, 1.0, 5).empty());
}

TEST(ConditionSpec, ValidationAndFingerprints) {
  ConditionSpec c;
  c.dropout_fraction = 0.5;
  EXPECT_THROW(c.validate(), ValidationError);
  c.belief_source = BeliefSource::kImputed;
  EXPECT_NO_THROW(c.validate());
  c.dimensions = DimensionSet::from_mask(0);
  EXPECT_THROW(c.validate(), ValidationError);

  // Fields the prompt ignores do not change the fingerprint.
  ConditionSpec a = make(true, BeliefSource::kObserved), b = a;
  b.dimensions = DimensionSet::only(BeliefDimension::kHeuristics);
  b.belief_encoding = BeliefEncoding::kDistribution;
  EXPECT_EQ(a.fingerprint(), b.fingerprint());
  ConditionSpec d = make(true, BeliefSource::kImputed), e = d;
  e.dimensions = DimensionSet::only(BeliefDimension::kHeuristics);
  EXPECT_NE(d.fingerprint(), e.fingerprint());
  EXPECT_EQ(e.label(), "imputed[Heuristics]+demo");
}

TEST(DimensionSet, ParseRoundTrip) {
  for (std::uint8_t m = 1; m < 0x80; ++m) {
    const auto s = DimensionSet::from_mask(m);
    EXPECT_EQ(DimensionSet::parse(s.to_string()), s);
  }
  EXPECT_FALSE(DimensionSet::parse("Nope").has_value());
}

TEST(Settings, PrimaryAndAppendixEnumeration) {
  const auto primary = primary_settings();
  EXPECT_EQ(primary.size(), 12u);
  std::set<std::string> names;
  for (const auto& s : primary) names.insert(s.name);
  EXPECT_EQ(names.size(), 12u);
  for (const char* n : {"zero-shot", "demo-only", "imputed", "imputed-best",
                        "imputed+demo", "imputed-best+demo", "observed",
                        "observed+demo", "imputed+observed",
                        "imputed+observed-best", "imputed+observed+demo",
                        "imputed+observed-best+demo"}) {
    EXPECT_TRUE(names.count(n)) << n;
  }
  const auto all = enumerate_conditions();
  EXPECT_EQ(all.size(), 20u);
  for (std::size_t i = 12; i < all.size(); ++i) {
    EXPECT_TRUE(all[i].appendix_variant);
    EXPECT_EQ(all[i].condition.belief_encoding, BeliefEncoding::kDistribution);
  }
  const auto best = find_setting("imputed-best");
  ASSERT_TRUE(best.has_value());
  const auto expanded = expand_setting(*best);
  ASSERT_EQ(expanded.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i)
    EXPECT_EQ(expanded[i].dimensions, DimensionSet::only(kAllDimensions[i]));
  EXPECT_FALSE(find_setting("nonsense").has_value());
}

}  // namespace
}  // namespace credence
