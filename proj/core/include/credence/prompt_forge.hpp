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

#include "credence/belief_store.hpp"
#include "credence/cohort.hpp"

namespace credence {

enum class BeliefSource { kNone, kImputed, kObserved, kImputedPlusObserved };
enum class BeliefEncoding { kModal, kDistribution };

std::string_view belief_source_name(BeliefSource source);
std::optional<BeliefSource> parse_belief_source(std::string_view name);
std::string_view belief_encoding_name(BeliefEncoding encoding);
std::optional<BeliefEncoding> parse_belief_encoding(std::string_view name);

inline bool uses_imputed(BeliefSource s) {
  return s == BeliefSource::kImputed || s == BeliefSource::kImputedPlusObserved;
}
inline bool uses_observed(BeliefSource s) {
  return s == BeliefSource::kObserved ||
         s == BeliefSource::kImputedPlusObserved;
}

// Subset of the seven belief dimensions.
class DimensionSet {
 public:
  static DimensionSet all() { return DimensionSet(0x7f); }
  static DimensionSet only(BeliefDimension d) {
    return DimensionSet(static_cast<std::uint8_t>(1u << dimension_index(d)));
  }
  static DimensionSet from_mask(std::uint8_t mask) {
    return DimensionSet(mask & 0x7f);
  }

  bool contains(BeliefDimension d) const {
    return (mask_ >> dimension_index(d)) & 1u;
  }
  bool is_all() const { return mask_ == 0x7f; }
  bool empty() const { return mask_ == 0; }
  std::uint8_t mask() const { return mask_; }
  // "All" or '|'-joined dimension identifiers.
  std::string to_string() const;
  static std::optional<DimensionSet> parse(std::string_view text);

  friend bool operator==(DimensionSet, DimensionSet) = default;

 private:
  explicit DimensionSet(std::uint8_t mask) : mask_(mask) {}
  std::uint8_t mask_;
};

struct ConditionSpec {
  bool use_demographics = false;
  BeliefSource belief_source = BeliefSource::kNone;
  DimensionSet dimensions = DimensionSet::all();  // ignored without beliefs
  BeliefEncoding belief_encoding = BeliefEncoding::kModal;
  double dropout_fraction = 0.0;
  std::uint64_t seed = 0;

  // Throws ValidationError on an illegal combination.
  void validate() const;
  bool is_zero_shot() const {
    return !use_demographics && belief_source == BeliefSource::kNone;
  }
  bool needs_persona_group() const {
    return use_demographics || uses_imputed(belief_source);
  }
  // Stable text form; fields irrelevant to the prompt are normalized.
  std::string canonical() const;
  // SHA-256 hex of canonical().
  std::string fingerprint() const;
  // Short human-readable tag, e.g. "imputed[EmotionRelated]+demo".
  std::string label() const;

  friend bool operator==(const ConditionSpec&, const ConditionSpec&) = default;
};

struct PersonaPrompt {
  std::string system_text;
  std::string user_text;
  ConditionSpec condition;
  std::string participant_ref;
  std::string claim_ref;
  std::optional<Group> persona_group;  // group named in <d> / imputed block
};

inline constexpr std::string_view kVerdictInstruction =
    "Is the following claim true or fake? Answer with exactly one word: "
    "true or fake. Claim: ";
inline constexpr std::string_view kPersonaLead =
    "You are a persona grounded by attributes: ";
inline constexpr std::string_view kBeliefLead =
    "Past beliefs and priors for this persona (for context, do not "
    "re-evaluate them): ";
inline constexpr std::string_view kBeliefClosing =
    "When judging a claim, stay consistent with this persona's prior beliefs "
    "where reasonable.";
inline constexpr int kDistributionDecimals = 3;

std::string verdict_user_text(const Claim& claim);

// Keeps round((1 - fraction) * N) items chosen by a seeded Fisher-Yates
// shuffle, returned in their input order.
std::vector<std::string> apply_belief_dropout(std::span<const std::string> qids,
                                              double fraction,
                                              std::uint64_t seed);

class PromptForge {
 public:
  PromptForge(const BeliefStore& beliefs, const Cohort& cohort)
      : beliefs_(beliefs), cohort_(cohort) {}

  // Persona group comes from the participant's annotation on `axis`.
  PersonaPrompt render(const Participant& participant, const Claim& claim,
                       const ConditionSpec& condition,
                       std::optional<Axis> axis) const;

  // Explicit groups for the <d> phrase and the imputed block. Used for
  // counterfactual swaps.
  PersonaPrompt render_as(const Participant& participant, const Claim& claim,
                          const ConditionSpec& condition,
                          std::optional<Group> phrase_group,
                          std::optional<Group> belief_group) const;

  // Questions entering the imputed block, qid-ordered, after dimension
  // filtering and dropout.
  std::vector<const SurveyQuestion*> belief_questions(
      const ConditionSpec& condition) const;

 private:
  std::string imputed_block(const ConditionSpec& condition, Group group) const;
  std::string observed_block(const Participant& participant) const;

  const BeliefStore& beliefs_;
  const Cohort& cohort_;
};

// Free-function form of PromptForge::render.
PersonaPrompt render_prompt(const Participant& participant, const Claim& claim,
                            const ConditionSpec& condition,
                            const BeliefStore& beliefs, const Cohort& cohort,
                            std::optional<Axis> axis);

struct Setting {
  std::string name;
  ConditionSpec condition;
  bool best_dimension = false;    // expands to one run per dimension
  bool appendix_variant = false;  // distribution-encoded twin
};

// The 12 primary settings followed by distribution-encoded twins of every
// imputed setting.
std::vector<Setting> enumerate_conditions(std::uint64_t seed = 0);
std::vector<Setting> primary_settings(std::uint64_t seed = 0);
std::optional<Setting> find_setting(std::string_view name,
                                    std::uint64_t seed = 0);

// Concrete conditions a setting runs: seven single-dimension conditions
// for best-dimension settings, otherwise the setting's own condition.
std::vector<ConditionSpec> expand_setting(const Setting& setting);

}  // namespace credence
