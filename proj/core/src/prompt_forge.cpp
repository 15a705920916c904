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

#include <cmath>

#include "credence/error.hpp"
#include "credence/hash.hpp"
#include "credence/rng.hpp"
#include "credence/text.hpp"

namespace credence {

std::string_view belief_source_name(BeliefSource source) {
  switch (source) {
    case BeliefSource::kNone: return "none";
    case BeliefSource::kImputed: return "imputed";
    case BeliefSource::kObserved: return "observed";
    case BeliefSource::kImputedPlusObserved: return "imputed+observed";
  }
  return "?";
}

std::optional<BeliefSource> parse_belief_source(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "none") return BeliefSource::kNone;
  if (n == "imputed") return BeliefSource::kImputed;
  if (n == "observed") return BeliefSource::kObserved;
  if (n == "imputed+observed" || n == "imputedplusobserved")
    return BeliefSource::kImputedPlusObserved;
  return std::nullopt;
}

std::string_view belief_encoding_name(BeliefEncoding encoding) {
  return encoding == BeliefEncoding::kModal ? "modal" : "distribution";
}

std::optional<BeliefEncoding> parse_belief_encoding(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "modal") return BeliefEncoding::kModal;
  if (n == "distribution") return BeliefEncoding::kDistribution;
  return std::nullopt;
}

std::string DimensionSet::to_string() const {
  if (is_all()) return "All";
  std::string out;
  for (BeliefDimension d : kAllDimensions) {
    if (!contains(d)) continue;
    if (!out.empty()) out += '|';
    out += dimension_name(d);
  }
  return out;
}

std::optional<DimensionSet> DimensionSet::parse(std::string_view text) {
  const std::string t = trim(text);
  if (to_lower(t) == "all") return all();
  std::uint8_t mask = 0;
  std::size_t start = 0;
  while (start <= t.size()) {
    std::size_t end = t.find('|', start);
    if (end == std::string::npos) end = t.size();
    auto d = parse_dimension(t.substr(start, end - start));
    if (!d) return std::nullopt;
    mask |= static_cast<std::uint8_t>(1u << dimension_index(*d));
    start = end + 1;
  }
  return from_mask(mask);
}

void ConditionSpec::validate() const {
  if (!(dropout_fraction >= 0.0 && dropout_fraction <= 1.0)) {
    throw ValidationError("dropout_fraction must lie in [0, 1]");
  }
  if (dropout_fraction > 0.0 && !uses_imputed(belief_source)) {
    throw ValidationError(
        "belief dropout is only valid with imputed belief sources");
  }
  if (uses_imputed(belief_source) && dimensions.empty()) {
    throw ValidationError("imputed condition selects no belief dimensions");
  }
}

std::string ConditionSpec::canonical() const {
  const bool imputed = uses_imputed(belief_source);
  std::string s = "demo=";
  s += use_demographics ? "1" : "0";
  s += ";source=";
  s += belief_source_name(belief_source);
  s += ";dims=";
  s += imputed ? dimensions.to_string() : "-";
  s += ";enc=";
  s += imputed ? std::string(belief_encoding_name(belief_encoding)) : "-";
  s += ";dropout=";
  s += format_fixed(dropout_fraction, 6);
  s += ";seed=";
  s += std::to_string(seed);
  return s;
}

std::string ConditionSpec::fingerprint() const {
  return sha256_hex(canonical());
}

std::string ConditionSpec::label() const {
  if (is_zero_shot()) return "zero-shot";
  if (belief_source == BeliefSource::kNone) return "demo-only";
  std::string s(belief_source_name(belief_source));
  if (uses_imputed(belief_source) && !dimensions.is_all()) {
    s += "[" + dimensions.to_string() + "]";
  }
  if (use_demographics) s += "+demo";
  if (uses_imputed(belief_source) &&
      belief_encoding == BeliefEncoding::kDistribution) {
    s += "/dist";
  }
  if (dropout_fraction > 0.0) s += "/drop" + format_fixed(dropout_fraction, 2);
  return s;
}

std::string verdict_user_text(const Claim& claim) {
  return std::string(kVerdictInstruction) + claim.text;
}

std::vector<std::string> apply_belief_dropout(std::span<const std::string> qids,
                                              double fraction,
                                              std::uint64_t seed) {
  const double f = std::clamp(fraction, 0.0, 1.0);
  const auto n = qids.size();
  const auto keep = static_cast<std::size_t>(
      std::lround((1.0 - f) * static_cast<double>(n)));
  if (keep >= n) return {qids.begin(), qids.end()};
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> kept(n, false);
  for (std::size_t i = 0; i < keep; ++i) kept[order[i]] = true;
  std::vector<std::string> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < n; ++i)
    if (kept[i]) out.push_back(qids[i]);
  return out;
}

std::vector<const SurveyQuestion*> PromptForge::belief_questions(
    const ConditionSpec& condition) const {
  std::vector<std::string> qids;
  for (const SurveyQuestion* q : beliefs_.questions()) {
    if (condition.dimensions.contains(q->dimension)) qids.push_back(q->qid);
  }
  if (condition.dropout_fraction > 0.0) {
    qids = apply_belief_dropout(qids, condition.dropout_fraction,
                                condition.seed);
  }
  std::vector<const SurveyQuestion*> out;
  out.reserve(qids.size());
  for (const auto& id : qids) out.push_back(&beliefs_.question(id));
  return out;
}

std::string PromptForge::imputed_block(const ConditionSpec& condition,
                                       Group group) const {
  std::string block;
  for (const SurveyQuestion* q : belief_questions(condition)) {
    const ResponseDistribution* dist =
        beliefs_.find_distribution(q->qid, group);
    if (!dist) continue;
    if (!block.empty()) block += "; ";
    block += q->text;
    block += ": ";
    if (condition.belief_encoding == BeliefEncoding::kModal) {
      block += "modal answer " + std::to_string(modal_response(*dist)) +
               " of " + std::to_string(q->scale_size);
    } else {
      block += '[';
      for (std::size_t i = 0; i < dist->probs.size(); ++i) {
        if (i) block += ',';
        block += format_fixed(dist->probs[i], kDistributionDecimals);
      }
      block += ']';
    }
  }
  return block;
}

std::string PromptForge::observed_block(const Participant& participant) const {
  std::string block;
  for (const auto& ob : participant.observed_beliefs) {
    const Claim* c = cohort_.find_claim(ob.claim_id);
    if (!c) {
      throw ValidationError("observed belief references unknown claim " +
                            ob.claim_id);
    }
    if (!block.empty()) block += "; ";
    block += "judged the claim \"" + c->text + "\" as " +
             std::string(label_name(ob.judged_label));
  }
  return block;
}

PersonaPrompt PromptForge::render_as(const Participant& participant,
                                     const Claim& claim,
                                     const ConditionSpec& condition,
                                     std::optional<Group> phrase_group,
                                     std::optional<Group> belief_group) const {
  condition.validate();
  PersonaPrompt prompt;
  prompt.condition = condition;
  prompt.participant_ref = participant.pid;
  prompt.claim_ref = claim.claim_id;
  prompt.user_text = verdict_user_text(claim);
  prompt.persona_group = condition.use_demographics ? phrase_group
                                                    : belief_group;
  if (condition.is_zero_shot()) return prompt;

  if (condition.use_demographics && !phrase_group) {
    throw ValidationError("condition " + condition.label() +
                          " needs a demographic group for participant " +
                          participant.pid);
  }
  if (uses_imputed(condition.belief_source) && !belief_group) {
    throw ValidationError("condition " + condition.label() +
                          " needs a demographic group for imputed beliefs");
  }
  if (uses_observed(condition.belief_source) &&
      participant.observed_beliefs.empty()) {
    throw ValidationError("participant " + participant.pid +
                          " has no observed beliefs for condition " +
                          condition.label());
  }

  std::string beliefs;
  if (uses_imputed(condition.belief_source)) {
    beliefs = imputed_block(condition, *belief_group);
  }
  if (uses_observed(condition.belief_source)) {
    if (!beliefs.empty()) beliefs += "; ";
    beliefs += observed_block(participant);
  }

  std::string sys;
  if (condition.use_demographics) {
    sys = std::string(kPersonaLead) +
          std::string(persona_phrase(*phrase_group)) + ".";
  }
  if (condition.belief_source != BeliefSource::kNone) {
    if (!sys.empty()) sys += "  ";
    sys += std::string(kBeliefLead) + (beliefs.empty() ? "none" : beliefs) +
           ". " + std::string(kBeliefClosing);
  }
  prompt.system_text = std::move(sys);
  return prompt;
}

PersonaPrompt PromptForge::render(const Participant& participant,
                                  const Claim& claim,
                                  const ConditionSpec& condition,
                                  std::optional<Axis> axis) const {
  std::optional<Group> group;
  if (condition.needs_persona_group()) {
    if (!axis) {
      throw ValidationError("condition " + condition.label() +
                            " requires a demographic axis");
    }
    if (!cohort_.axis_available(*axis)) {
      throw ValidationError("axis " + std::string(axis_name(*axis)) +
                            " is absent from dataset " +
                            std::string(dataset_name(cohort_.kind())));
    }
    group = participant.group(*axis);
    if (!group) {
      throw ValidationError("participant " + participant.pid +
                            " has no annotation on axis " +
                            std::string(axis_name(*axis)));
    }
  }
  return render_as(participant, claim, condition, group, group);
}

PersonaPrompt render_prompt(const Participant& participant, const Claim& claim,
                            const ConditionSpec& condition,
                            const BeliefStore& beliefs, const Cohort& cohort,
                            std::optional<Axis> axis) {
  return PromptForge(beliefs, cohort).render(participant, claim, condition,
                                             axis);
}

std::vector<Setting> primary_settings(std::uint64_t seed) {
  auto make = [seed](bool demo, BeliefSource src) {
    ConditionSpec c;
    c.use_demographics = demo;
    c.belief_source = src;
    c.seed = seed;
    return c;
  };
  std::vector<Setting> out;
  out.push_back({"zero-shot", make(false, BeliefSource::kNone), false, false});
  out.push_back({"demo-only", make(true, BeliefSource::kNone), false, false});
  struct Src {
    const char* name;
    BeliefSource source;
    bool has_best;
  };
  for (const Src& s : {Src{"imputed", BeliefSource::kImputed, true},
                       Src{"observed", BeliefSource::kObserved, false},
                       Src{"imputed+observed",
                           BeliefSource::kImputedPlusObserved, true}}) {
    for (bool demo : {false, true}) {
      const std::string suffix = demo ? "+demo" : "";
      out.push_back({s.name + suffix, make(demo, s.source), false, false});
      if (s.has_best) {
        out.push_back({std::string(s.name) + "-best" + suffix,
                       make(demo, s.source), true, false});
      }
    }
  }
  return out;
}

std::vector<Setting> enumerate_conditions(std::uint64_t seed) {
  std::vector<Setting> out = primary_settings(seed);
  const std::size_t primary = out.size();
  for (std::size_t i = 0; i < primary; ++i) {
    if (!uses_imputed(out[i].condition.belief_source)) continue;
    Setting twin = out[i];
    twin.name += "/dist";
    twin.condition.belief_encoding = BeliefEncoding::kDistribution;
    twin.appendix_variant = true;
    out.push_back(std::move(twin));
  }
  return out;
}

std::optional<Setting> find_setting(std::string_view name,
                                    std::uint64_t seed) {
  for (auto& s : enumerate_conditions(seed)) {
    if (s.name == name) return s;
  }
  return std::nullopt;
}

std::vector<ConditionSpec> expand_setting(const Setting& setting) {
  if (!setting.best_dimension) return {setting.condition};
  std::vector<ConditionSpec> out;
  for (BeliefDimension d : kAllDimensions) {
    ConditionSpec c = setting.condition;
    c.dimensions = DimensionSet::only(d);
    out.push_back(c);
  }
  return out;
}

}  // namespace credence
