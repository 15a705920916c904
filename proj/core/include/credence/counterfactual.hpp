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

#include "credence/cohort.hpp"
#include "credence/model_gateway.hpp"
#include "credence/prompt_forge.hpp"
#include "credence/sim_runner.hpp"

namespace credence {

enum class Panel { kUtility, kShortcut, kComplementarity };

std::string_view panel_name(Panel panel);
std::optional<Panel> parse_panel(std::string_view name);

// Two predictions for the same (participant, claim) under a controlled
// change: a group swap, or a condition change for complementarity.
struct SwapPair {
  std::string pid;
  std::string claim_id;
  Axis axis = Axis::kGender;
  PersonaPrompt base_prompt;
  PersonaPrompt swapped_prompt;
  PredictionRecord base;
  PredictionRecord swapped;
  bool flipped = false;
};

struct PanelResult {
  Panel panel = Panel::kUtility;
  Axis axis = Axis::kGender;
  std::string model_name;
  std::string condition_label;
  bool empty = true;       // no parseable pairs, or empty balanced slice
  double flip_rate = 0.0;  // percentage over parseable pairs
  std::optional<double> accuracy_delta;  // complementarity only
  std::size_t n_pairs = 0;
  std::size_t n_excluded = 0;  // unparseable on either side
  std::vector<SwapPair> pairs;
  std::vector<SweepFailure> failures;
  std::vector<std::string> notes;
};

struct PanelOptions {
  std::uint64_t seed = 0;
  double temperature = 0.0;
  double epsilon = 0.05;
  std::size_t min_n = 3;
  double dropout = 0.7;
  // Shortcut mode: also swap the group-imputed belief block. Only matters
  // for conditions that carry imputed beliefs.
  bool swap_beliefs = false;
  int workers = 0;
};

// The persona phrase alone, with no beliefs.
ConditionSpec demo_only_condition();

// Group swap on every (participant, evaluation claim) with a group on the
// axis. Throws ValidationError when the axis is unavailable or the
// condition has no demographics.
PanelResult utility_panel(const Cohort& cohort, const PromptForge& forge,
                          Axis axis, Gateway& gateway,
                          const ConditionSpec& condition = demo_only_condition(),
                          const PanelOptions& options = {});

// Claims whose P(choice = true) differs by at most epsilon between the two
// groups of the axis, among claims with at least min_n judgments per group.
// Natural claim order.
std::vector<std::string> build_balanced_slice(const Cohort& cohort, Axis axis,
                                              double epsilon = 0.05,
                                              std::size_t min_n = 3);

// Utility-style swap restricted to the balanced slice. An empty slice gives
// an empty result.
PanelResult shortcut_panel(const Cohort& cohort, const PromptForge& forge,
                           Axis axis, Gateway& gateway,
                           const ConditionSpec& condition = demo_only_condition(),
                           const PanelOptions& options = {});

// Imputed beliefs under dropout, with and without the persona phrase. The
// flip is the change between the two conditions; accuracy_delta is
// acc(with demographics) - acc(beliefs only) over the parseable pairs.
PanelResult complementarity_panel(const Cohort& cohort,
                                  const PromptForge& forge, Axis axis,
                                  Gateway& gateway,
                                  const PanelOptions& options = {});

// The two conditions complementarity_panel compares.
std::pair<ConditionSpec, ConditionSpec> complementarity_conditions(
    double dropout, std::uint64_t seed);

// Fills n_pairs, n_excluded, flip_rate and empty from the pairs.
void summarize_pairs(PanelResult& result);

inline const std::vector<std::string>& default_demographic_keywords() {
  static const std::vector<std::string> kWords = {
      "female", "male",  "woman",  "man",   "women",     "men",
      "gender", "age",   "young",  "younger", "old",     "older",
      "rural",  "urban", "city",   "educated", "education", "degree"};
  return kWords;
}

// Keywords appearing as whole words (case-insensitive) in a raw reply.
std::vector<std::string> flag_keywords(
    std::string_view text,
    std::span<const std::string> keywords = default_demographic_keywords());

}  // namespace credence
