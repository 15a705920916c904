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

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace credence {

enum class Axis { kGender, kAge, kEducation, kLivingArea };

inline constexpr std::array<Axis, 4> kAllAxes = {
    Axis::kGender, Axis::kAge, Axis::kEducation, Axis::kLivingArea};

// Two groups per axis. The first listed group of an axis is its "first"
// group for signed gaps.
enum class Group {
  kFemale,
  kMale,
  kYounger,  // age <= 35
  kOlder,    // age >= 60
  kCompletedHs,
  kNotCompletedHs,
  kRural,
  kUrban,
};

struct DemographicProfile {
  Axis axis;
  Group group;

  friend bool operator==(const DemographicProfile&,
                         const DemographicProfile&) = default;
  friend auto operator<=>(const DemographicProfile&,
                          const DemographicProfile&) = default;
};

std::string_view axis_name(Axis axis);
std::optional<Axis> parse_axis(std::string_view name);

std::string_view group_name(Group group);
std::optional<Group> parse_group(std::string_view name);

Axis axis_of(Group group);
std::array<Group, 2> groups_of(Axis axis);
Group other_group(Group group);

// Throws ValidationError when the group does not belong to the axis.
DemographicProfile make_profile(Axis axis, Group group);

// Phrase substituted for the persona attribute slot in prompts.
std::string_view persona_phrase(Group group);

// Binary verdict vocabulary shared by claims, judgments and predictions.
enum class Label { kTrue, kFake };

std::string_view label_name(Label label);
std::optional<Label> parse_label(std::string_view name);

// Accepts the canonical names plus ingestion aliases (real/false/...).
std::optional<Label> normalize_label_alias(std::string_view raw);

}  // namespace credence
