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

#include "credence/demographics.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "credence/error.hpp"

namespace credence {
namespace {

std::string lower_trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view axis_name(Axis axis) {
  switch (axis) {
    case Axis::kGender: return "gender";
    case Axis::kAge: return "age";
    case Axis::kEducation: return "education";
    case Axis::kLivingArea: return "living_area";
  }
  return "?";
}

std::optional<Axis> parse_axis(std::string_view name) {
  const std::string n = lower_trim(name);
  if (n == "gender") return Axis::kGender;
  if (n == "age") return Axis::kAge;
  if (n == "education") return Axis::kEducation;
  if (n == "living_area" || n == "livingarea" || n == "rural_urban")
    return Axis::kLivingArea;
  return std::nullopt;
}

std::string_view group_name(Group group) {
  switch (group) {
    case Group::kFemale: return "female";
    case Group::kMale: return "male";
    case Group::kYounger: return "younger";
    case Group::kOlder: return "older";
    case Group::kCompletedHs: return "completed_hs";
    case Group::kNotCompletedHs: return "not_completed_hs";
    case Group::kRural: return "rural";
    case Group::kUrban: return "urban";
  }
  return "?";
}

std::optional<Group> parse_group(std::string_view name) {
  const std::string n = lower_trim(name);
  if (n == "female" || n == "f" || n == "woman") return Group::kFemale;
  if (n == "male" || n == "m" || n == "man") return Group::kMale;
  if (n == "younger" || n == "young") return Group::kYounger;
  if (n == "older" || n == "old") return Group::kOlder;
  if (n == "completed_hs" || n == "hs_completed") return Group::kCompletedHs;
  if (n == "not_completed_hs" || n == "no_hs") return Group::kNotCompletedHs;
  if (n == "rural") return Group::kRural;
  if (n == "urban") return Group::kUrban;
  return std::nullopt;
}

Axis axis_of(Group group) {
  switch (group) {
    case Group::kFemale:
    case Group::kMale: return Axis::kGender;
    case Group::kYounger:
    case Group::kOlder: return Axis::kAge;
    case Group::kCompletedHs:
    case Group::kNotCompletedHs: return Axis::kEducation;
    case Group::kRural:
    case Group::kUrban: return Axis::kLivingArea;
  }
  return Axis::kGender;
}

std::array<Group, 2> groups_of(Axis axis) {
  switch (axis) {
    case Axis::kGender: return {Group::kFemale, Group::kMale};
    case Axis::kAge: return {Group::kYounger, Group::kOlder};
    case Axis::kEducation:
      return {Group::kCompletedHs, Group::kNotCompletedHs};
    case Axis::kLivingArea: return {Group::kRural, Group::kUrban};
  }
  return {Group::kFemale, Group::kMale};
}

Group other_group(Group group) {
  const auto gs = groups_of(axis_of(group));
  return gs[0] == group ? gs[1] : gs[0];
}

DemographicProfile make_profile(Axis axis, Group group) {
  if (axis_of(group) != axis) {
    throw ValidationError("group '" + std::string(group_name(group)) +
                          "' is not legal for axis '" +
                          std::string(axis_name(axis)) + "'");
  }
  return {axis, group};
}

std::string_view persona_phrase(Group group) {
  switch (group) {
    case Group::kFemale: return "female";
    case Group::kMale: return "male";
    case Group::kYounger: return "younger adult (aged 35 or under)";
    case Group::kOlder: return "older adult (aged 60 or over)";
    case Group::kCompletedHs: return "completed high school";
    case Group::kNotCompletedHs: return "did not complete high school";
    case Group::kRural: return "lives in a rural area";
    case Group::kUrban: return "lives in an urban area";
  }
  return "";
}

std::string_view label_name(Label label) {
  return label == Label::kTrue ? "true" : "fake";
}

std::optional<Label> parse_label(std::string_view name) {
  const std::string n = lower_trim(name);
  if (n == "true") return Label::kTrue;
  if (n == "fake") return Label::kFake;
  return std::nullopt;
}

std::optional<Label> normalize_label_alias(std::string_view raw) {
  static constexpr std::array<std::string_view, 6> kTrueAliases = {
      "true", "real", "t", "1", "yes", "legit"};
  static constexpr std::array<std::string_view, 7> kFakeAliases = {
      "fake", "false", "f", "0", "no", "misinformation", "misinfo"};
  const std::string n = lower_trim(raw);
  for (auto a : kTrueAliases)
    if (n == a) return Label::kTrue;
  for (auto a : kFakeAliases)
    if (n == a) return Label::kFake;
  return std::nullopt;
}

}  // namespace credence
