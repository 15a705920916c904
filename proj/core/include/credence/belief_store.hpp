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
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "credence/demographics.hpp"

namespace credence {

enum class BeliefDimension {
  kWorldviewIdentity,
  kEpistemicTrust,
  kCognitiveStyle,
  kConspiracyMentality,
  kMoralsValues,
  kEmotionRelated,
  kHeuristics,
};

inline constexpr std::array<BeliefDimension, 7> kAllDimensions = {
    BeliefDimension::kWorldviewIdentity,   BeliefDimension::kEpistemicTrust,
    BeliefDimension::kCognitiveStyle,      BeliefDimension::kConspiracyMentality,
    BeliefDimension::kMoralsValues,        BeliefDimension::kEmotionRelated,
    BeliefDimension::kHeuristics};

struct DimensionInfo {
  BeliefDimension id;
  std::string_view name;   // identifier used in files, e.g. "EmotionRelated"
  std::string_view label;  // human-readable
  std::string_view description;
};

const DimensionInfo& dimension_info(BeliefDimension dim);
std::string_view dimension_name(BeliefDimension dim);
// Accepts the identifier or the label, case-insensitively.
std::optional<BeliefDimension> parse_dimension(std::string_view name);
std::size_t dimension_index(BeliefDimension dim);

enum class ScaleKind { kLikert, kBinary, kCategorical };
std::string_view scale_kind_name(ScaleKind kind);
std::optional<ScaleKind> parse_scale_kind(std::string_view name);

inline constexpr int kMinScale = 2;
inline constexpr int kMaxScale = 10;

struct SurveyQuestion {
  std::string qid;
  std::string text;
  int scale_size = 0;
  ScaleKind scale_kind = ScaleKind::kLikert;
  BeliefDimension dimension = BeliefDimension::kWorldviewIdentity;
};

struct ResponseDistribution {
  std::string qid;
  DemographicProfile demographic{Axis::kGender, Group::kFemale};
  std::vector<double> probs;  // normalized, length == scale_size
  std::int64_t n = 0;         // respondents behind the estimate, 0 if unknown
};

// Natural ordering of survey identifiers: "Q6" < "Q19" < "Q112".
bool qid_less(std::string_view a, std::string_view b);

struct QidLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return qid_less(a, b);
  }
};

// Tolerance for probability vectors at ingestion; stored vectors are
// renormalized so they sum to 1 within 1e-9.
inline constexpr double kIngestSumTolerance = 1e-6;

class BeliefStore {
 public:
  BeliefStore() = default;

  // taxonomy: CSV qid,text,scale_size,scale_kind,dimension
  // distributions: newline-delimited JSON records
  //   {"qid","axis","group","probs":[...]|"counts":[...],"n"}
  static BeliefStore load(const std::filesystem::path& taxonomy_file,
                          const std::filesystem::path& distributions_file);
  static BeliefStore parse(std::istream& taxonomy, std::istream& distributions,
                           std::string_view taxonomy_name = "taxonomy",
                           std::string_view distributions_name =
                               "distributions");

  static BeliefStore load(
      const std::filesystem::path& taxonomy_file,
      std::span<const std::filesystem::path> distribution_files);

  void add_question(SurveyQuestion question);
  // Appends newline-delimited JSON distribution records.
  void add_distributions(std::istream& distributions,
                         std::string_view distributions_name);
  // Validates against the question and normalizes the vector.
  void add_distribution(ResponseDistribution dist);

  std::size_t question_count() const { return questions_.size(); }
  std::size_t distribution_count() const { return distributions_.size(); }

  const SurveyQuestion* find_question(std::string_view qid) const;
  const SurveyQuestion& question(std::string_view qid) const;

  // Sorted by qid_less.
  std::vector<const SurveyQuestion*> questions() const;
  std::vector<const SurveyQuestion*> questions_in(BeliefDimension dim) const;
  std::size_t dimension_count() const;

  const ResponseDistribution* find_distribution(std::string_view qid,
                                                Group group) const;
  bool has_group(Group group) const;

 private:
  std::map<std::string, SurveyQuestion, QidLess> questions_;
  std::map<std::pair<std::string, Group>, ResponseDistribution>
      distributions_;
};

// 1-based argmax; ties resolve to the lowest bin.
int modal_bin(std::span<const double> probs);
inline int modal_response(const ResponseDistribution& dist) {
  return modal_bin(dist.probs);
}

// Percentage of questions (carrying both groups of the axis) whose modal
// bins differ between the groups. Throws ValidationError when either group
// has no distributions at all.
double modal_disagreement(const BeliefStore& store, Axis axis);

// Mean JS divergence (bits) between the two groups over shared questions.
double mean_js_divergence_bits(const BeliefStore& store, Axis axis);

}  // namespace credence
