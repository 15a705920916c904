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
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credence/demographics.hpp"

namespace credence {

enum class DatasetKind { kPandora, kMist1, kMist2 };

std::string_view dataset_name(DatasetKind kind);
std::optional<DatasetKind> parse_dataset_kind(std::string_view name);
// Axes the dataset is expected to annotate. MIST has no living area.
std::vector<Axis> expected_axes(DatasetKind kind);

struct Claim {
  std::string claim_id;
  std::string text;
  Label gold_label = Label::kFake;
  DatasetKind source_dataset = DatasetKind::kPandora;
};

struct ObservedBelief {
  std::string claim_id;
  Label judged_label = Label::kFake;
};

struct Participant {
  std::string pid;
  std::array<std::optional<Group>, 4> groups{};  // indexed by Axis
  std::vector<ObservedBelief> observed_beliefs;
  std::vector<std::string> evaluation_claims;

  std::optional<Group> group(Axis axis) const {
    return groups[static_cast<std::size_t>(axis)];
  }
};

struct ClaimJudgment {
  std::string pid;
  std::string claim_id;
  Label participant_choice = Label::kFake;
  Label gold_label = Label::kFake;
  bool held_out = false;  // used as an observed belief, not evaluated
};

struct CohortOptions {
  // Judgments per participant held out as observed beliefs. Capped at
  // (judgments - 1) so every participant keeps one evaluation target.
  int held_out_per_participant = 2;
};

struct CohortStats {
  std::size_t raw_rows = 0;
  std::size_t judgments = 0;
  std::size_t evaluation_instances = 0;
  std::size_t observed_belief_entries = 0;
  std::size_t excluded_middle_age_participants = 0;
  std::size_t excluded_middle_age_rows = 0;
  std::vector<std::string> warnings;
};

// Immutable after construction. Participants, claims and judgments are kept
// in natural id order.
class Cohort {
 public:
  // dataset_file columns: pid, claim_id, claim_text, gold_label,
  // participant_choice, gender, age, education, living_area
  static Cohort load(const std::filesystem::path& dataset_file,
                     DatasetKind kind, CohortOptions options = {});
  static Cohort parse(std::istream& in, DatasetKind kind,
                      CohortOptions options = {},
                      std::string_view source_name = "dataset");

  DatasetKind kind() const { return kind_; }
  const std::vector<Participant>& participants() const { return participants_; }
  const std::vector<Claim>& claims() const { return claims_; }
  const std::vector<ClaimJudgment>& judgments() const { return judgments_; }
  const CohortStats& stats() const { return stats_; }

  bool axis_available(Axis axis) const {
    return axes_[static_cast<std::size_t>(axis)];
  }

  const Participant* find_participant(std::string_view pid) const;
  const Claim* find_claim(std::string_view claim_id) const;
  const ClaimJudgment* find_judgment(std::string_view pid,
                                     std::string_view claim_id) const;

  // Judgments that are prediction targets (not held out).
  std::vector<const ClaimJudgment*> evaluation_judgments() const;

  // Newline-delimited JSON with stable field order.
  std::string canonical_serialization() const;

  friend Cohort demographic_slice(const Cohort& cohort,
                                  DemographicProfile profile);

 private:
  void reindex();

  DatasetKind kind_ = DatasetKind::kPandora;
  std::array<bool, 4> axes_{};
  std::vector<Participant> participants_;
  std::vector<Claim> claims_;
  std::vector<ClaimJudgment> judgments_;
  CohortStats stats_;
  std::map<std::string, std::size_t, std::less<>> participant_index_;
  std::map<std::string, std::size_t, std::less<>> claim_index_;
  std::map<std::pair<std::string, std::string>, std::size_t> judgment_index_;
};

// Shannon entropy (bits) of the participant choices recorded for a claim.
// Throws ValidationError for an unknown claim or one without judgments.
double claim_entropy(const Cohort& cohort, std::string_view claim_id);

// Partitions claims with judgments into n_bins by entropy. Boundary k is
// the ceil(k*n/n_bins)-th order statistic; a claim goes to the first bin
// whose boundary is >= its entropy. Fewer claims than bins puts all in 0.
std::map<std::string, int, std::less<>> entropy_bins(const Cohort& cohort,
                                                     int n_bins = 3);
std::string entropy_bin_name(int bin, int n_bins = 3);

// Participants in the group with all of their judgments. Throws
// ValidationError when the axis is not available in the dataset.
Cohort demographic_slice(const Cohort& cohort, DemographicProfile profile);

}  // namespace credence
