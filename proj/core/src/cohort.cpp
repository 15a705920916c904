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

#include "credence/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "credence/error.hpp"
#include "credence/text.hpp"
#include "csv.hpp"
#include "json.hpp"

namespace credence {
namespace {

constexpr std::array<const char*, 9> kColumns = {
    "pid",    "claim_id", "claim_text", "gold_label", "participant_choice",
    "gender", "age",      "education",  "living_area"};

const char* axis_column(Axis axis) {
  switch (axis) {
    case Axis::kGender: return "gender";
    case Axis::kAge: return "age";
    case Axis::kEducation: return "education";
    case Axis::kLivingArea: return "living_area";
  }
  return "";
}

enum class AgeParse { kBlank, kGroup, kMiddleBand };

// Age accepts a group name or an integer age in years.
AgeParse parse_age(const std::string& raw, std::optional<Group>& out) {
  const std::string v = trim(raw);
  if (v.empty()) return AgeParse::kBlank;
  if (auto g = parse_group(v); g && axis_of(*g) == Axis::kAge) {
    out = g;
    return AgeParse::kGroup;
  }
  std::size_t used = 0;
  int years = 0;
  try {
    years = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw ParseError("unrecognized age value '" + v + "'");
  }
  if (years <= 35) {
    out = Group::kYounger;
    return AgeParse::kGroup;
  }
  if (years >= 60) {
    out = Group::kOlder;
    return AgeParse::kGroup;
  }
  return AgeParse::kMiddleBand;
}

double binary_entropy(std::size_t k_true, std::size_t n) {
  double h = 0.0;
  for (std::size_t k : {k_true, n - k_true}) {
    if (k == 0) continue;
    const double p = static_cast<double>(k) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h;
}

struct RawRow {
  std::string pid, claim_id, claim_text;
  Label gold = Label::kFake, choice = Label::kFake;
  std::array<std::optional<Group>, 4> groups{};
  bool middle_age = false;
  std::size_t line = 0;
};

}  // namespace

std::string_view dataset_name(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kPandora: return "PANDORA";
    case DatasetKind::kMist1: return "MIST1";
    case DatasetKind::kMist2: return "MIST2";
  }
  return "?";
}

std::optional<DatasetKind> parse_dataset_kind(std::string_view name) {
  std::string n;
  for (char c : name)
    if (std::isalnum(static_cast<unsigned char>(c)))
      n.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (n == "PANDORA") return DatasetKind::kPandora;
  if (n == "MIST1") return DatasetKind::kMist1;
  if (n == "MIST2") return DatasetKind::kMist2;
  return std::nullopt;
}

std::vector<Axis> expected_axes(DatasetKind kind) {
  if (kind == DatasetKind::kPandora) {
    return {Axis::kGender, Axis::kAge, Axis::kEducation, Axis::kLivingArea};
  }
  return {Axis::kGender, Axis::kAge, Axis::kEducation};
}

Cohort Cohort::load(const std::filesystem::path& dataset_file,
                    DatasetKind kind, CohortOptions options) {
  std::ifstream in(dataset_file);
  if (!in) throw ParseError("cannot open " + dataset_file.string());
  return parse(in, kind, options, dataset_file.string());
}

Cohort Cohort::parse(std::istream& in, DatasetKind kind, CohortOptions options,
                     std::string_view source_name) {
  const std::string src(source_name);
  csv::Table table(in, src);
  for (const char* col : {"pid", "claim_id", "claim_text", "gold_label",
                          "participant_choice"}) {
    if (!table.has_column(col)) {
      throw ParseError(src + ": missing column '" + col + "'");
    }
  }

  Cohort cohort;
  cohort.kind_ = kind;
  const auto expected = expected_axes(kind);
  std::array<bool, 4> column_present{};
  for (Axis a : expected) {
    column_present[static_cast<std::size_t>(a)] =
        table.has_column(axis_column(a));
  }

  std::vector<RawRow> rows;
  std::array<std::size_t, 4> non_blank{};
  while (table.next()) {
    RawRow r;
    r.line = table.line();
    const std::string where = src + ":" + std::to_string(r.line);
    r.pid = trim(table.at("pid"));
    r.claim_id = trim(table.at("claim_id"));
    r.claim_text = trim(table.at("claim_text"));
    if (r.pid.empty() || r.claim_id.empty()) {
      throw ParseError(where + ": empty pid or claim_id");
    }
    if (r.claim_text.empty()) {
      throw ParseError(where + ": record " + r.claim_id + ": empty claim text");
    }
    auto gold = normalize_label_alias(table.at("gold_label"));
    auto choice = normalize_label_alias(table.at("participant_choice"));
    if (!gold) {
      throw ParseError(where + ": record " + r.pid + "/" + r.claim_id +
                       ": unknown gold_label '" + table.at("gold_label") + "'");
    }
    if (!choice) {
      throw ParseError(where + ": record " + r.pid + "/" + r.claim_id +
                       ": unknown participant_choice '" +
                       table.at("participant_choice") + "'");
    }
    r.gold = *gold;
    r.choice = *choice;
    for (Axis a : expected) {
      const auto ai = static_cast<std::size_t>(a);
      if (!column_present[ai]) continue;
      const std::string raw = table.at(axis_column(a));
      try {
        if (a == Axis::kAge) {
          if (parse_age(raw, r.groups[ai]) == AgeParse::kMiddleBand) {
            r.middle_age = true;
          }
        } else if (!trim(raw).empty()) {
          auto g = parse_group(raw);
          if (!g || axis_of(*g) != a) {
            throw ParseError("unrecognized " + std::string(axis_name(a)) +
                             " value '" + trim(raw) + "'");
          }
          r.groups[ai] = g;
        }
      } catch (const ParseError& e) {
        throw ParseError(where + ": record " + r.pid + ": " + e.what());
      }
      if (!trim(raw).empty()) ++non_blank[ai];
    }
    rows.push_back(std::move(r));
  }
  cohort.stats_.raw_rows = rows.size();

  for (Axis a : expected) {
    const auto ai = static_cast<std::size_t>(a);
    if (column_present[ai] && non_blank[ai] > 0) {
      cohort.axes_[ai] = true;
    } else {
      cohort.stats_.warnings.push_back(
          "axis " + std::string(axis_name(a)) + " expected for " +
          std::string(dataset_name(kind)) +
          " but not annotated; marked unavailable");
    }
  }

  // Per-participant consistency and middle-age exclusion.
  std::map<std::string, RawRow, std::less<>> first_row;
  std::set<std::string, std::less<>> middle_age_pids;
  for (const auto& r : rows) {
    auto [it, inserted] = first_row.emplace(r.pid, r);
    if (!inserted) {
      const RawRow& f = it->second;
      if (f.groups != r.groups || f.middle_age != r.middle_age) {
        throw ParseError(src + ":" + std::to_string(r.line) +
                         ": participant " + r.pid +
                         " has inconsistent demographics across rows");
      }
    }
    if (r.middle_age) middle_age_pids.insert(r.pid);
  }

  std::map<std::string, Claim, NaturalLess> claims;
  std::map<std::pair<std::string, std::string>, std::size_t> seen;
  std::map<std::string, std::vector<ClaimJudgment>, NaturalLess> by_pid;
  for (const auto& r : rows) {
    auto [cit, fresh] = claims.emplace(
        r.claim_id, Claim{r.claim_id, r.claim_text, r.gold, kind});
    if (!fresh && (cit->second.text != r.claim_text ||
                   cit->second.gold_label != r.gold)) {
      throw ParseError(src + ":" + std::to_string(r.line) + ": claim " +
                       r.claim_id +
                       " has inconsistent text or gold label across rows");
    }
    auto key = std::pair{r.pid, r.claim_id};
    if (auto sit = seen.find(key); sit != seen.end()) {
      throw ValidationError(src + ":" + std::to_string(r.line) +
                            ": duplicate judgment (" + r.pid + ", " +
                            r.claim_id + "), first at line " +
                            std::to_string(sit->second));
    }
    seen.emplace(key, r.line);
    if (r.middle_age) {
      ++cohort.stats_.excluded_middle_age_rows;
      continue;
    }
    by_pid[r.pid].push_back(
        ClaimJudgment{r.pid, r.claim_id, r.choice, r.gold, false});
  }
  cohort.stats_.excluded_middle_age_participants = middle_age_pids.size();

  for (auto& [_, c] : claims) cohort.claims_.push_back(std::move(c));

  const int held_cap = std::max(0, options.held_out_per_participant);
  for (auto& [pid, js] : by_pid) {
    std::sort(js.begin(), js.end(), [](const auto& a, const auto& b) {
      return natural_less(a.claim_id, b.claim_id);
    });
    Participant p;
    p.pid = pid;
    p.groups = first_row.at(pid).groups;
    for (std::size_t ai = 0; ai < 4; ++ai) {
      if (!cohort.axes_[ai]) p.groups[ai].reset();
    }
    const int n = static_cast<int>(js.size());
    const int held = std::min(held_cap, n - 1);
    for (int i = 0; i < n; ++i) {
      if (i < held) {
        js[i].held_out = true;
        p.observed_beliefs.push_back({js[i].claim_id, js[i].participant_choice});
      } else {
        p.evaluation_claims.push_back(js[i].claim_id);
      }
      cohort.judgments_.push_back(js[i]);
    }
    cohort.participants_.push_back(std::move(p));
  }
  cohort.reindex();
  return cohort;
}

void Cohort::reindex() {
  participant_index_.clear();
  claim_index_.clear();
  judgment_index_.clear();
  for (std::size_t i = 0; i < participants_.size(); ++i)
    participant_index_.emplace(participants_[i].pid, i);
  for (std::size_t i = 0; i < claims_.size(); ++i)
    claim_index_.emplace(claims_[i].claim_id, i);
  stats_.judgments = judgments_.size();
  stats_.evaluation_instances = 0;
  stats_.observed_belief_entries = 0;
  for (std::size_t i = 0; i < judgments_.size(); ++i) {
    judgment_index_.emplace(
        std::pair{judgments_[i].pid, judgments_[i].claim_id}, i);
    if (judgments_[i].held_out) ++stats_.observed_belief_entries;
    else ++stats_.evaluation_instances;
  }
}

const Participant* Cohort::find_participant(std::string_view pid) const {
  auto it = participant_index_.find(pid);
  return it == participant_index_.end() ? nullptr : &participants_[it->second];
}

const Claim* Cohort::find_claim(std::string_view claim_id) const {
  auto it = claim_index_.find(claim_id);
  return it == claim_index_.end() ? nullptr : &claims_[it->second];
}

const ClaimJudgment* Cohort::find_judgment(std::string_view pid,
                                           std::string_view claim_id) const {
  auto it = judgment_index_.find(
      std::pair{std::string(pid), std::string(claim_id)});
  return it == judgment_index_.end() ? nullptr : &judgments_[it->second];
}

std::vector<const ClaimJudgment*> Cohort::evaluation_judgments() const {
  std::vector<const ClaimJudgment*> out;
  for (const auto& j : judgments_)
    if (!j.held_out) out.push_back(&j);
  return out;
}

std::string Cohort::canonical_serialization() const {
  using ojson = nlohmann::ordered_json;
  std::string out;
  ojson header;
  header["type"] = "cohort";
  header["dataset"] = dataset_name(kind_);
  ojson axes = ojson::array();
  for (Axis a : kAllAxes)
    if (axis_available(a)) axes.push_back(axis_name(a));
  header["axes"] = axes;
  out += header.dump() + "\n";
  for (const auto& c : claims_) {
    ojson rec;
    rec["type"] = "claim";
    rec["claim_id"] = c.claim_id;
    rec["text"] = c.text;
    rec["gold_label"] = label_name(c.gold_label);
    rec["source"] = dataset_name(c.source_dataset);
    out += rec.dump() + "\n";
  }
  for (const auto& p : participants_) {
    ojson rec;
    rec["type"] = "participant";
    rec["pid"] = p.pid;
    for (Axis a : kAllAxes) {
      auto g = p.group(a);
      rec[std::string(axis_name(a))] =
          g ? ojson(std::string(group_name(*g))) : ojson(nullptr);
    }
    ojson obs = ojson::array();
    for (const auto& o : p.observed_beliefs)
      obs.push_back({o.claim_id, label_name(o.judged_label)});
    rec["observed"] = obs;
    out += rec.dump() + "\n";
  }
  for (const auto& j : judgments_) {
    ojson rec;
    rec["type"] = "judgment";
    rec["pid"] = j.pid;
    rec["claim_id"] = j.claim_id;
    rec["choice"] = label_name(j.participant_choice);
    rec["gold"] = label_name(j.gold_label);
    rec["held_out"] = j.held_out;
    out += rec.dump() + "\n";
  }
  return out;
}

double claim_entropy(const Cohort& cohort, std::string_view claim_id) {
  if (!cohort.find_claim(claim_id)) {
    throw ValidationError("unknown claim " + std::string(claim_id));
  }
  std::size_t n_true = 0, n = 0;
  for (const auto& j : cohort.judgments()) {
    if (j.claim_id != claim_id) continue;
    ++n;
    if (j.participant_choice == Label::kTrue) ++n_true;
  }
  if (n == 0) {
    throw ValidationError("claim " + std::string(claim_id) +
                          " has no judgments");
  }
  return binary_entropy(n_true, n);
}

std::map<std::string, int, std::less<>> entropy_bins(const Cohort& cohort,
                                                     int n_bins) {
  std::map<std::string, std::pair<std::size_t, std::size_t>, std::less<>>
      counts;  // claim -> (true, total)
  for (const auto& j : cohort.judgments()) {
    auto& c = counts[j.claim_id];
    if (j.participant_choice == Label::kTrue) ++c.first;
    ++c.second;
  }
  std::vector<std::pair<std::string, double>> ent;
  for (const auto& [id, c] : counts) {
    ent.emplace_back(id, binary_entropy(c.first, c.second));
  }
  std::map<std::string, int, std::less<>> out;
  if (n_bins < 1 || ent.size() < static_cast<std::size_t>(n_bins)) {
    for (const auto& [id, _] : ent) out[id] = 0;
    return out;
  }
  std::vector<double> sorted;
  for (const auto& [_, h] : ent) sorted.push_back(h);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  std::vector<double> bounds;
  for (int k = 1; k < n_bins; ++k) {
    const std::size_t rank =
        (static_cast<std::size_t>(k) * n + n_bins - 1) / n_bins;  // ceil
    bounds.push_back(sorted[rank - 1]);
  }
  for (const auto& [id, h] : ent) {
    int bin = n_bins - 1;
    for (int k = 0; k < n_bins - 1; ++k) {
      if (h <= bounds[k]) {
        bin = k;
        break;
      }
    }
    out[id] = bin;
  }
  return out;
}

std::string entropy_bin_name(int bin, int n_bins) {
  if (n_bins == 3) {
    static constexpr std::array<const char*, 3> kNames = {"Low", "Mid",
                                                          "High"};
    if (bin >= 0 && bin < 3) return kNames[bin];
  }
  return "B" + std::to_string(bin);
}

Cohort demographic_slice(const Cohort& cohort, DemographicProfile profile) {
  if (axis_of(profile.group) != profile.axis) {
    throw ValidationError("group not legal for axis");
  }
  if (!cohort.axis_available(profile.axis)) {
    throw ValidationError("axis " + std::string(axis_name(profile.axis)) +
                          " is not available in " +
                          std::string(dataset_name(cohort.kind())));
  }
  Cohort out;
  out.kind_ = cohort.kind_;
  out.axes_ = cohort.axes_;
  out.stats_.warnings = cohort.stats_.warnings;
  std::set<std::string, std::less<>> pids;
  for (const auto& p : cohort.participants_) {
    if (p.group(profile.axis) == profile.group) {
      out.participants_.push_back(p);
      pids.insert(p.pid);
    }
  }
  std::set<std::string, std::less<>> claim_ids;
  for (const auto& j : cohort.judgments_) {
    if (pids.count(j.pid)) {
      out.judgments_.push_back(j);
      claim_ids.insert(j.claim_id);
    }
  }
  for (const auto& c : cohort.claims_) {
    if (claim_ids.count(c.claim_id)) out.claims_.push_back(c);
  }
  out.stats_.raw_rows = out.judgments_.size();
  out.reindex();
  return out;
}

}  // namespace credence
