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

#include "credence/belief_store.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "credence/divergence.hpp"
#include "credence/error.hpp"
#include "credence/text.hpp"
#include "csv.hpp"
#include "json.hpp"

namespace credence {
namespace {

constexpr std::array<DimensionInfo, 7> kDimensions = {{
    {BeliefDimension::kWorldviewIdentity, "WorldviewIdentity",
     "Worldview and Identity Beliefs",
     "Religious, political and group-identity commitments."},
    {BeliefDimension::kEpistemicTrust, "EpistemicTrust",
     "Epistemic and Trust Beliefs",
     "Trust in people, institutions, science and technology."},
    {BeliefDimension::kCognitiveStyle, "CognitiveStyle",
     "Cognitive Style Beliefs",
     "Priority trade-offs and tolerance for moral ambiguity."},
    {BeliefDimension::kConspiracyMentality, "ConspiracyMentality",
     "Conspiracy Mindset", "Perceived corruption of authorities and media."},
    {BeliefDimension::kMoralsValues, "MoralsValues", "Moral and Value Beliefs",
     "Justifiability of contested behaviours."},
    {BeliefDimension::kEmotionRelated, "EmotionRelated", "Emotion Related",
     "Happiness, security, worry and life satisfaction."},
    {BeliefDimension::kHeuristics, "Heuristics", "Heuristic",
     "Group membership, media habits and social attitudes."},
}};

std::string fold(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

}  // namespace

const DimensionInfo& dimension_info(BeliefDimension dim) {
  return kDimensions[dimension_index(dim)];
}

std::string_view dimension_name(BeliefDimension dim) {
  return dimension_info(dim).name;
}

std::size_t dimension_index(BeliefDimension dim) {
  return static_cast<std::size_t>(dim);
}

std::optional<BeliefDimension> parse_dimension(std::string_view name) {
  const std::string key = fold(name);
  for (const auto& d : kDimensions) {
    if (key == fold(d.name) || key == fold(d.label)) return d.id;
  }
  return std::nullopt;
}

std::string_view scale_kind_name(ScaleKind kind) {
  switch (kind) {
    case ScaleKind::kLikert: return "Likert";
    case ScaleKind::kBinary: return "Binary";
    case ScaleKind::kCategorical: return "Categorical";
  }
  return "?";
}

std::optional<ScaleKind> parse_scale_kind(std::string_view name) {
  const std::string key = fold(name);
  if (key == "likert") return ScaleKind::kLikert;
  if (key == "binary") return ScaleKind::kBinary;
  if (key == "categorical") return ScaleKind::kCategorical;
  return std::nullopt;
}

bool qid_less(std::string_view a, std::string_view b) {
  return natural_less(a, b);
}

void BeliefStore::add_question(SurveyQuestion q) {
  if (q.qid.empty()) throw ValidationError("survey question with empty qid");
  if (q.scale_size < kMinScale || q.scale_size > kMaxScale) {
    throw ValidationError("question " + q.qid + ": scale_size " +
                          std::to_string(q.scale_size) +
                          " outside [2, 10]");
  }
  if (questions_.count(q.qid)) {
    throw ValidationError("duplicate question id " + q.qid);
  }
  const std::string key = q.qid;
  questions_.emplace(key, std::move(q));
}

void BeliefStore::add_distribution(ResponseDistribution dist) {
  const SurveyQuestion* q = find_question(dist.qid);
  if (!q) {
    throw ValidationError("distribution references unknown question " +
                          dist.qid);
  }
  if (axis_of(dist.demographic.group) != dist.demographic.axis) {
    throw ValidationError("distribution " + dist.qid + ": group " +
                          std::string(group_name(dist.demographic.group)) +
                          " not legal for axis " +
                          std::string(axis_name(dist.demographic.axis)));
  }
  if (static_cast<int>(dist.probs.size()) != q->scale_size) {
    throw ValidationError("distribution " + dist.qid + "/" +
                          std::string(group_name(dist.demographic.group)) +
                          ": " + std::to_string(dist.probs.size()) +
                          " bins, question has " +
                          std::to_string(q->scale_size));
  }
  double sum = 0.0;
  for (double p : dist.probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError("distribution " + dist.qid +
                            ": negative or non-finite probability");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kIngestSumTolerance) {
    std::ostringstream os;
    os << "distribution " << dist.qid << "/"
       << group_name(dist.demographic.group) << ": probabilities sum to "
       << sum << ", expected 1";
    throw ValidationError(os.str());
  }
  for (double& p : dist.probs) p /= sum;
  auto key = std::pair{dist.qid, dist.demographic.group};
  if (distributions_.count(key)) {
    throw ValidationError("duplicate distribution for " + dist.qid + "/" +
                          std::string(group_name(dist.demographic.group)));
  }
  distributions_.emplace(std::move(key), std::move(dist));
}

const SurveyQuestion* BeliefStore::find_question(std::string_view qid) const {
  auto it = questions_.find(qid);
  return it == questions_.end() ? nullptr : &it->second;
}

const SurveyQuestion& BeliefStore::question(std::string_view qid) const {
  const SurveyQuestion* q = find_question(qid);
  if (!q) throw ValidationError("unknown question " + std::string(qid));
  return *q;
}

std::vector<const SurveyQuestion*> BeliefStore::questions() const {
  std::vector<const SurveyQuestion*> out;
  out.reserve(questions_.size());
  for (const auto& [_, q] : questions_) out.push_back(&q);
  return out;
}

std::vector<const SurveyQuestion*> BeliefStore::questions_in(
    BeliefDimension dim) const {
  std::vector<const SurveyQuestion*> out;
  for (const auto& [_, q] : questions_) {
    if (q.dimension == dim) out.push_back(&q);
  }
  return out;
}

std::size_t BeliefStore::dimension_count() const {
  std::array<bool, 7> seen{};
  for (const auto& [_, q] : questions_) seen[dimension_index(q.dimension)] = true;
  return static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
}

const ResponseDistribution* BeliefStore::find_distribution(
    std::string_view qid, Group group) const {
  auto it = distributions_.find(std::pair{std::string(qid), group});
  return it == distributions_.end() ? nullptr : &it->second;
}

bool BeliefStore::has_group(Group group) const {
  for (const auto& [key, _] : distributions_) {
    if (key.second == group) return true;
  }
  return false;
}

BeliefStore BeliefStore::parse(std::istream& taxonomy,
                               std::istream& distributions,
                               std::string_view taxonomy_name,
                               std::string_view distributions_name) {
  BeliefStore store;

  csv::Table table(taxonomy, std::string(taxonomy_name));
  for (const char* col : {"qid", "text", "scale_size", "scale_kind",
                          "dimension"}) {
    if (!table.has_column(col)) {
      throw ParseError(std::string(taxonomy_name) + ": missing column '" +
                       col + "'");
    }
  }
  while (table.next()) {
    const std::string where =
        std::string(taxonomy_name) + ":" + std::to_string(table.line());
    SurveyQuestion q;
    q.qid = trim(table.at("qid"));
    q.text = trim(table.at("text"));
    const std::string scale = trim(table.at("scale_size"));
    try {
      std::size_t used = 0;
      q.scale_size = std::stoi(scale, &used);
      if (used != scale.size()) throw std::invalid_argument(scale);
    } catch (const std::exception&) {
      throw ParseError(where + ": record " + q.qid +
                       ": scale_size is not an integer ('" + scale + "')");
    }
    auto kind = parse_scale_kind(table.at("scale_kind"));
    if (!kind) {
      throw ParseError(where + ": record " + q.qid + ": unknown scale_kind '" +
                       table.at("scale_kind") + "'");
    }
    q.scale_kind = *kind;
    auto dim = parse_dimension(table.at("dimension"));
    if (!dim) {
      throw ValidationError(where + ": record " + q.qid +
                            ": unknown dimension '" + table.at("dimension") +
                            "'");
    }
    q.dimension = *dim;
    try {
      store.add_question(std::move(q));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  store.add_distributions(distributions, distributions_name);
  return store;
}

void BeliefStore::add_distributions(std::istream& distributions,
                                    std::string_view distributions_name) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(distributions, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where =
        std::string(distributions_name) + ":" + std::to_string(line_no);
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": invalid JSON record: " + e.what());
    }
    ResponseDistribution dist;
    try {
      dist.qid = rec.at("qid").get<std::string>();
      const auto axis_s = rec.at("axis").get<std::string>();
      const auto group_s = rec.at("group").get<std::string>();
      auto axis = parse_axis(axis_s);
      auto group = parse_group(group_s);
      if (!axis) throw ParseError(where + ": record " + dist.qid +
                                  ": unknown axis '" + axis_s + "'");
      if (!group) throw ParseError(where + ": record " + dist.qid +
                                   ": unknown group '" + group_s + "'");
      dist.demographic = {*axis, *group};
      if (rec.contains("probs")) {
        dist.probs = rec.at("probs").get<std::vector<double>>();
        if (rec.contains("n")) dist.n = rec.at("n").get<std::int64_t>();
      } else if (rec.contains("counts")) {
        const auto counts = rec.at("counts").get<std::vector<double>>();
        double total = 0.0;
        for (double c : counts) {
          if (c < 0) {
            throw ValidationError(where + ": record " + dist.qid +
                                  ": negative count");
          }
          total += c;
        }
        if (total <= 0) {
          throw ValidationError(where + ": record " + dist.qid +
                                ": counts sum to zero");
        }
        for (double c : counts) dist.probs.push_back(c / total);
        dist.n = static_cast<std::int64_t>(std::llround(total));
      } else {
        throw ParseError(where + ": record " + dist.qid +
                         ": needs 'probs' or 'counts'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": malformed record: " + e.what());
    }
    try {
      add_distribution(std::move(dist));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
}

BeliefStore BeliefStore::load(const std::filesystem::path& taxonomy_file,
                              const std::filesystem::path& distributions_file) {
  std::ifstream tax(taxonomy_file);
  if (!tax) throw ParseError("cannot open " + taxonomy_file.string());
  std::ifstream dist(distributions_file);
  if (!dist) throw ParseError("cannot open " + distributions_file.string());
  return parse(tax, dist, taxonomy_file.string(), distributions_file.string());
}

BeliefStore BeliefStore::load(
    const std::filesystem::path& taxonomy_file,
    std::span<const std::filesystem::path> distribution_files) {
  std::ifstream tax(taxonomy_file);
  if (!tax) throw ParseError("cannot open " + taxonomy_file.string());
  std::istringstream none;
  BeliefStore store = parse(tax, none, taxonomy_file.string());
  for (const auto& file : distribution_files) {
    std::ifstream dist(file);
    if (!dist) throw ParseError("cannot open " + file.string());
    store.add_distributions(dist, file.string());
  }
  return store;
}

int modal_bin(std::span<const double> probs) {
  int best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = static_cast<int>(i);
  }
  return best + 1;
}

namespace {

template <typename Fn>
std::size_t for_each_shared(const BeliefStore& store, Axis axis, Fn&& fn) {
  const auto groups = groups_of(axis);
  for (Group g : groups) {
    if (!store.has_group(g)) {
      throw ValidationError("no distributions for group " +
                            std::string(group_name(g)) + " on axis " +
                            std::string(axis_name(axis)));
    }
  }
  std::size_t n = 0;
  for (const SurveyQuestion* q : store.questions()) {
    const auto* a = store.find_distribution(q->qid, groups[0]);
    const auto* b = store.find_distribution(q->qid, groups[1]);
    if (!a || !b) continue;
    fn(*a, *b);
    ++n;
  }
  return n;
}

}  // namespace

double modal_disagreement(const BeliefStore& store, Axis axis) {
  std::size_t differing = 0;
  const std::size_t n = for_each_shared(
      store, axis, [&](const ResponseDistribution& a,
                       const ResponseDistribution& b) {
        if (modal_response(a) != modal_response(b)) ++differing;
      });
  if (n == 0) return 0.0;
  return 100.0 * static_cast<double>(differing) / static_cast<double>(n);
}

double mean_js_divergence_bits(const BeliefStore& store, Axis axis) {
  double total = 0.0;
  const std::size_t n = for_each_shared(
      store, axis, [&](const ResponseDistribution& a,
                       const ResponseDistribution& b) {
        total += js_divergence_bits(a.probs, b.probs);
      });
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace credence
