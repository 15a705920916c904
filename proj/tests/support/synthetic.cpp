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

#include "synthetic.hpp"

#include <cmath>
#include <span>
#include <sstream>

#include "credence/demographics.hpp"
#include "credence/hash.hpp"

namespace credence::testing {

std::vector<double> random_simplex(Rng& rng, int k) {
  // Normalized exponentials are uniform on the simplex.
  std::vector<double> p(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (auto& v : p) {
    v = -std::log(1.0 - rng.uniform());
    sum += v;
  }
  for (auto& v : p) v /= sum;
  return p;
}

BeliefStore synthetic_store(std::uint64_t seed, int per_dimension) {
  Rng rng(seed);
  BeliefStore store;
  int qn = 0;
  for (BeliefDimension dim : kAllDimensions) {
    for (int i = 0; i < per_dimension; ++i) {
      ++qn;
      SurveyQuestion q;
      q.qid = "q" + std::to_string(qn);
      q.text = "Synthetic question " + std::to_string(qn) + " about " +
               std::string(dimension_name(dim)) + "?";
      q.scale_size = 2 + (qn - 1) % 9;
      q.scale_kind = q.scale_size == 2 ? ScaleKind::kBinary : ScaleKind::kLikert;
      q.dimension = dim;
      store.add_question(q);
      for (Axis axis : kAllAxes) {
        for (Group g : groups_of(axis)) {
          ResponseDistribution d;
          d.qid = q.qid;
          d.demographic = make_profile(axis, g);
          d.probs = random_simplex(rng, q.scale_size);
          d.n = 100;
          store.add_distribution(d);
        }
      }
    }
  }
  return store;
}

SyntheticCohort synthetic_cohort(const CohortSpec& spec) {
  Rng rng(spec.seed);
  SyntheticCohort out;
  std::vector<Label> gold(static_cast<std::size_t>(spec.claims));
  for (auto& g : gold) g = rng.uniform() < 0.5 ? Label::kTrue : Label::kFake;
  for (int p = 1; p <= spec.participants; ++p) {
    const std::string pid = "p" + std::to_string(p);
    const std::string gender = rng.uniform() < 0.5 ? "female" : "male";
    const std::string age = rng.uniform() < 0.5 ? "younger" : "older";
    const std::string edu =
        rng.uniform() < 0.5 ? "completed_hs" : "not_completed_hs";
    const std::string area =
        spec.living_area ? (rng.uniform() < 0.5 ? "rural" : "urban") : "";
    std::vector<int> ids(static_cast<std::size_t>(spec.claims));
    for (int c = 0; c < spec.claims; ++c) ids[static_cast<std::size_t>(c)] = c;
    rng.shuffle(std::span<int>(ids));
    for (int j = 0; j < spec.claims_per_participant; ++j) {
      const int c = ids[static_cast<std::size_t>(j)];
      Row r;
      r.pid = pid;
      r.claim_id = "c" + std::to_string(c + 1);
      r.claim_text = "Synthetic claim number " + std::to_string(c + 1) +
                     " concerning topic " + std::to_string(c % 4) + ".";
      r.gold = gold[static_cast<std::size_t>(c)];
      r.choice = rng.uniform() < 0.6 ? r.gold
                                     : (r.gold == Label::kTrue ? Label::kFake
                                                               : Label::kTrue);
      r.gender = gender;
      r.age = age;
      r.education = edu;
      r.living_area = area;
      out.rows.push_back(std::move(r));
    }
  }
  out.csv = to_csv(out.rows, spec.living_area);
  return out;
}

std::string to_csv(const std::vector<Row>& rows, bool living_area) {
  std::ostringstream os;
  os << "pid,claim_id,claim_text,gold_label,participant_choice,gender,age,"
        "education";
  if (living_area) os << ",living_area";
  os << "\n";
  for (const auto& r : rows) {
    os << r.pid << ',' << r.claim_id << ',' << r.claim_text << ','
       << label_name(r.gold) << ',' << label_name(r.choice) << ',' << r.gender
       << ',' << r.age << ',' << r.education;
    if (living_area) os << ',' << r.living_area;
    os << "\n";
  }
  return os.str();
}

Cohort parse_cohort(const std::string& csv, DatasetKind kind) {
  std::istringstream in(csv);
  return Cohort::parse(in, kind);
}

std::string scripted_reply(const ChatRequest& request) {
  const Digest d = sha256(request.system_text + "\x1f" + request.user_text +
                          "\x1f" + std::to_string(request.seed));
  switch (d[0] % 5) {
    case 0:
    case 1: return "True.";
    case 2:
    case 3: return "Fake.";
    default: return "I cannot say.";
  }
}

}  // namespace credence::testing
