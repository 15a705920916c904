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

#include "credence/counterfactual.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <map>
#include <thread>

#include "credence/error.hpp"
#include "credence/text.hpp"

namespace credence {
namespace {

struct PromptJob {
  PersonaPrompt prompt;
  std::optional<Group> group;
};

struct Completed {
  std::optional<PredictionRecord> record;
  std::optional<SweepFailure> failure;
};

std::vector<Completed> complete_all(Gateway& gateway,
                                    std::span<const PromptJob> jobs,
                                    const PanelOptions& options,
                                    Axis axis) {
  std::vector<Completed> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const PromptJob& job = jobs[i];
      Sampling sampling;
      sampling.temperature = options.temperature;
      sampling.seed = options.seed;
      try {
        PredictionRecord rec = gateway.complete(job.prompt, sampling);
        rec.axis = axis;
        rec.group = job.group;
        out[i].record = std::move(rec);
      } catch (const TransportError& e) {
        out[i].failure = SweepFailure{job.prompt.participant_ref,
                                      job.prompt.claim_ref,
                                      job.prompt.condition.label(),
                                      gateway.endpoint().display_name(),
                                      0,
                                      e.fingerprint(),
                                      e.what()};
      }
    }
  };
  int workers = options.workers > 0 ? options.workers
                                    : gateway.endpoint().max_inflight;
  workers = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  return out;
}

void require_axis(const Cohort& cohort, Axis axis) {
  if (!cohort.axis_available(axis)) {
    throw ValidationError("axis " + std::string(axis_name(axis)) +
                          " is not available in dataset " +
                          std::string(dataset_name(cohort.kind())));
  }
}

// Runs base/swapped prompt pairs and assembles the result in job order.
PanelResult run_pairs(Panel panel, Axis axis, Gateway& gateway,
                      std::vector<PromptJob> jobs, std::string condition_label,
                      const PanelOptions& options) {
  PanelResult result;
  result.panel = panel;
  result.axis = axis;
  result.model_name = gateway.endpoint().display_name();
  result.condition_label = std::move(condition_label);
  const auto done = complete_all(gateway, jobs, options, axis);
  for (std::size_t i = 0; i + 1 < jobs.size(); i += 2) {
    const Completed& a = done[i];
    const Completed& b = done[i + 1];
    if (a.failure) result.failures.push_back(*a.failure);
    if (b.failure) result.failures.push_back(*b.failure);
    if (!a.record || !b.record) {
      ++result.n_excluded;
      continue;
    }
    SwapPair pair;
    pair.pid = jobs[i].prompt.participant_ref;
    pair.claim_id = jobs[i].prompt.claim_ref;
    pair.axis = axis;
    pair.base_prompt = jobs[i].prompt;
    pair.swapped_prompt = jobs[i + 1].prompt;
    pair.base = *a.record;
    pair.swapped = *b.record;
    result.pairs.push_back(std::move(pair));
  }
  const std::size_t transport_excluded = result.n_excluded;
  summarize_pairs(result);
  result.n_excluded += transport_excluded;
  return result;
}

PanelResult swap_panel(Panel panel, const Cohort& cohort,
                       const PromptForge& forge, Axis axis, Gateway& gateway,
                       const ConditionSpec& condition,
                       const PanelOptions& options,
                       const std::vector<std::string>* claim_filter) {
  require_axis(cohort, axis);
  condition.validate();
  if (!condition.use_demographics) {
    throw ValidationError("swap panels need a condition with demographics");
  }
  std::vector<PromptJob> jobs;
  for (const Participant& p : cohort.participants()) {
    const auto g = p.group(axis);
    if (!g) continue;
    const Group other = other_group(*g);
    const bool beliefs = uses_imputed(condition.belief_source);
    for (const std::string& cid : p.evaluation_claims) {
      if (claim_filter && !std::binary_search(claim_filter->begin(),
                                              claim_filter->end(), cid,
                                              NaturalLess{})) {
        continue;
      }
      const Claim& claim = *cohort.find_claim(cid);
      const std::optional<Group> base_belief =
          beliefs ? std::optional<Group>(*g) : std::nullopt;
      const std::optional<Group> swapped_belief =
          beliefs ? std::optional<Group>(options.swap_beliefs ? other : *g)
                  : std::nullopt;
      jobs.push_back({forge.render_as(p, claim, condition, *g, base_belief), *g});
      jobs.push_back(
          {forge.render_as(p, claim, condition, other, swapped_belief), other});
    }
  }
  return run_pairs(panel, axis, gateway, std::move(jobs), condition.label(),
                   options);
}

}  // namespace

std::string_view panel_name(Panel panel) {
  switch (panel) {
    case Panel::kUtility:
      return "utility";
    case Panel::kShortcut:
      return "shortcut";
    case Panel::kComplementarity:
      return "complementarity";
  }
  return "utility";
}

std::optional<Panel> parse_panel(std::string_view name) {
  const std::string n = to_lower(trim(name));
  if (n == "utility" || n == "a") return Panel::kUtility;
  if (n == "shortcut" || n == "b") return Panel::kShortcut;
  if (n == "complementarity" || n == "c") return Panel::kComplementarity;
  return std::nullopt;
}

ConditionSpec demo_only_condition() {
  ConditionSpec c;
  c.use_demographics = true;
  return c;
}

void summarize_pairs(PanelResult& result) {
  result.n_pairs = 0;
  result.n_excluded = 0;
  std::size_t flips = 0;
  for (SwapPair& pair : result.pairs) {
    const auto a = verdict_label(pair.base.predicted_label);
    const auto b = verdict_label(pair.swapped.predicted_label);
    if (!a || !b) {
      pair.flipped = false;
      ++result.n_excluded;
      continue;
    }
    pair.flipped = *a != *b;
    ++result.n_pairs;
    if (pair.flipped) ++flips;
  }
  result.empty = result.n_pairs == 0;
  result.flip_rate = result.empty ? 0.0
                                  : 100.0 * static_cast<double>(flips) /
                                        static_cast<double>(result.n_pairs);
}

PanelResult utility_panel(const Cohort& cohort, const PromptForge& forge,
                          Axis axis, Gateway& gateway,
                          const ConditionSpec& condition,
                          const PanelOptions& options) {
  return swap_panel(Panel::kUtility, cohort, forge, axis, gateway, condition,
                    options, nullptr);
}

std::vector<std::string> build_balanced_slice(const Cohort& cohort, Axis axis,
                                              double epsilon,
                                              std::size_t min_n) {
  require_axis(cohort, axis);
  if (!(epsilon >= 0.0)) throw ValidationError("epsilon must be >= 0");
  const auto groups = groups_of(axis);
  struct Counts {
    std::size_t n[2] = {0, 0};
    std::size_t t[2] = {0, 0};
  };
  std::map<std::string, Counts, NaturalLess> counts;
  for (const ClaimJudgment& j : cohort.judgments()) {
    const Participant* p = cohort.find_participant(j.pid);
    const auto g = p->group(axis);
    if (!g) continue;
    const int side = *g == groups[0] ? 0 : 1;
    Counts& c = counts[j.claim_id];
    ++c.n[side];
    if (j.participant_choice == Label::kTrue) ++c.t[side];
  }
  std::vector<std::string> out;
  for (const auto& [cid, c] : counts) {
    if (c.n[0] < min_n || c.n[1] < min_n) continue;
    const double p0 = static_cast<double>(c.t[0]) / static_cast<double>(c.n[0]);
    const double p1 = static_cast<double>(c.t[1]) / static_cast<double>(c.n[1]);
    if (std::abs(p0 - p1) <= epsilon) out.push_back(cid);
  }
  return out;
}

PanelResult shortcut_panel(const Cohort& cohort, const PromptForge& forge,
                           Axis axis, Gateway& gateway,
                           const ConditionSpec& condition,
                           const PanelOptions& options) {
  const auto slice =
      build_balanced_slice(cohort, axis, options.epsilon, options.min_n);
  if (slice.empty()) {
    PanelResult r;
    r.panel = Panel::kShortcut;
    r.axis = axis;
    r.model_name = gateway.endpoint().display_name();
    r.condition_label = condition.label();
    r.notes.push_back("balanced slice is empty; panel skipped");
    return r;
  }
  return swap_panel(Panel::kShortcut, cohort, forge, axis, gateway, condition,
                    options, &slice);
}

std::pair<ConditionSpec, ConditionSpec> complementarity_conditions(
    double dropout, std::uint64_t seed) {
  ConditionSpec beliefs;
  beliefs.belief_source = BeliefSource::kImputed;
  beliefs.dropout_fraction = dropout;
  beliefs.seed = seed;
  ConditionSpec with_demo = beliefs;
  with_demo.use_demographics = true;
  return {beliefs, with_demo};
}

PanelResult complementarity_panel(const Cohort& cohort,
                                  const PromptForge& forge, Axis axis,
                                  Gateway& gateway,
                                  const PanelOptions& options) {
  require_axis(cohort, axis);
  const auto [a, b] = complementarity_conditions(options.dropout, options.seed);
  a.validate();
  std::vector<PromptJob> jobs;
  for (const Participant& p : cohort.participants()) {
    const auto g = p.group(axis);
    if (!g) continue;
    for (const std::string& cid : p.evaluation_claims) {
      const Claim& claim = *cohort.find_claim(cid);
      jobs.push_back({forge.render_as(p, claim, a, std::nullopt, *g), *g});
      jobs.push_back({forge.render_as(p, claim, b, *g, *g), *g});
    }
  }
  PanelResult r = run_pairs(Panel::kComplementarity, axis, gateway,
                            std::move(jobs), b.label(), options);
  if (!r.empty) {
    std::size_t ok_a = 0, ok_b = 0;
    for (const SwapPair& pair : r.pairs) {
      const auto pa = verdict_label(pair.base.predicted_label);
      const auto pb = verdict_label(pair.swapped.predicted_label);
      if (!pa || !pb) continue;
      const Label truth =
          cohort.find_judgment(pair.pid, pair.claim_id)->participant_choice;
      if (*pa == truth) ++ok_a;
      if (*pb == truth) ++ok_b;
    }
    const double n = static_cast<double>(r.n_pairs);
    r.accuracy_delta = static_cast<double>(ok_b) / n - static_cast<double>(ok_a) / n;
  }
  return r;
}

std::vector<std::string> flag_keywords(std::string_view text,
                                       std::span<const std::string> keywords) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    const unsigned char u = static_cast<unsigned char>(ch);
    if (std::isalnum(u)) {
      cur.push_back(static_cast<char>(std::tolower(u)));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  std::vector<std::string> hits;
  for (const std::string& k : keywords) {
    const std::string lk = to_lower(k);
    if (std::find(words.begin(), words.end(), lk) != words.end()) {
      hits.push_back(k);
    }
  }
  return hits;
}

}  // namespace credence
