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

#include "credence/sim_runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include "credence/error.hpp"

namespace credence {
namespace {

struct Job {
  const Participant* participant;
  const Claim* claim;
  const ConditionSpec* condition;
  Gateway* gateway;
  int run;
};

double f1(std::size_t tp, std::size_t fp, std::size_t fn, bool* defined) {
  const std::size_t denom = 2 * tp + fp + fn;
  *defined = denom > 0;
  return denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
}

}  // namespace

SweepResult run_sweep(const Cohort& cohort, const PromptForge& forge,
                      std::span<const ConditionSpec> conditions,
                      std::span<Gateway* const> gateways,
                      const SweepOptions& options) {
  std::vector<Job> jobs;
  for (Gateway* gw : gateways) {
    for (const ConditionSpec& cond : conditions) {
      for (int run = 0; run < options.runs; ++run) {
        for (const Participant& p : cohort.participants()) {
          if (options.axis && !p.group(*options.axis)) continue;
          for (const std::string& cid : p.evaluation_claims) {
            jobs.push_back({&p, cohort.find_claim(cid), &cond, gw, run});
          }
        }
      }
    }
  }

  SweepResult result;
  result.planned = jobs.size();
  std::vector<std::optional<PredictionRecord>> slots(jobs.size());
  std::vector<std::optional<SweepFailure>> failed(jobs.size());
  std::vector<std::optional<PersonaPrompt>> prompts(jobs.size());

  // Render every prompt up front. Jobs repeating an earlier cache key run
  // in a second wave so that which items count as cache hits does not
  // depend on thread timing.
  std::vector<std::size_t> first_wave, second_wave;
  std::set<std::string> seen;
  auto sampling_for = [&](const Job& job) {
    Sampling sampling;
    sampling.temperature = options.temperature;
    sampling.seed = options.base_seed + static_cast<std::uint64_t>(job.run);
    return sampling;
  };
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    try {
      prompts[i] = forge.render(*job.participant, *job.claim, *job.condition,
                                options.axis);
    } catch (const ValidationError& e) {
      failed[i] = SweepFailure{job.participant->pid, job.claim->claim_id,
                               job.condition->label(),
                               job.gateway->endpoint().display_name(), job.run,
                               "", e.what()};
      continue;
    }
    const std::string key =
        job.gateway->endpoint().display_name() + "\n" +
        cache_key(job.gateway->make_request(*prompts[i], sampling_for(job)));
    (seen.insert(key).second ? first_wave : second_wave).push_back(i);
  }

  std::atomic<std::size_t> issued{0};
  std::atomic<bool> interrupted{false};
  auto execute = [&](std::size_t i) {
    const Job& job = jobs[i];
    const PersonaPrompt& prompt = *prompts[i];
    const Sampling sampling = sampling_for(job);
    try {
      if (options.max_new_requests && !job.gateway->is_cached(prompt, sampling)) {
        if (issued++ >= *options.max_new_requests) {
          interrupted = true;
          return;
        }
      }
      PredictionRecord rec = job.gateway->complete(prompt, sampling);
      rec.run = job.run;
      if (options.axis) {
        rec.axis = options.axis;
        rec.group = job.participant->group(*options.axis);
      }
      slots[i] = std::move(rec);
    } catch (const TransportError& e) {
      failed[i] = SweepFailure{job.participant->pid, job.claim->claim_id,
                               job.condition->label(),
                               job.gateway->endpoint().display_name(), job.run,
                               e.fingerprint(), e.what()};
    }
  };

  int workers = options.workers;
  if (workers <= 0) {
    workers = 1;
    for (Gateway* gw : gateways)
      workers = std::max(workers, gw->endpoint().max_inflight);
  }
  auto run_wave = [&](const std::vector<std::size_t>& wave) {
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t k = next++; k < wave.size(); k = next++) execute(wave[k]);
    };
    const int n = std::max(1, std::min<int>(workers, static_cast<int>(wave.size())));
    if (n == 1) {
      work();
    } else {
      std::vector<std::jthread> pool;
      for (int w = 0; w < n; ++w) pool.emplace_back(work);
    }
  };
  run_wave(first_wave);
  run_wave(second_wave);

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (slots[i]) {
      if (slots[i]->cached) ++result.cache_hits;
      result.records.push_back(std::move(*slots[i]));
    } else if (failed[i]) {
      result.failures.push_back(std::move(*failed[i]));
    }
  }
  result.interrupted = interrupted;
  return result;
}

AlignmentResult score_records(std::span<const PredictionRecord> records,
                              const Cohort& cohort, ScoreTarget target) {
  AlignmentResult r;
  r.n_requested = records.size();
  if (!records.empty()) {
    const auto& f = records.front();
    r.condition_fingerprint = f.condition_fingerprint;
    r.condition_label = f.condition_label;
    r.model_name = f.model_name;
    r.axis = f.axis;
    r.group = f.group;
    for (const auto& rec : records) {
      if (rec.condition_fingerprint != r.condition_fingerprint) {
        r.condition_fingerprint = "mixed";
        r.condition_label = "mixed";
      }
      if (rec.model_name != r.model_name) r.model_name = "mixed";
      if (rec.group != r.group) r.group.reset();
      if (rec.axis != r.axis) r.axis.reset();
    }
  }

  // Confusion counts with "true" as class 0 and "fake" as class 1.
  std::size_t tp[2] = {0, 0}, fp[2] = {0, 0}, fn[2] = {0, 0};
  int max_run = -1;
  for (const auto& rec : records) max_run = std::max(max_run, rec.run);
  std::vector<std::size_t> run_n(static_cast<std::size_t>(max_run + 1), 0);
  std::vector<std::size_t> run_ok(run_n.size(), 0);

  for (const auto& rec : records) {
    const ClaimJudgment* j = cohort.find_judgment(rec.pid, rec.claim_id);
    if (!j) {
      throw ValidationError("record references unknown judgment (" + rec.pid +
                            ", " + rec.claim_id + ")");
    }
    const auto predicted = verdict_label(rec.predicted_label);
    if (!predicted) {
      ++r.n_unparseable;
      continue;
    }
    const Label truth = target == ScoreTarget::kParticipantChoice
                            ? j->participant_choice
                            : j->gold_label;
    const int pc = *predicted == Label::kTrue ? 0 : 1;
    const int tc = truth == Label::kTrue ? 0 : 1;
    ++r.n_evaluated;
    ++run_n[static_cast<std::size_t>(rec.run)];
    if (pc == tc) {
      ++r.n_correct;
      ++tp[pc];
      ++run_ok[static_cast<std::size_t>(rec.run)];
    } else {
      ++fp[pc];
      ++fn[tc];
    }
  }
  r.unparseable_rate =
      r.n_requested == 0 ? 0.0
                         : static_cast<double>(r.n_unparseable) /
                               static_cast<double>(r.n_requested);
  if (r.n_evaluated == 0) {
    r.empty = true;
    return r;
  }
  r.empty = false;
  r.accuracy = static_cast<double>(r.n_correct) /
               static_cast<double>(r.n_evaluated);
  double f1_sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    bool defined = false;
    f1_sum += f1(tp[c], fp[c], fn[c], &defined);
    if (!defined) {
      r.warnings.push_back(std::string("class '") + (c == 0 ? "true" : "fake") +
                           "' absent from labels and predictions; F1 counted as 0");
    }
  }
  r.macro_f1 = f1_sum / 2.0;

  for (std::size_t k = 0; k < run_n.size(); ++k) {
    if (run_n[k] == 0) continue;
    r.run_accuracies.push_back(static_cast<double>(run_ok[k]) /
                               static_cast<double>(run_n[k]));
  }
  const double n_runs = static_cast<double>(r.run_accuracies.size());
  r.run_mean = std::accumulate(r.run_accuracies.begin(),
                               r.run_accuracies.end(), 0.0) /
               n_runs;
  if (r.run_accuracies.size() > 1) {
    double ss = 0.0;
    for (double a : r.run_accuracies) ss += (a - r.run_mean) * (a - r.run_mean);
    r.run_std = std::sqrt(ss / (n_runs - 1.0));
  }
  return r;
}

std::optional<double> veracity_accuracy(
    std::span<const PredictionRecord> records, const Cohort& cohort) {
  const AlignmentResult r = score_records(records, cohort, ScoreTarget::kGoldLabel);
  if (r.empty) return std::nullopt;
  return r.accuracy;
}

std::map<int, BinAccuracy> accuracy_by_entropy_bin(
    std::span<const PredictionRecord> records, const Cohort& cohort,
    int n_bins) {
  const auto bins = entropy_bins(cohort, n_bins);
  std::map<int, BinAccuracy> out;
  for (const auto& rec : records) {
    const ClaimJudgment* j = cohort.find_judgment(rec.pid, rec.claim_id);
    if (!j) {
      throw ValidationError("record references unknown judgment (" + rec.pid +
                            ", " + rec.claim_id + ")");
    }
    const auto predicted = verdict_label(rec.predicted_label);
    if (!predicted) continue;
    auto& b = out[bins.at(rec.claim_id)];
    ++b.n;
    if (*predicted == j->participant_choice) ++b.correct;
  }
  for (auto& [_, b] : out) {
    b.accuracy = static_cast<double>(b.correct) / static_cast<double>(b.n);
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman_rho(std::span<const double> x,
                                   std::span<const double> y) {
  if (x.size() != y.size()) {
    throw ValidationError("spearman_rho: length mismatch");
  }
  if (x.size() < 3) throw ValidationError("spearman_rho: needs >= 3 points");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> confidence_alignment_rho(
    std::span<const PredictionRecord> records, const Cohort& cohort,
    const std::map<std::string, double, std::less<>>& confidence_by_claim) {
  std::vector<double> conf, match;
  for (const auto& rec : records) {
    const ClaimJudgment* j = cohort.find_judgment(rec.pid, rec.claim_id);
    if (!j || j->gold_label != Label::kFake) continue;
    const auto predicted = verdict_label(rec.predicted_label);
    if (!predicted) continue;
    auto it = confidence_by_claim.find(rec.claim_id);
    if (it == confidence_by_claim.end()) continue;
    conf.push_back(it->second);
    match.push_back(*predicted == j->participant_choice ? 1.0 : 0.0);
  }
  if (conf.size() < 3) return std::nullopt;
  return spearman_rho(conf, match);
}

std::vector<AlignmentResult> group_results(
    std::span<const PredictionRecord> records, const Cohort& cohort) {
  using Key = std::tuple<std::string, std::string, int, int>;
  std::map<Key, std::vector<PredictionRecord>> buckets;
  for (const auto& r : records) {
    Key k{r.condition_fingerprint, r.model_name,
          r.axis ? static_cast<int>(*r.axis) : -1,
          r.group ? static_cast<int>(*r.group) : -1};
    buckets[k].push_back(r);
  }
  std::vector<AlignmentResult> out;
  for (auto& [_, recs] : buckets) {
    out.push_back(susceptibility_alignment(recs, cohort));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.condition_label, a.model_name) <
           std::tie(b.condition_label, b.model_name);
  });
  return out;
}

std::vector<AxisAggregate> aggregate_axes(
    std::span<const AlignmentResult> group_level) {
  using Key = std::tuple<std::string, std::string, int>;
  std::map<Key, std::vector<const AlignmentResult*>> buckets;
  for (const auto& r : group_level) {
    if (!r.axis || !r.group || r.empty) continue;
    buckets[{r.condition_fingerprint, r.model_name, static_cast<int>(*r.axis)}]
        .push_back(&r);
  }
  std::vector<AxisAggregate> out;
  for (const auto& [key, rs] : buckets) {
    AxisAggregate a;
    a.condition_fingerprint = std::get<0>(key);
    a.condition_label = rs.front()->condition_label;
    a.model_name = std::get<1>(key);
    a.axis = static_cast<Axis>(std::get<2>(key));
    std::size_t correct = 0;
    double acc_sum = 0.0;
    for (const auto* r : rs) {
      correct += r->n_correct;
      a.n_evaluated += r->n_evaluated;
      acc_sum += r->accuracy;
    }
    a.weighted_accuracy = static_cast<double>(correct) /
                          static_cast<double>(a.n_evaluated);
    a.unweighted_accuracy = acc_sum / static_cast<double>(rs.size());
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace credence
