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

#include "credence/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "credence/counterfactual.hpp"
#include "credence/error.hpp"
#include "credence/http_backend.hpp"
#include "credence/mock_backend.hpp"
#include "credence/rng.hpp"
#include "credence/sim_runner.hpp"
#include "credence/stats.hpp"
#include "credence/text.hpp"
#include "credence/topics.hpp"

namespace credence {
namespace {

constexpr std::size_t kEmbedChunk = 64;

std::string cache_file_name(const std::string& model) {
  std::string out;
  for (char c : model) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.'
                      ? c
                      : '_');
  }
  return out + ".ndjson";
}

std::uint64_t text_seed(std::string_view text) {
  const Digest d = sha256(text);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | d[static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::string head_input_text(const Participant& participant, const Claim& claim,
                            const Cohort& cohort) {
  std::string text = "Claim: " + claim.text;
  std::size_t used = 0;
  for (const ObservedBelief& b : participant.observed_beliefs) {
    if (used == 2) break;
    const Claim* c = cohort.find_claim(b.claim_id);
    if (!c) continue;
    text += " Previously judged \"" + c->text + "\" as " +
            std::string(label_name(b.judged_label)) + ".";
    ++used;
  }
  return text;
}

std::shared_ptr<Backend> make_backend(const EndpointEntry& entry,
                                      std::size_t mock_embedding_dim) {
  if (entry.mock.empty()) return std::make_shared<HttpBackend>(entry.endpoint);
  MockOptions mo;
  mo.embedding_dim = mock_embedding_dim;
  if (entry.mock == "demographics_blind") {
    mo.responder = MockBackend::demographics_blind();
  } else if (entry.mock.rfind("keyed:", 0) == 0) {
    mo.responder = MockBackend::keyed_on_token(entry.mock.substr(6));
  } else if (entry.mock.rfind("constant:", 0) == 0) {
    mo.responder = MockBackend::constant(entry.mock.substr(9));
  } else {
    throw ConfigError("unknown mock responder '" + entry.mock + "'");
  }
  return std::make_shared<MockBackend>(std::move(mo));
}

Pipeline::Pipeline(RunConfig config, PipelineOptions options)
    : config_(std::move(config)), options_(std::move(options)) {
  config_.validate();
  seed_ = options_.seed.value_or(config_.seed);

  if (!config_.survey_questions.empty()) {
    std::vector<std::filesystem::path> dists;
    for (const auto& d : config_.survey_distributions) {
      dists.push_back(config_.resolve(d));
    }
    beliefs_ = BeliefStore::load(config_.resolve(config_.survey_questions), dists);
  }

  std::map<std::string, int> name_count;
  for (const DatasetEntry& entry : config_.datasets) {
    CohortOptions co;
    co.held_out_per_participant = config_.held_out_per_participant;
    std::string name(dataset_name(entry.kind));
    if (++name_count[name] > 1) name += "_" + std::to_string(name_count[name]);
    datasets_.push_back(
        {name, entry, Cohort::load(config_.resolve(entry.path), entry.kind, co)});
  }

  if (config_.settings.empty()) {
    settings_ = primary_settings(seed_);
  } else {
    for (const auto& name : config_.settings) settings_.push_back(*find_setting(name, seed_));
  }

  const std::filesystem::path cache_dir = config_.resolve(config_.cache_dir);
  std::error_code ec;
  std::filesystem::create_directories(cache_dir, ec);
  if (ec) {
    throw ConfigError("cannot create cache directory " + cache_dir.string() +
                      ": " + ec.message());
  }
  GatewayOptions go;
  go.max_retries = config_.max_retries;
  go.backoff_base = std::chrono::milliseconds(config_.backoff_ms);
  std::set<std::string> names;
  for (EndpointEntry entry : config_.endpoints) {
    if (options_.force_mock && entry.mock.empty()) entry.mock = "demographics_blind";
    const std::string name = entry.endpoint.display_name();
    if (!names.insert(name).second) {
      throw ConfigError("duplicate endpoint name '" + name + "'");
    }
    const auto file = cache_dir / cache_file_name(name);
    if (!options_.resume && std::filesystem::exists(file) &&
        std::filesystem::file_size(file) > 0) {
      throw ConfigError("cache " + file.string() +
                        " already has entries; pass --resume to reuse them");
    }
    auto cache = std::make_shared<ResponseCache>(file);
    gateways_.push_back(std::make_unique<Gateway>(
        entry.endpoint, make_backend(entry, config_.adapter.mock_embedding_dim),
        cache, go));
  }

  if (!config_.adapter.embeddings.empty()) {
    embeddings_ = EmbeddingTable::load(config_.resolve(config_.adapter.embeddings));
  }
}

Pipeline::~Pipeline() = default;

std::filesystem::path Pipeline::output_dir() const {
  return options_.out_dir ? *options_.out_dir : config_.resolve(config_.output_dir);
}

std::vector<Gateway*> Pipeline::gateways() const {
  std::vector<Gateway*> out;
  for (const auto& g : gateways_) out.push_back(g.get());
  return out;
}

std::vector<Axis> Pipeline::axes_for(const Cohort& cohort) const {
  std::vector<Axis> out;
  const std::vector<Axis> wanted =
      config_.axes.empty() ? std::vector<Axis>(kAllAxes.begin(), kAllAxes.end())
                           : config_.axes;
  for (Axis a : wanted) {
    if (cohort.axis_available(a)) out.push_back(a);
  }
  return out;
}

void Pipeline::run_sweeps(ReportBundle& bundle) {
  for (Gateway* g : gateways()) bundle.models.push_back(g->endpoint().display_name());
  for (const auto& s : settings_) bundle.settings.push_back(s.name);
  bundle.axes = config_.axes.empty()
                    ? std::vector<Axis>(kAllAxes.begin(), kAllAxes.end())
                    : config_.axes;

  // Deduplicated conditions in settings order.
  std::vector<ConditionSpec> conditions;
  std::set<std::string> seen;
  for (const Setting& s : settings_) {
    for (const ConditionSpec& c : expand_setting(s)) {
      if (seen.insert(c.fingerprint()).second) conditions.push_back(c);
    }
  }

  for (DatasetHandle& ds : datasets_) {
    bundle.datasets.push_back(ds.name);
    const PromptForge forge(beliefs_, ds.cohort);
    const auto axes = axes_for(ds.cohort);
    for (Gateway* gw : gateways()) {
      const std::string model = gw->endpoint().display_name();

      // Per-claim factual confidence for the probe; gold-fake claims only.
      std::map<std::string, double, std::less<>> confidence;
      for (const Claim& c : ds.cohort.claims()) {
        if (c.gold_label != Label::kFake) continue;
        try {
          confidence[c.claim_id] = gw->factual_confidence(c, seed_).value;
        } catch (const TransportError& e) {
          bundle.failures.push_back({"", c.claim_id, "factual-confidence", model,
                                     0, e.fingerprint(), e.what()});
        } catch (const CapabilityError& e) {
          bundle.manifest.notes.push_back(model + ": " + e.what());
          break;
        }
      }

      for (std::size_t ai = 0; ai < axes.size(); ++ai) {
        const Axis axis = axes[ai];
        SweepOptions so;
        so.runs = config_.runs;
        so.base_seed = seed_;
        so.temperature = config_.temperature;
        so.axis = axis;
        so.max_new_requests = options_.max_new_requests;
        so.workers = options_.workers;
        Gateway* one[] = {gw};
        SweepResult sweep = run_sweep(ds.cohort, forge, conditions, one, so);
        records_total_ += sweep.records.size();
        cache_hits_ += sweep.cache_hits;
        for (auto& f : sweep.failures) bundle.failures.push_back(f);
        if (sweep.interrupted) {
          bundle.manifest.notes.push_back("sweep stopped after the request budget (" +
                                          ds.name + ", " + std::string(axis_name(axis)) +
                                          ", " + model + ")");
        }

        std::map<std::string, std::vector<PredictionRecord>> by_condition;
        for (const auto& r : sweep.records) by_condition[r.condition_fingerprint].push_back(r);

        for (const Setting& setting : settings_) {
          const auto expanded = expand_setting(setting);
          std::vector<AxisAggregate> aggs;
          std::vector<const ConditionSpec*> with_agg;
          for (const ConditionSpec& c : expanded) {
            auto it = by_condition.find(c.fingerprint());
            if (it == by_condition.end()) continue;
            const auto groups = group_results(it->second, ds.cohort);
            const auto agg = aggregate_axes(groups);
            if (agg.empty()) continue;
            aggs.push_back(agg.front());
            with_agg.push_back(&c);
          }
          AccuracyCell cell;
          cell.dataset = ds.name;
          cell.setting = setting.name;
          cell.model = model;
          cell.axis = axis;
          cell.condition_label = expanded.front().label();
          const ConditionSpec* chosen = &expanded.front();
          if (const auto best = pick_best(aggs)) {
            cell.aggregate = aggs[*best];
            chosen = with_agg[*best];
            cell.condition_label = chosen->label();
          }
          const auto& recs = by_condition[chosen->fingerprint()];
          cell.veracity = veracity_accuracy(recs, ds.cohort);
          bundle.cells.push_back(cell);
          for (const auto& g : group_results(recs, ds.cohort)) {
            std::vector<PredictionRecord> mine;
            for (const auto& r : recs) {
              if (r.group == g.group) mine.push_back(r);
            }
            bundle.groups.push_back(
                {ds.name, setting.name, g, veracity_accuracy(mine, ds.cohort)});
          }
          auto& kept = chosen_records_[{ds.name, setting.name, model}];
          kept.insert(kept.end(), recs.begin(), recs.end());

          // Bin and confidence tables use the first axis only, so each
          // (participant, claim) enters once.
          if (ai == 0 && !recs.empty()) {
            for (const auto& [bin, acc] : accuracy_by_entropy_bin(recs, ds.cohort)) {
              bundle.bins.push_back({ds.name, setting.name, model, bin, acc});
            }
            ConfidenceRow row{ds.name, setting.name, model, std::nullopt, 0};
            for (const auto& r : recs) {
              const Claim* c = ds.cohort.find_claim(r.claim_id);
              if (c && c->gold_label == Label::kFake && confidence.count(r.claim_id) &&
                  verdict_label(r.predicted_label)) {
                ++row.n_records;
              }
            }
            row.rho = confidence_alignment_rho(recs, ds.cohort, confidence);
            bundle.confidence.push_back(row);
          }
        }
        for (auto& r : sweep.records) bundle.records.push_back(std::move(r));
      }

      // Each setting against zero-shot: paired t over matched group
      // accuracies, z over pooled counts on the first axis.
      for (const Setting& setting : settings_) {
        if (setting.name == "zero-shot") continue;
        StatRow row;
        row.dataset = ds.name;
        row.model = model;
        row.setting_a = setting.name;
        row.setting_b = "zero-shot";
        std::vector<double> a, b;
        for (const GroupRow& ga : bundle.groups) {
          if (ga.dataset != ds.name || ga.setting != setting.name ||
              ga.result.model_name != model || ga.result.empty) {
            continue;
          }
          for (const GroupRow& gb : bundle.groups) {
            if (gb.dataset == ds.name && gb.setting == "zero-shot" &&
                gb.result.model_name == model && !gb.result.empty &&
                gb.result.axis == ga.result.axis && gb.result.group == ga.result.group) {
              a.push_back(ga.result.accuracy);
              b.push_back(gb.result.accuracy);
            }
          }
        }
        row.n_pairs = a.size();
        if (a.size() >= 2) row.t_test = paired_t_test(a, b);
        if (!axes.empty()) {
          row.z_axis = std::string(axis_name(axes.front()));
          const AccuracyCell* ca = nullptr;
          const AccuracyCell* cb = nullptr;
          for (const auto& c : bundle.cells) {
            if (c.dataset != ds.name || c.model != model || c.axis != axes.front()) continue;
            if (c.setting == setting.name) ca = &c;
            if (c.setting == "zero-shot") cb = &c;
          }
          if (ca && cb && ca->aggregate && cb->aggregate) {
            auto correct = [](const AxisAggregate& g) {
              return static_cast<std::size_t>(
                  std::llround(g.weighted_accuracy * static_cast<double>(g.n_evaluated)));
            };
            row.z_test = two_proportion_z_test(correct(*ca->aggregate),
                                               ca->aggregate->n_evaluated,
                                               correct(*cb->aggregate),
                                               cb->aggregate->n_evaluated);
          }
        }
        if (row.t_test || row.z_test) bundle.stats.push_back(row);
      }
    }
  }

  for (Axis axis : bundle.axes) {
    SurveyRow row;
    row.axis = axis;
    try {
      row.modal_disagreement_pct = modal_disagreement(beliefs_, axis);
      row.mean_js_bits = mean_js_divergence_bits(beliefs_, axis);
    } catch (const ValidationError&) {
    }
    bundle.survey.push_back(row);
  }
}

void Pipeline::run_panels(ReportBundle& bundle) {
  PanelOptions po;
  po.seed = seed_;
  po.temperature = config_.temperature;
  po.epsilon = config_.panels.epsilon;
  po.min_n = config_.panels.min_n;
  po.dropout = config_.panels.dropout;
  po.swap_beliefs = config_.panels.swap_beliefs;
  po.workers = options_.workers;
  for (DatasetHandle& ds : datasets_) {
    const PromptForge forge(beliefs_, ds.cohort);
    for (Axis axis : axes_for(ds.cohort)) {
      for (Gateway* gw : gateways()) {
        auto keep = [&](PanelResult r) {
          for (auto& f : r.failures) bundle.failures.push_back(f);
          r.failures.clear();
          bundle.panels.push_back({ds.name, std::move(r)});
        };
        if (config_.panels.utility) {
          keep(utility_panel(ds.cohort, forge, axis, *gw, demo_only_condition(), po));
        }
        if (config_.panels.shortcut) {
          keep(shortcut_panel(ds.cohort, forge, axis, *gw, demo_only_condition(), po));
        }
        if (config_.panels.complementarity && beliefs_.distribution_count() > 0) {
          keep(complementarity_panel(ds.cohort, forge, axis, *gw, po));
        }
      }
    }
  }
}

void Pipeline::run_thematic(ReportBundle& bundle) {
  for (DatasetHandle& ds : datasets_) {
    const auto& claims = ds.cohort.claims();
    if (static_cast<std::size_t>(config_.thematic.k) > claims.size()) {
      bundle.manifest.notes.push_back("thematic analysis skipped for " + ds.name +
                                      ": fewer claims than topics");
      continue;
    }
    NmfOptions no;
    no.k = config_.thematic.k;
    no.iterations = config_.thematic.iterations;
    no.seed = config_.thematic.seed;
    const TopicModel model = nmf_topics(claims, no);
    for (const std::string& setting : bundle.settings) {
      for (const std::string& m : bundle.models) {
        auto it = chosen_records_.find({ds.name, setting, m});
        if (it == chosen_records_.end()) continue;
        for (const TopicGap& gap :
             topic_demographic_gaps(model, it->second, ds.cohort)) {
          bundle.topics.push_back(
              {ds.name, setting, m, gap, model.top_terms(gap.topic, 5)});
        }
      }
    }
  }
}

std::vector<std::vector<float>> Pipeline::embed(const std::vector<std::string>& texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  if (embeddings_) {
    for (const auto& t : texts) {
      const auto* v = embeddings_->find(t);
      if (!v) {
        throw ValidationError("embeddings file has no vector for text: " +
                              t.substr(0, 80));
      }
      out.push_back(*v);
    }
    return out;
  }
  if (gateways_.empty()) throw ConfigError("training needs an endpoint or embeddings file");
  for (std::size_t i = 0; i < texts.size(); i += kEmbedChunk) {
    const std::vector<std::string> chunk(
        texts.begin() + static_cast<std::ptrdiff_t>(i),
        texts.begin() + static_cast<std::ptrdiff_t>(std::min(texts.size(), i + kEmbedChunk)));
    for (auto& v : gateways_.front()->embed(chunk)) out.push_back(std::move(v));
  }
  return out;
}

namespace {

Eigen::VectorXd to_eigen(const std::vector<float>& v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

}  // namespace

Phase1Result Pipeline::train_adapter(ReportBundle& bundle) {
  std::vector<std::string> texts;
  std::vector<BeliefPair> pairs;
  for (const SurveyQuestion* q : beliefs_.questions()) {
    for (Axis axis : kAllAxes) {
      for (Group g : groups_of(axis)) {
        const ResponseDistribution* d = beliefs_.find_distribution(q->qid, g);
        if (!d) continue;
        texts.push_back(adapter_input_text(g, q->text));
        pairs.push_back({Eigen::VectorXd(), d->probs, q->scale_size});
      }
    }
  }
  if (pairs.empty()) throw ValidationError("no survey distributions to train the adapter on");
  const auto vecs = embed(texts);
  for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].h = to_eigen(vecs[i]);
  Phase1Result r = phase1_train(pairs, config_.adapter.phase1);
  phase1_kl_ = r.epoch_loss.back();
  phase1_steps_ = r.steps;
  bundle.manifest.notes.push_back(
      "adapter: " + std::to_string(pairs.size()) + " pairs, " +
      std::to_string(r.steps) + " steps, final mean KL " +
      format_fixed(r.epoch_loss.back(), 6));
  return r;
}

void Pipeline::train_heads(ReportBundle& bundle, const BeliefAdapter& adapter) {
  // z_bel per group over the full, fixed probe set.
  std::map<Group, Eigen::VectorXd> z_by_group;
  const auto questions = beliefs_.questions();
  for (Axis axis : kAllAxes) {
    for (Group g : groups_of(axis)) {
      std::vector<std::string> texts;
      for (const SurveyQuestion* q : questions) texts.push_back(adapter_input_text(g, q->text));
      const auto vecs = embed(texts);
      std::vector<ProbeQuestion> probes;
      for (std::size_t i = 0; i < questions.size(); ++i) {
        probes.push_back({questions[i]->dimension, questions[i]->scale_size, to_eigen(vecs[i])});
      }
      BeliefEmbedding z = belief_embedding(adapter, probes);
      z_by_group[g] = std::move(z.z);
    }
  }

  const std::string embed_model =
      embeddings_ ? std::string("embeddings-file")
                  : (gateways_.empty() ? std::string()
                                       : gateways_.front()->endpoint().display_name());
  for (DatasetHandle& ds : datasets_) {
    for (Axis axis : axes_for(ds.cohort)) {
      std::vector<const Participant*> people;
      for (const Participant& p : ds.cohort.participants()) {
        if (p.group(axis) && !p.evaluation_claims.empty()) people.push_back(&p);
      }
      if (people.size() < 2) continue;
      Rng rng(derive_seed(config_.adapter.phase2.seed,
                          text_seed(ds.name + "/" + std::string(axis_name(axis)))));
      rng.shuffle(std::span<const Participant*>(people));
      const std::size_t n_val = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::ceil(config_.adapter.validation_fraction *
                                                static_cast<double>(people.size()))));
      std::set<std::string> val_pids;
      for (std::size_t i = 0; i < n_val && i + 1 < people.size(); ++i) {
        val_pids.insert(people[i]->pid);
      }

      std::vector<std::string> texts;
      struct Meta {
        bool val;
        Group group;
        Label label;
      };
      std::vector<Meta> meta;
      for (const Participant& p : ds.cohort.participants()) {
        const auto g = p.group(axis);
        if (!g) continue;
        for (const std::string& cid : p.evaluation_claims) {
          const Claim& c = *ds.cohort.find_claim(cid);
          texts.push_back(head_input_text(p, c, ds.cohort));
          meta.push_back({val_pids.count(p.pid) > 0, *g,
                          ds.cohort.find_judgment(p.pid, cid)->participant_choice});
        }
      }
      const auto vecs = embed(texts);
      std::vector<HeadExample> train, val;
      std::vector<ShortcutExample> shortcut;
      for (std::size_t i = 0; i < meta.size(); ++i) {
        HeadExample ex{to_eigen(vecs[i]), z_by_group.at(meta[i].group), meta[i].label};
        if (meta[i].val) {
          shortcut.push_back({ex.h, ex.z, z_by_group.at(other_group(meta[i].group)),
                              ex.label});
          val.push_back(std::move(ex));
        } else {
          train.push_back(std::move(ex));
        }
      }

      FtRow row;
      row.dataset = ds.name;
      row.embedding_model = embed_model;
      row.axis = axis;
      row.phase1_kl = phase1_kl_;
      row.phase1_steps = phase1_steps_;
      row.n_train = train.size();
      try {
        const Phase2Result r = phase2_train(train, config_.adapter.phase2, val, &adapter);
        if (!val.empty()) {
          row.validation = evaluate_head(r.head, val);
          row.zero = ft_shortcut_metrics(r.head, shortcut, Perturbation::kZero);
          row.swap = ft_shortcut_metrics(r.head, shortcut, Perturbation::kSwap);
        }
      } catch (const TrainingError& e) {
        bundle.manifest.notes.push_back("head training skipped for " + ds.name + "/" +
                                        std::string(axis_name(axis)) + ": " + e.what());
        continue;
      }
      bundle.ft.push_back(std::move(row));
    }
  }
}

void Pipeline::fill_manifest(ReportBundle& bundle) const {
  Manifest& m = bundle.manifest;
  m.seed = seed_;
  m.runs = config_.runs;
  m.temperature = config_.temperature;
  m.endpoints.clear();
  for (std::size_t i = 0; i < gateways_.size(); ++i) {
    const auto& entry = config_.endpoints[i];
    std::string mock = entry.mock;
    if (options_.force_mock && mock.empty()) mock = "demographics_blind";
    std::string line = gateways_[i]->endpoint().display_name() +
                       " (model " + entry.endpoint.model_name;
    line += mock.empty() ? ", " + entry.endpoint.base_url : ", mock " + mock;
    line += ")";
    m.endpoints.push_back(line);
  }
  m.datasets.clear();
  for (const auto& ds : datasets_) {
    const CohortStats& s = ds.cohort.stats();
    m.datasets.push_back(ds.name + ": " + std::to_string(ds.cohort.participants().size()) +
                         " participants, " + std::to_string(ds.cohort.claims().size()) +
                         " claims, " + std::to_string(s.evaluation_instances) +
                         " evaluation instances, " +
                         std::to_string(s.excluded_middle_age_participants) +
                         " middle-age participants excluded");
  }
  m.conditions.clear();
  std::set<std::string> seen;
  for (const Setting& s : settings_) {
    for (const ConditionSpec& c : expand_setting(s)) {
      if (seen.insert(c.fingerprint()).second) m.conditions.push_back({c.label(), c.fingerprint()});
    }
  }
  m.records = records_total_;
  m.cache_hits = cache_hits_;
  m.failures = bundle.failures.size();
}

ReportBundle Pipeline::run_all() {
  ReportBundle bundle;
  run_sweeps(bundle);
  run_panels(bundle);
  run_thematic(bundle);
  if (beliefs_.distribution_count() > 0) {
    const Phase1Result p1 = train_adapter(bundle);
    train_heads(bundle, p1.adapter);
  }
  fill_manifest(bundle);
  return bundle;
}

}  // namespace credence
