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

#include "credence/report.hpp"

#include <fstream>
#include <sstream>

#include "credence/error.hpp"
#include "credence/prompt_forge.hpp"
#include "credence/text.hpp"
#include "csv.hpp"

namespace credence {
namespace {

constexpr int kDecimals = 6;

std::string num(double v) { return format_fixed(v, kDecimals); }
std::string num(const std::optional<double>& v) {
  return v ? format_fixed(*v, kDecimals) : "NA";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string> header) {
    row(std::vector<std::string>(header));
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << csv::escape(fields[i]);
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string opt_group(const std::optional<Group>& g) {
  return g ? std::string(group_name(*g)) : "";
}
std::string opt_axis(const std::optional<Axis>& a) {
  return a ? std::string(axis_name(*a)) : "";
}

std::string accuracy_matrix(const ReportBundle& b) {
  std::ostringstream head;
  std::vector<std::string> header = {"setting", "model", "axis"};
  for (const auto& d : b.datasets) {
    header.push_back(d + "_accuracy");
    header.push_back(d + "_accuracy_unweighted");
    header.push_back(d + "_n");
    header.push_back(d + "_condition");
    header.push_back(d + "_veracity");
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << csv::escape(header[i]);
  }
  out << '\n';
  for (const auto& s : b.settings) {
    for (const auto& m : b.models) {
      for (Axis a : b.axes) {
        std::vector<std::string> row = {s, m, std::string(axis_name(a))};
        for (const auto& d : b.datasets) {
          const AccuracyCell* cell = nullptr;
          for (const auto& c : b.cells) {
            if (c.dataset == d && c.setting == s && c.model == m && c.axis == a) {
              cell = &c;
              break;
            }
          }
          if (!cell || !cell->aggregate) {
            row.insert(row.end(), {"NA", "NA", "0", cell ? cell->condition_label : "", "NA"});
            continue;
          }
          row.push_back(num(cell->aggregate->weighted_accuracy));
          row.push_back(num(cell->aggregate->unweighted_accuracy));
          row.push_back(std::to_string(cell->aggregate->n_evaluated));
          row.push_back(cell->condition_label);
          row.push_back(num(cell->veracity));
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
          out << (i ? "," : "") << csv::escape(row[i]);
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

std::string group_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "setting", "condition", "condition_fingerprint",
               "model", "axis", "group", "n_requested", "n_evaluated",
               "n_unparseable", "accuracy", "macro_f1", "unparseable_rate",
               "run_mean", "run_std", "veracity", "empty"});
  for (const auto& g : b.groups) {
    const auto& r = g.result;
    w.row({g.dataset, g.setting, r.condition_label, r.condition_fingerprint,
           r.model_name, opt_axis(r.axis), opt_group(r.group),
           std::to_string(r.n_requested), std::to_string(r.n_evaluated),
           std::to_string(r.n_unparseable),
           r.empty ? "NA" : num(r.accuracy), r.empty ? "NA" : num(r.macro_f1),
           num(r.unparseable_rate), r.empty ? "NA" : num(r.run_mean),
           r.empty ? "NA" : num(r.run_std), num(g.veracity),
           r.empty ? "true" : "false"});
  }
  return w.str();
}

std::string panel_table(const ReportBundle& b) {
  CsvWriter w({"panel", "dataset", "axis", "model", "condition", "flip_rate",
               "accuracy_delta", "n_pairs", "n_excluded", "empty"});
  for (const auto& p : b.panels) {
    const auto& r = p.result;
    w.row({std::string(panel_name(r.panel)), p.dataset,
           std::string(axis_name(r.axis)), r.model_name, r.condition_label,
           r.empty ? "NA" : num(r.flip_rate), num(r.accuracy_delta),
           std::to_string(r.n_pairs), std::to_string(r.n_excluded),
           r.empty ? "true" : "false"});
  }
  return w.str();
}

std::string bin_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "setting", "model", "bin", "bin_name", "n",
               "correct", "accuracy"});
  for (const auto& r : b.bins) {
    w.row({r.dataset, r.setting, r.model, std::to_string(r.bin),
           entropy_bin_name(r.bin), std::to_string(r.accuracy.n),
           std::to_string(r.accuracy.correct), num(r.accuracy.accuracy)});
  }
  return w.str();
}

std::string confidence_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "setting", "model", "spearman_rho", "n_records"});
  for (const auto& r : b.confidence) {
    w.row({r.dataset, r.setting, r.model, r.rho ? num(*r.rho) : "undefined",
           std::to_string(r.n_records)});
  }
  return w.str();
}

std::string topic_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "setting", "model", "topic", "top_terms", "axis",
               "accuracy_first", "accuracy_second", "n_first", "n_second",
               "gap_ppts", "low_support"});
  for (const auto& r : b.topics) {
    std::string terms;
    for (std::size_t i = 0; i < r.top_terms.size(); ++i) {
      terms += (i ? " " : "") + r.top_terms[i];
    }
    w.row({r.dataset, r.setting, r.model, std::to_string(r.gap.topic), terms,
           std::string(axis_name(r.gap.axis)), num(r.gap.accuracy_first),
           num(r.gap.accuracy_second), std::to_string(r.gap.n_first),
           std::to_string(r.gap.n_second), num(r.gap.gap_ppts),
           r.gap.low_support ? "true" : "false"});
  }
  return w.str();
}

std::string stat_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "model", "setting_a", "setting_b", "n_pairs", "t",
               "t_p", "t_degenerate", "z_axis", "z", "z_p", "z_degenerate"});
  auto stat = [](const std::optional<TestResult>& t) {
    if (!t) return std::vector<std::string>{"NA", "NA", ""};
    const std::string s = std::isinf(t->statistic)
                              ? (t->statistic > 0 ? "inf" : "-inf")
                              : num(t->statistic);
    return std::vector<std::string>{s, num(t->p_value),
                                    t->degenerate ? "true" : "false"};
  };
  for (const auto& r : b.stats) {
    std::vector<std::string> row = {r.dataset, r.model, r.setting_a,
                                    r.setting_b, std::to_string(r.n_pairs)};
    for (auto& f : stat(r.t_test)) row.push_back(f);
    row.push_back(r.z_axis);
    for (auto& f : stat(r.z_test)) row.push_back(f);
    w.row(row);
  }
  return w.str();
}

std::string ft_table(const ReportBundle& b) {
  CsvWriter w({"dataset", "embedding_model", "axis", "phase1_kl",
               "phase1_steps", "n_train", "n_validation", "val_accuracy",
               "val_macro_f1", "zero_flip_rate", "zero_prob_delta",
               "zero_acc_drop", "swap_flip_rate", "swap_prob_delta",
               "swap_acc_drop"});
  auto metrics = [](const std::optional<ShortcutMetrics>& m) {
    if (!m) return std::vector<std::string>{"NA", "NA", "NA"};
    return std::vector<std::string>{num(m->flip_rate), num(m->prob_delta),
                                    num(m->acc_drop)};
  };
  for (const auto& r : b.ft) {
    std::vector<std::string> row = {
        r.dataset, r.embedding_model, std::string(axis_name(r.axis)),
        num(r.phase1_kl), std::to_string(r.phase1_steps),
        std::to_string(r.n_train), std::to_string(r.validation.n),
        num(r.validation.accuracy), num(r.validation.macro_f1)};
    for (auto& f : metrics(r.zero)) row.push_back(f);
    for (auto& f : metrics(r.swap)) row.push_back(f);
    w.row(row);
  }
  return w.str();
}

std::string failure_table(const ReportBundle& b) {
  CsvWriter w({"pid", "claim_id", "condition", "model", "run", "fingerprint",
               "error"});
  for (const auto& f : b.failures) {
    w.row({f.pid, f.claim_id, f.condition_label, f.model_name,
           std::to_string(f.run), f.fingerprint, f.error});
  }
  return w.str();
}

std::string record_dump(const ReportBundle& b) {
  std::string out;
  for (const auto& r : b.records) out += canonical_record(r) + "\n";
  return out;
}

std::string summary(const ReportBundle& b) {
  std::ostringstream md;
  const Manifest& m = b.manifest;
  md << "# Run summary\n\n## Manifest\n\n";
  md << "- seed: " << m.seed << "\n";
  md << "- runs: " << m.runs << "\n";
  md << "- temperature: " << num(m.temperature) << "\n";
  md << "- rng: mt19937_64\n";
  md << "- divergence bases: KL in nats, JS in bits\n";
  md << "- distribution_decimals: " << kDistributionDecimals << "\n";
  md << "- records: " << m.records << "\n";
  md << "- cache hits: " << m.cache_hits << "\n";
  md << "- cache hit rate: "
     << (m.records ? num(static_cast<double>(m.cache_hits) /
                         static_cast<double>(m.records))
                   : std::string("NA"))
     << "\n";
  md << "- failures: " << m.failures << "\n";
  md << "\n### Endpoints\n\n";
  if (m.endpoints.empty()) md << "no data\n";
  for (const auto& e : m.endpoints) md << "- " << e << "\n";
  md << "\n### Datasets\n\n";
  if (m.datasets.empty()) md << "no data\n";
  for (const auto& d : m.datasets) md << "- " << d << "\n";
  md << "\n### Conditions\n\n";
  if (m.conditions.empty()) md << "no data\n";
  for (const auto& [label, fp] : m.conditions) {
    md << "- `" << label << "` " << fp.substr(0, 16) << "\n";
  }
  if (!m.notes.empty()) {
    md << "\n### Notes\n\n";
    for (const auto& n : m.notes) md << "- " << n << "\n";
  }

  md << "\n## Susceptibility alignment\n\n";
  bool any = false;
  for (const auto& c : b.cells) any = any || c.aggregate.has_value();
  if (!any) {
    md << "no data\n";
  } else {
    md << "| dataset | setting | model | axis | accuracy | unweighted | n |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& c : b.cells) {
      if (!c.aggregate) continue;
      md << "| " << c.dataset << " | " << c.setting << " | " << c.model << " | "
         << axis_name(c.axis) << " | " << num(c.aggregate->weighted_accuracy)
         << " | " << num(c.aggregate->unweighted_accuracy) << " | "
         << c.aggregate->n_evaluated << " |\n";
    }
  }

  md << "\n## Counterfactual panels\n\n";
  if (b.panels.empty()) {
    md << "no data\n";
  } else {
    md << "| panel | dataset | axis | model | flip rate (%) | accuracy delta | pairs |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& p : b.panels) {
      const auto& r = p.result;
      md << "| " << panel_name(r.panel) << " | " << p.dataset << " | "
         << axis_name(r.axis) << " | " << r.model_name << " | "
         << (r.empty ? "NA" : num(r.flip_rate)) << " | "
         << num(r.accuracy_delta) << " | " << r.n_pairs << " |\n";
    }
  }

  md << "\n## Entropy bins\n\n";
  if (b.bins.empty()) {
    md << "no data\n";
  } else {
    md << "| dataset | setting | model | bin | n | accuracy |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& r : b.bins) {
      md << "| " << r.dataset << " | " << r.setting << " | " << r.model << " | "
         << entropy_bin_name(r.bin) << " | " << r.accuracy.n << " | "
         << num(r.accuracy.accuracy) << " |\n";
    }
  }

  md << "\n## Survey divergence\n\n";
  if (b.survey.empty()) {
    md << "no data\n";
  } else {
    md << "| axis | modal disagreement (%) | mean JS (bits) |\n|---|---|---|\n";
    for (const auto& s : b.survey) {
      md << "| " << axis_name(s.axis) << " | " << num(s.modal_disagreement_pct)
         << " | " << num(s.mean_js_bits) << " |\n";
    }
  }

  md << "\n## Significance tests\n\n";
  if (b.stats.empty()) {
    md << "no data\n";
  } else {
    md << "See stats.csv (" << b.stats.size() << " comparisons).\n";
  }

  md << "\n## Thematic analysis\n\n";
  if (b.topics.empty()) {
    md << "no data\n";
  } else {
    md << "See topics.csv (" << b.topics.size() << " rows).\n";
  }

  md << "\n## Fine-tuned head\n\n";
  if (b.ft.empty()) {
    md << "no data\n";
  } else {
    md << "| dataset | axis | phase-1 KL | val accuracy | val macro-F1 | zero flip | swap flip |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : b.ft) {
      md << "| " << r.dataset << " | " << axis_name(r.axis) << " | "
         << num(r.phase1_kl) << " | " << num(r.validation.accuracy) << " | "
         << num(r.validation.macro_f1) << " | "
         << (r.zero ? num(r.zero->flip_rate) : "NA") << " | "
         << (r.swap ? num(r.swap->flip_rate) : "NA") << " |\n";
    }
  }

  md << "\n## Failures\n\n";
  if (b.failures.empty()) {
    md << "none\n";
  } else {
    md << b.failures.size() << " items failed; see failures.csv.\n";
  }
  return md.str();
}

}  // namespace

std::optional<std::size_t> pick_best(std::span<const AxisAggregate> candidates) {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].weighted_accuracy > candidates[best].weighted_accuracy) {
      best = i;
    }
  }
  return best;
}

std::map<std::string, std::string> render_report(const ReportBundle& b) {
  return {{"accuracy_matrix.csv", accuracy_matrix(b)},
          {"groups.csv", group_table(b)},
          {"panels.csv", panel_table(b)},
          {"entropy_bins.csv", bin_table(b)},
          {"confidence.csv", confidence_table(b)},
          {"topics.csv", topic_table(b)},
          {"stats.csv", stat_table(b)},
          {"ft.csv", ft_table(b)},
          {"failures.csv", failure_table(b)},
          {"records.ndjson", record_dump(b)},
          {"summary.md", summary(b)}};
}

std::vector<std::filesystem::path> emit_report(
    const ReportBundle& bundle, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw Error("cannot create report directory " + out_dir.string() + ": " +
                ec.message());
  }
  std::vector<std::filesystem::path> written;
  for (const auto& [name, content] : render_report(bundle)) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) throw Error("failed to write report file " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace credence
