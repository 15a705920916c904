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

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "credence/checkpoint.hpp"
#include "credence/error.hpp"
#include "credence/pipeline.hpp"
#include "credence/report.hpp"

namespace {

enum Exit : int {
  kOk = 0,
  kOtherError = 1,
  kConfigError = 2,
  kTransportExhausted = 3,
  kValidationFailure = 4,
};

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool resume = false;
  bool mock = false;
  std::string out;
  std::optional<std::size_t> max_new_requests;
  std::string adapter;  // train-head: checkpoint to load
};

credence::Pipeline open_pipeline(const Flags& f, bool issues_requests = true) {
  credence::RunConfig cfg = credence::load_config(f.config);
  credence::PipelineOptions po;
  po.force_mock = f.mock;
  // A populated cache is only stale for commands that send requests.
  po.resume = f.resume || !issues_requests;
  po.seed = f.seed;
  if (!f.out.empty()) po.out_dir = f.out;
  po.max_new_requests = f.max_new_requests;
  return credence::Pipeline(std::move(cfg), po);
}

int finish(credence::Pipeline& p, credence::ReportBundle& bundle) {
  p.fill_manifest(bundle);
  const auto written = credence::emit_report(bundle, p.output_dir());
  std::cout << "wrote " << written.size() << " files to "
            << p.output_dir().string() << "\n";
  if (p.transport_failed(bundle)) {
    std::cerr << bundle.failures.size()
              << " items failed after retries; see failures.csv\n";
    return kTransportExhausted;
  }
  return kOk;
}

int run(const std::string& command, const Flags& f) {
  if (command == "validate") {
    credence::Pipeline p = open_pipeline(f, false);
    std::cout << "config ok: " << p.datasets().size() << " datasets, "
              << p.beliefs().question_count() << " survey questions, "
              << p.beliefs().distribution_count() << " distributions, "
              << p.gateways().size() << " endpoints, " << p.settings().size()
              << " settings\n";
    for (const auto& ds : p.datasets()) {
      const auto& s = ds.cohort.stats();
      std::cout << "  " << ds.name << ": " << ds.cohort.participants().size()
                << " participants, " << s.evaluation_instances
                << " evaluation instances, "
                << s.excluded_middle_age_participants
                << " middle-age participants excluded\n";
      for (const auto& w : s.warnings) std::cout << "  warning: " << w << "\n";
    }
    return kOk;
  }

  credence::Pipeline p = open_pipeline(f);
  credence::ReportBundle bundle;
  if (command == "sweep") {
    p.run_sweeps(bundle);
  } else if (command == "counterfactual") {
    p.run_panels(bundle);
  } else if (command == "thematic") {
    p.run_sweeps(bundle);
    p.run_thematic(bundle);
  } else if (command == "train-adapter") {
    const credence::Phase1Result r = p.train_adapter(bundle);
    std::filesystem::create_directories(p.output_dir());
    const auto file = p.output_dir() / "adapter.json";
    credence::save_adapter(file, r.adapter, p.config().adapter.phase1);
    std::cout << "adapter: " << r.steps << " steps, final mean KL "
              << r.epoch_loss.back() << ", saved to " << file.string() << "\n";
  } else if (command == "train-head") {
    if (!f.adapter.empty()) {
      p.train_heads(bundle, credence::load_adapter(f.adapter));
    } else {
      const credence::Phase1Result r = p.train_adapter(bundle);
      p.train_heads(bundle, r.adapter);
    }
  } else if (command == "report") {
    bundle = p.run_all();
  } else {
    std::cerr << "unknown command " << command << "\n";
    return kConfigError;
  }
  return finish(p, bundle);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persona-conditioned misinformation susceptibility simulation"};
  app.require_subcommand(1, 1);
  Flags flags;
  std::uint64_t seed = 0;
  std::size_t max_new = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "Run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_flag("--resume", flags.resume, "Reuse a populated response cache");
    sub->add_flag("--mock", flags.mock,
                  "Replace live endpoints with the deterministic mock");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--max-new-requests", max_new,
                    "Stop after this many uncached requests");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"validate", "Load and check the configuration and all inputs"},
      {"sweep", "Run the condition x model sweep and write alignment tables"},
      {"counterfactual", "Run the utility, shortcut and complementarity panels"},
      {"train-adapter", "Train the belief adapter and save a checkpoint"},
      {"train-head", "Train the susceptibility head on a frozen adapter"},
      {"thematic", "Topic model the claims and report demographic gaps"},
      {"report", "Run every stage and write the full report"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub);
    if (std::string(name) == "train-head") {
      sub->add_option("--adapter", flags.adapter, "Adapter checkpoint to load")
          ->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->count("--seed")) flags.seed = seed;
  if (chosen->count("--max-new-requests")) flags.max_new_requests = max_new;

  try {
    return run(chosen->get_name(), flags);
  } catch (const credence::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const credence::TransportError& e) {
    std::cerr << "transport error: " << e.what() << "\n";
    return kTransportExhausted;
  } catch (const credence::ParseError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const credence::ValidationError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const credence::TrainingError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const credence::CapabilityError& e) {
    std::cerr << "validation failure: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOtherError;
  }
}
