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

#include "credence/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "credence/error.hpp"
#include "json.hpp"

namespace credence {
namespace {

using ordered = nlohmann::ordered_json;

ordered matrix_json(const Eigen::MatrixXd& m) {
  ordered arr = ordered::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  return arr;
}

Eigen::MatrixXd matrix_from(const nlohmann::json& arr, Eigen::Index rows,
                            Eigen::Index cols, const char* name) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(rows * cols)) {
    throw ValidationError(std::string("checkpoint: ") + name +
                          " does not match its declared shape");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = arr[k++].get<double>();
  return m;
}

ordered envelope(const char* kind, const TrainHyper& hyper) {
  ordered j;
  j["format"] = "credence-checkpoint";
  j["version"] = kCheckpointVersion;
  j["kind"] = kind;
  j["seed"] = hyper.seed;
  j["hyper"] = {{"lr", hyper.lr},
                {"batch", hyper.batch},
                {"epochs", hyper.epochs},
                {"weight_decay", hyper.weight_decay},
                {"betas", {0.9, 0.999}},
                {"eps", 1e-8}};
  return j;
}

nlohmann::json open(const std::string& text, const char* kind) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  if (j.value("format", "") != "credence-checkpoint") {
    throw ValidationError("checkpoint: unknown format");
  }
  if (j.value("version", -1) != kCheckpointVersion) {
    throw ValidationError("checkpoint: unsupported version " +
                          j.value("version", nlohmann::json(-1)).dump());
  }
  if (j.value("kind", "") != kind) {
    throw ValidationError(std::string("checkpoint: expected kind ") + kind +
                          ", found " + j.value("kind", std::string("?")));
  }
  return j;
}

void write_file(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + file.string());
  out << text;
  if (!out) throw Error("write failed for checkpoint " + file.string());
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open checkpoint " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string adapter_checkpoint(const BeliefAdapter& adapter,
                               const TrainHyper& hyper) {
  ordered j = envelope("belief_adapter", hyper);
  j["shape"] = {{"bins", adapter.W.rows()}, {"d_emb", adapter.W.cols()}};
  j["frozen"] = adapter.frozen;
  j["values"] = {{"W", matrix_json(adapter.W)}, {"b", matrix_json(adapter.b)}};
  return j.dump(1) + "\n";
}

BeliefAdapter parse_adapter_checkpoint(const std::string& text) {
  const auto j = open(text, "belief_adapter");
  const auto bins = j.at("shape").at("bins").get<Eigen::Index>();
  const auto d = j.at("shape").at("d_emb").get<Eigen::Index>();
  if (bins != kAdapterBins || d < 1) {
    throw ValidationError("checkpoint: adapter shape must be 10 x d_emb");
  }
  BeliefAdapter a;
  a.W = matrix_from(j.at("values").at("W"), bins, d, "W");
  a.b = matrix_from(j.at("values").at("b"), bins, 1, "b");
  a.frozen = j.value("frozen", true);
  return a;
}

std::string head_checkpoint(const SusceptibilityHead& head,
                            const TrainHyper& hyper) {
  ordered j = envelope("susceptibility_head", hyper);
  j["shape"] = {{"classes", 2}, {"d_emb", head.d_emb}, {"d_bel", head.d_bel}};
  j["values"] = {{"U", matrix_json(head.U)}, {"c", matrix_json(head.c)}};
  return j.dump(1) + "\n";
}

SusceptibilityHead parse_head_checkpoint(const std::string& text) {
  const auto j = open(text, "susceptibility_head");
  SusceptibilityHead h;
  h.d_emb = j.at("shape").at("d_emb").get<int>();
  h.d_bel = j.at("shape").at("d_bel").get<int>();
  if (j.at("shape").at("classes").get<int>() != 2 || h.d_emb < 1 || h.d_bel < 0) {
    throw ValidationError("checkpoint: invalid head shape");
  }
  h.U = matrix_from(j.at("values").at("U"), 2, h.d_emb + h.d_bel, "U");
  h.c = matrix_from(j.at("values").at("c"), 2, 1, "c");
  return h;
}

void save_adapter(const std::filesystem::path& file,
                  const BeliefAdapter& adapter, const TrainHyper& hyper) {
  write_file(file, adapter_checkpoint(adapter, hyper));
}

BeliefAdapter load_adapter(const std::filesystem::path& file) {
  return parse_adapter_checkpoint(read_file(file));
}

void save_head(const std::filesystem::path& file,
               const SusceptibilityHead& head, const TrainHyper& hyper) {
  write_file(file, head_checkpoint(head, hyper));
}

SusceptibilityHead load_head(const std::filesystem::path& file) {
  return parse_head_checkpoint(read_file(file));
}

}  // namespace credence
