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

#include <cstdint>
#include <filesystem>
#include <string>

#include "credence/adapter.hpp"

namespace credence {

inline constexpr int kCheckpointVersion = 1;

// Versioned JSON checkpoints: format, version, kind, shape, seed, hyper and
// row-major parameter values. Loading verifies version, kind and shape.
void save_adapter(const std::filesystem::path& file,
                  const BeliefAdapter& adapter, const TrainHyper& hyper);
BeliefAdapter load_adapter(const std::filesystem::path& file);

void save_head(const std::filesystem::path& file,
               const SusceptibilityHead& head, const TrainHyper& hyper);
SusceptibilityHead load_head(const std::filesystem::path& file);

// String forms used by the file functions.
std::string adapter_checkpoint(const BeliefAdapter& adapter,
                               const TrainHyper& hyper);
BeliefAdapter parse_adapter_checkpoint(const std::string& text);
std::string head_checkpoint(const SusceptibilityHead& head,
                            const TrainHyper& hyper);
SusceptibilityHead parse_head_checkpoint(const std::string& text);

}  // namespace credence
