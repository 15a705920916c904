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

#include "credence/adamw.hpp"

#include <cmath>
#include <string>

#include "credence/error.hpp"

namespace credence {

void AdamW::step(std::span<const ParamBlock> blocks) {
  if (t_ == 0) {
    m_.clear();
    v_.clear();
    for (const ParamBlock& b : blocks) {
      m_.emplace_back(b.size, 0.0);
      v_.emplace_back(b.size, 0.0);
    }
  } else if (blocks.size() != m_.size()) {
    throw ValidationError("AdamW: parameter block count changed");
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k].size != m_[k].size()) {
      throw ValidationError("AdamW: shape of block " + std::to_string(k) +
                            " changed");
    }
    for (std::size_t i = 0; i < blocks[k].size; ++i) {
      if (!std::isfinite(blocks[k].grad[i])) {
        throw TrainingError("AdamW: non-finite gradient in block " +
                            std::to_string(k) + " at index " +
                            std::to_string(i));
      }
    }
  }

  ++t_;
  const AdamWConfig& c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
  const double decay = 1.0 - c.lr * c.weight_decay;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    double* p = blocks[k].param;
    const double* g = blocks[k].grad;
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < blocks[k].size; ++i) {
      p[i] *= decay;
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace credence
