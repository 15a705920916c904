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

#include <span>

namespace credence {

// Additive smoothing applied to q before KL, followed by renormalization.
inline constexpr double kKlSmoothing = 1e-9;

// KL(p || q) in nats. q is smoothed with `smoothing` (pass 0 to disable);
// terms with p_i == 0 contribute 0. Throws ValidationError on length
// mismatch.
double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double smoothing = kKlSmoothing);

// Jensen-Shannon divergence in bits, in [0, 1]. Symmetric bit-for-bit.
double js_divergence_bits(std::span<const double> p,
                          std::span<const double> q);

}  // namespace credence
