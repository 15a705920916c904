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

#include "credence/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "credence/error.hpp"

namespace credence {
namespace {

void check_lengths(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw ValidationError("divergence: length mismatch (" +
                          std::to_string(p.size()) + " vs " +
                          std::to_string(q.size()) + ")");
  }
}

// Sum_i a_i log2(a_i / m_i), skipping a_i == 0.
double kl_to_mixture_bits(std::span<const double> a,
                          std::span<const double> m) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0) s += a[i] * std::log2(a[i] / m[i]);
  }
  return s;
}

}  // namespace

double kl_divergence(std::span<const double> p, std::span<const double> q,
                     double smoothing) {
  check_lengths(p, q);
  double qsum = 0.0;
  for (double v : q) qsum += v + smoothing;
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    const double qi = (q[i] + smoothing) / qsum;
    if (qi <= 0.0) return INFINITY;
    s += p[i] * std::log(p[i] / qi);
  }
  return std::max(s, 0.0);
}

double js_divergence_bits(std::span<const double> p,
                          std::span<const double> q) {
  check_lengths(p, q);
  std::vector<double> m(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) m[i] = 0.5 * (p[i] + q[i]);
  const double a = kl_to_mixture_bits(p, m);
  const double b = kl_to_mixture_bits(q, m);
  // a + b == b + a exactly, so the result is symmetric in (p, q).
  return std::clamp(0.5 * (a + b), 0.0, 1.0);
}

}  // namespace credence
