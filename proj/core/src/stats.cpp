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

#include "credence/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "credence/error.hpp"

namespace credence {

TestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("paired_t_test: samples differ in length");
  }
  if (a.size() < 2) throw ValidationError("paired_t_test: needs at least 2 pairs");
  const double n = static_cast<double>(a.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  TestResult r;
  r.df = n - 1.0;
  const double sd = std::sqrt(ss / (n - 1.0));
  if (sd == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.statistic = 0.0;
      r.p_value = 1.0;
      r.note = "all differences are zero";
    } else {
      r.statistic = std::copysign(std::numeric_limits<double>::infinity(), mean);
      r.p_value = 0.0;
      r.note = "zero-variance differences with nonzero mean";
    }
    return r;
  }
  r.statistic = mean / (sd / std::sqrt(n));
  const boost::math::students_t dist(r.df);
  r.p_value = std::clamp(
      2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))),
      0.0, 1.0);
  return r;
}

TestResult two_proportion_z_test(std::size_t k1, std::size_t n1,
                                 std::size_t k2, std::size_t n2) {
  if (n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2) {
    throw ValidationError("two_proportion_z_test: need 0 <= k <= n and n > 0");
  }
  const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
  const double pooled = static_cast<double>(k1 + k2) / static_cast<double>(n1 + n2);
  TestResult r;
  if (pooled <= 0.0 || pooled >= 1.0) {
    r.degenerate = true;
    r.note = "pooled proportion is 0 or 1";
    return r;
  }
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) +
                               1.0 / static_cast<double>(n2)));
  r.statistic = (p1 - p2) / se;
  r.p_value = std::clamp(std::erfc(std::abs(r.statistic) / std::sqrt(2.0)), 0.0, 1.0);
  return r;
}

}  // namespace credence
