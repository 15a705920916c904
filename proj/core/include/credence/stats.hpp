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

#include <cstddef>
#include <span>
#include <string>

namespace credence {

struct TestResult {
  double statistic = 0.0;  // t or z
  double p_value = 1.0;    // two-sided
  double df = 0.0;         // t-test only
  // Zero-variance or boundary input. The statistic is 0 (p = 1) when there
  // is no difference and +-infinity (p = 0) otherwise.
  bool degenerate = false;
  std::string note;
};

// Two-sided paired t-test on a - b. Throws ValidationError for mismatched
// lengths or fewer than two pairs.
TestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// Pooled two-proportion z-test of k1/n1 against k2/n2. Throws
// ValidationError unless 0 <= k <= n and n > 0. A pooled proportion of 0
// or 1 is degenerate with z = 0 and p = 1.
TestResult two_proportion_z_test(std::size_t k1, std::size_t n1,
                                 std::size_t k2, std::size_t n2);

}  // namespace credence
