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

#include <string>
#include <string_view>

namespace credence {

// Natural ordering: alphabetic prefix, then the first digit run compared
// numerically, then the remainder. "Q6" < "Q19" < "Q112".
bool natural_less(std::string_view a, std::string_view b);

struct NaturalLess {
  using is_transparent = void;
  bool operator()(std::string_view a, std::string_view b) const {
    return natural_less(a, b);
  }
};

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Fixed-point decimal rendering independent of the global locale.
std::string format_fixed(double value, int decimals);

}  // namespace credence
