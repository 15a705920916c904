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

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace credence {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(std::string_view data);
std::string sha256_hex(std::string_view data);
std::string to_hex(const Digest& digest);

// Joins fields with an unambiguous length prefix before hashing, so
// ("ab","c") and ("a","bc") never collide.
class KeyBuilder {
 public:
  KeyBuilder& add(std::string_view field);
  KeyBuilder& add(double value);
  KeyBuilder& add(std::int64_t value);
  std::string hex() const { return sha256_hex(buffer_); }
  const std::string& material() const { return buffer_; }

 private:
  std::string buffer_;
};

}  // namespace credence
