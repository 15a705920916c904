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
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string_view>
#include <vector>

#include "credence/hash.hpp"

namespace credence {

// Text embeddings keyed by the SHA-256 of the text.
//
// On disk: one JSON header line {"count":N,"dim":D,"hash_algo":"sha256"},
// then N records of a 32-byte digest followed by D little-endian float32
// values. Records are written in digest order.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  // Throws ValidationError on a dimension mismatch. The first insert into a
  // zero-dimension table fixes the dimension.
  void add(std::string_view text, std::vector<float> vector);
  void add_digest(const Digest& digest, std::vector<float> vector);
  const std::vector<float>* find(std::string_view text) const;

  const std::map<Digest, std::vector<float>>& entries() const {
    return vectors_;
  }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& file) const;
  // Throws ParseError on a malformed header or truncated record.
  static EmbeddingTable read(std::istream& in);
  static EmbeddingTable load(const std::filesystem::path& file);

 private:
  std::size_t dim_ = 0;
  std::map<Digest, std::vector<float>> vectors_;
};

}  // namespace credence
