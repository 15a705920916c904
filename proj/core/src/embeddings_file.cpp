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

#include "credence/embeddings_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "credence/error.hpp"
#include "json.hpp"

namespace credence {
namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) |
         (v >> 24);
}

}  // namespace

void EmbeddingTable::add(std::string_view text, std::vector<float> vector) {
  add_digest(sha256(text), std::move(vector));
}

void EmbeddingTable::add_digest(const Digest& digest, std::vector<float> vector) {
  if (dim_ == 0 && vectors_.empty()) dim_ = vector.size();
  if (vector.size() != dim_ || dim_ == 0) {
    throw ValidationError("embedding has dimension " +
                          std::to_string(vector.size()) + ", table expects " +
                          std::to_string(dim_));
  }
  vectors_[digest] = std::move(vector);
}

const std::vector<float>* EmbeddingTable::find(std::string_view text) const {
  auto it = vectors_.find(sha256(text));
  return it == vectors_.end() ? nullptr : &it->second;
}

void EmbeddingTable::write(std::ostream& out) const {
  nlohmann::ordered_json header;
  header["count"] = vectors_.size();
  header["dim"] = dim_;
  header["hash_algo"] = "sha256";
  out << header.dump() << '\n';
  for (const auto& [digest, vec] : vectors_) {
    out.write(reinterpret_cast<const char*>(digest.data()),
              static_cast<std::streamsize>(digest.size()));
    for (float f : vec) {
      const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
}

void EmbeddingTable::save(const std::filesystem::path& file) const {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write embeddings file " + file.string());
  write(out);
  if (!out) throw Error("write failed for embeddings file " + file.string());
}

EmbeddingTable EmbeddingTable::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("embeddings file: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("embeddings file: bad header: ") + e.what());
  }
  if (!header.is_object() || header.value("hash_algo", "") != "sha256" ||
      !header.contains("dim") || !header.contains("count") ||
      !header["dim"].is_number_unsigned() ||
      !header["count"].is_number_unsigned()) {
    throw ParseError("embeddings file: header needs dim, count and hash_algo=sha256");
  }
  const auto dim = header["dim"].get<std::size_t>();
  const auto count = header["count"].get<std::size_t>();
  EmbeddingTable table(dim);
  std::vector<std::uint32_t> raw(dim);
  for (std::size_t r = 0; r < count; ++r) {
    Digest digest;
    in.read(reinterpret_cast<char*>(digest.data()),
            static_cast<std::streamsize>(digest.size()));
    in.read(reinterpret_cast<char*>(raw.data()),
            static_cast<std::streamsize>(dim * sizeof(std::uint32_t)));
    if (!in) {
      throw ParseError("embeddings file: truncated at record " + std::to_string(r));
    }
    std::vector<float> vec(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      vec[i] = std::bit_cast<float>(to_le(raw[i]));
    }
    table.add_digest(digest, std::move(vec));
  }
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open embeddings file " + file.string());
  return read(in);
}

}  // namespace credence
