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

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace credence::csv {

// RFC 4180 reader: quoted fields may contain commas, quotes ("") and
// newlines. Returns false at end of input.
bool read_row(std::istream& in, std::vector<std::string>& row,
              std::size_t& line_no);

// Header-indexed row access.
class Table {
 public:
  explicit Table(std::istream& in, std::string source_name);

  const std::vector<std::string>& header() const { return header_; }
  bool has_column(const std::string& name) const;

  // Advances to the next data row; skips blank lines.
  bool next();
  const std::string& at(const std::string& column) const;
  std::size_t line() const { return row_start_; }
  const std::string& source() const { return source_; }

 private:
  std::istream& in_;
  std::string source_;
  std::vector<std::string> header_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> row_;
  std::size_t line_ = 0;
  std::size_t row_start_ = 0;
};

std::string escape(const std::string& field);

}  // namespace credence::csv
