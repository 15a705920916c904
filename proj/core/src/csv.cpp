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

#include "csv.hpp"

#include "credence/error.hpp"

namespace credence::csv {

bool read_row(std::istream& in, std::vector<std::string>& row,
              std::size_t& line_no) {
  row.clear();
  if (in.peek() == std::char_traits<char>::eof()) return false;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // tolerate CRLF
    } else if (c == '\n') {
      ++line_no;
      row.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw ParseError("unterminated quoted CSV field");
  if (any) {
    ++line_no;
    row.push_back(std::move(field));
  }
  return any;
}

Table::Table(std::istream& in, std::string source_name)
    : in_(in), source_(std::move(source_name)) {
  if (!read_row(in_, header_, line_)) {
    throw ParseError(source_ + ": empty CSV, header row missing");
  }
  for (std::size_t i = 0; i < header_.size(); ++i) {
    std::string name = header_[i];
    // Strip a UTF-8 byte-order mark from the first column.
    if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name = name.substr(3);
    header_[i] = name;
    index_[name] = i;
  }
}

bool Table::has_column(const std::string& name) const {
  return index_.count(name) != 0;
}

bool Table::next() {
  while (true) {
    row_start_ = line_ + 1;
    if (!read_row(in_, row_, line_)) return false;
    if (row_.size() == 1 && row_[0].empty()) continue;
    if (row_.size() != header_.size()) {
      throw ParseError(source_ + ":" + std::to_string(row_start_) +
                       ": expected " + std::to_string(header_.size()) +
                       " fields, found " + std::to_string(row_.size()));
    }
    return true;
  }
}

const std::string& Table::at(const std::string& column) const {
  auto it = index_.find(column);
  if (it == index_.end()) {
    throw ParseError(source_ + ": missing column '" + column + "'");
  }
  return row_[it->second];
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += '"';
  return out;
}

}  // namespace credence::csv
