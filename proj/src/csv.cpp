// Copyright 2026 The fadx Authors.
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

#include "fadx/csv.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "fadx/error.hpp"

namespace fadx::csv {
namespace {

std::vector<std::string> split_line(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  fields.push_back(std::move(field));
  return fields;
}

}  // namespace

Table parse(std::string_view text) {
  Table table;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    auto fields = split_line(line, line_no);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != table.header.size()) {
        throw ParseError(fmt::format("expected {} fields, found {}", table.header.size(), fields.size()),
                         line_no);
      }
      table.rows.push_back(std::move(fields));
      table.line_numbers.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw ParseError("CSV input is empty", 1);
  return table;
}

double parse_double(const std::string& field, std::size_t line) {
  const auto first = field.find_first_not_of(" \t");
  const auto last = field.find_last_not_of(" \t");
  if (first == std::string::npos) throw ParseError("empty numeric field", line);
  const char* begin = field.data() + first;
  const char* stop = field.data() + last + 1;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, stop, value);
  if (ec != std::errc() || ptr != stop) {
    throw ParseError(fmt::format("'{}' is not a number", field), line);
  }
  if (!std::isfinite(value)) throw ParseError(fmt::format("'{}' is not finite", field), line);
  return value;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

std::string format_double(double value) { return fmt::format("{}", value); }

}  // namespace fadx::csv
