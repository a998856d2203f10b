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

#ifndef FADX_CSV_HPP_
#define FADX_CSV_HPP_

// RFC 4180-style reading (quoted fields, doubled quotes) and writing.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fadx::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Requires a header; every row must have the header's field count.
/// Blank lines are skipped. Throws ParseError with the line number.
Table parse(std::string_view text);

double parse_double(const std::string& field, std::size_t line);

std::string escape(std::string_view field);
std::string join(const std::vector<std::string>& fields);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

}  // namespace fadx::csv

#endif  // FADX_CSV_HPP_
