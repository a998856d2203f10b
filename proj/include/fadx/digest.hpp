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

#ifndef FADX_DIGEST_HPP_
#define FADX_DIGEST_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace fadx {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Whole-file contents; throws Error when unreadable.
std::string read_file(const std::filesystem::path& path);

/// Creates parent directories. Throws Error on failure.
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace fadx

#endif  // FADX_DIGEST_HPP_
