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

#ifndef FADX_DATASET_HPP_
#define FADX_DATASET_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fadx/attribution.hpp"
#include "fadx/nncore.hpp"

namespace fadx::data {

struct TabularDataset {
  std::vector<std::string> feature_names;
  std::vector<attr::FeatureKind> kinds;
  std::vector<std::string> class_names;
  nn::Samples samples;
  // Ground-truth informative features when the data was generated.
  std::vector<std::size_t> informative;

  std::size_t dim() const { return samples.dim; }
  std::size_t size() const { return samples.size(); }
  std::size_t class_count() const { return class_names.size(); }

  /// Consistent dims, labels below class_count, finite values. Throws
  /// ShapeError / IndexError / DomainError.
  void validate() const;
};

/// Reads a CSV with a header row and one `label` column; every other column
/// is a numeric feature. The optional sidecar JSON supplies feature kinds,
/// class order and ground-truth informative indices. Without it, columns
/// holding only 0/1 are binary and classes are ordered lexicographically.
TabularDataset load_dataset(std::string_view csv_text, std::string_view sidecar_json = {});

std::string dataset_to_csv(const TabularDataset& ds);
std::string sidecar_to_json(const TabularDataset& ds);

nn::Samples subset(const nn::Samples& samples, std::span<const std::size_t> indices);

}  // namespace fadx::data

#endif  // FADX_DATASET_HPP_
