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

#include "fadx/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>

#include "fadx/csv.hpp"
#include "fadx/error.hpp"
#include "json.hpp"

namespace fadx::data {

void TabularDataset::validate() const {
  if (feature_names.size() != samples.dim || kinds.size() != samples.dim) {
    throw ShapeError("feature names / kinds do not match the feature count");
  }
  if (samples.features.size() != samples.dim * samples.size()) {
    throw ShapeError("feature matrix size does not match instances x features");
  }
  for (std::size_t label : samples.labels) {
    if (label >= class_names.size()) throw IndexError(fmt::format("label {} out of range", label));
  }
  for (double v : samples.features) {
    if (!std::isfinite(v)) throw DomainError("dataset contains a non-finite value");
  }
  for (std::size_t i : informative) {
    if (i >= samples.dim) throw IndexError(fmt::format("informative index {} out of range", i));
  }
}

TabularDataset load_dataset(std::string_view csv_text, std::string_view sidecar_json) {
  const csv::Table table = csv::parse(csv_text);
  const auto label_it = std::find(table.header.begin(), table.header.end(), "label");
  if (label_it == table.header.end()) throw ParseError("missing 'label' column", 1);
  const auto label_col = static_cast<std::size_t>(label_it - table.header.begin());

  TabularDataset ds;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == label_col) continue;
    feature_cols.push_back(c);
    ds.feature_names.push_back(table.header[c]);
  }
  if (feature_cols.empty()) throw ParseError("dataset has no feature columns", 1);
  if (table.rows.empty()) throw ParseError("dataset has no rows", 2);

  nlohmann::json sidecar = nlohmann::json::object();
  if (!sidecar_json.empty()) {
    try {
      sidecar = nlohmann::json::parse(sidecar_json);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("sidecar JSON: {}", e.what()));
    }
  }

  try {
    if (sidecar.contains("classes")) {
      ds.class_names = sidecar["classes"].get<std::vector<std::string>>();
    } else {
      std::set<std::string> seen;
      for (const auto& row : table.rows) seen.insert(row[label_col]);
      ds.class_names.assign(seen.begin(), seen.end());
    }
    std::map<std::string, std::size_t> class_index;
    for (std::size_t k = 0; k < ds.class_names.size(); ++k) class_index[ds.class_names[k]] = k;

    ds.samples.dim = feature_cols.size();
    std::vector<double> x(feature_cols.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      const auto it = class_index.find(row[label_col]);
      if (it == class_index.end()) {
        throw ParseError(fmt::format("label '{}' is not a declared class", row[label_col]),
                         table.line_numbers[r]);
      }
      for (std::size_t f = 0; f < feature_cols.size(); ++f) {
        x[f] = csv::parse_double(row[feature_cols[f]], table.line_numbers[r]);
      }
      ds.samples.push_back(x, it->second);
    }

    std::map<std::string, attr::FeatureKind> declared;
    if (sidecar.contains("features")) {
      for (const auto& f : sidecar["features"]) {
        declared[f.at("name").get<std::string>()] =
            attr::parse_feature_kind(f.at("kind").get<std::string>());
      }
    }
    for (std::size_t f = 0; f < ds.dim(); ++f) {
      if (const auto it = declared.find(ds.feature_names[f]); it != declared.end()) {
        ds.kinds.push_back(it->second);
        continue;
      }
      bool binary = true;
      for (std::size_t i = 0; i < ds.size() && binary; ++i) {
        const double v = ds.samples.row(i)[f];
        binary = v == 0.0 || v == 1.0;
      }
      ds.kinds.push_back(binary ? attr::FeatureKind::kBinary : attr::FeatureKind::kContinuous);
    }
    if (sidecar.contains("informative")) {
      ds.informative = sidecar["informative"].get<std::vector<std::size_t>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("sidecar JSON: {}", e.what()));
  }
  ds.validate();
  return ds;
}

std::string dataset_to_csv(const TabularDataset& ds) {
  std::vector<std::string> header = ds.feature_names;
  header.emplace_back("label");
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<std::string> fields;
    fields.reserve(ds.dim() + 1);
    for (double v : ds.samples.row(i)) fields.push_back(csv::format_double(v));
    fields.push_back(ds.class_names[ds.samples.labels[i]]);
    out += csv::join(fields) + "\n";
  }
  return out;
}

std::string sidecar_to_json(const TabularDataset& ds) {
  nlohmann::ordered_json doc;
  doc["format"] = "fadx-dataset-sidecar";
  doc["version"] = 1;
  doc["classes"] = ds.class_names;
  auto features = nlohmann::ordered_json::array();
  for (std::size_t f = 0; f < ds.dim(); ++f) {
    features.push_back({{"name", ds.feature_names[f]}, {"kind", std::string(attr::to_string(ds.kinds[f]))}});
  }
  doc["features"] = std::move(features);
  if (!ds.informative.empty()) doc["informative"] = ds.informative;
  return doc.dump(1) + "\n";
}

nn::Samples subset(const nn::Samples& samples, std::span<const std::size_t> indices) {
  nn::Samples out;
  out.dim = samples.dim;
  out.features.reserve(indices.size() * samples.dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(samples.row(i), samples.labels[i]);
  return out;
}

}  // namespace fadx::data
