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

#ifndef FADX_SVG_PLOT_HPP_
#define FADX_SVG_PLOT_HPP_

// Minimal standalone SVG line plots.

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fadx::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  double x_min = 0.0;
  double x_max = 100.0;
  double y_min = 0.0;
  double y_max = 1.0;
  std::optional<double> marker_x;  // dashed vertical line, e.g. at beta
  std::string marker_label;
  std::vector<Series> series;
};

/// Axes with ticks, one polyline per series, legend. Output depends only on
/// the plot contents (fixed number formatting).
std::string render(const LinePlot& plot);

std::string escape_xml(const std::string& text);

}  // namespace fadx::svg

#endif  // FADX_SVG_PLOT_HPP_
