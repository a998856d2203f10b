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

#ifndef FADX_REPORT_HPP_
#define FADX_REPORT_HPP_

// Serialization of FAD analysis results: N-AUC tables (CSV, Markdown, JSON),
// curves (CSV) and per-class comparison plots (SVG).

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fadx/fadcurve.hpp"
#include "fadx/pipeline.hpp"
#include "json.hpp"

namespace fadx::report {

/// "class,instances,<method>...,best": one row per class, N-AUC with six
/// decimals, empty cell for excluded entries, best = lowest N-AUC column.
std::string nauc_csv(const fad::NAUCReport& report);

/// Markdown table with the lowest N-AUC of each row in bold.
std::string nauc_markdown(const fad::NAUCReport& report);

nlohmann::ordered_json nauc_json(const fad::NAUCReport& report);

/// "percent,metric".
std::string curve_csv(const fad::FADCurve& curve);

/// "class,method,fold,percent,metric" for many curves; fold is "pooled" for
/// aggregated curves.
std::string curves_csv(std::span<const fad::FADCurve> curves);

std::string metrics_csv(const pipeline::ClassMetrics& metrics,
                        std::span<const std::string> class_names);

/// One class, every method overlaid, percent dropped on the x-axis, dashed
/// marker at beta.
std::string class_plot_svg(const std::string& class_label, std::span<const fad::FADCurve> curves,
                           double beta);

nlohmann::ordered_json result_json(const pipeline::FadResult& result,
                                   std::span<const std::string> class_names);

/// File-name-safe version of a label.
std::string slug(const std::string& label);

/// Writes report.json, nauc.csv, nauc.md, metrics.csv, curves.csv,
/// curves/<class>__<method>.csv and plots/<class>.svg under `dir`. Returns
/// the written paths relative to `dir`, in write order.
std::vector<std::string> write_fad_outputs(const pipeline::FadResult& result,
                                           std::span<const std::string> class_names,
                                           const std::filesystem::path& dir);

}  // namespace fadx::report

#endif  // FADX_REPORT_HPP_
