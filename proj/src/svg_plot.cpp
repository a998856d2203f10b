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

#include "fadx/svg_plot.hpp"

#include <array>
#include <cmath>

#include <fmt/format.h>

namespace fadx::svg {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 6> kColors = {"#1f77b4", "#d62728", "#2ca02c",
                                                "#9467bd", "#ff7f0e", "#8c564b"};
constexpr std::array<const char*, 3> kDashes = {"", "6,3", "2,2"};

}  // namespace

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render(const LinePlot& plot) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double x_span = plot.x_max > plot.x_min ? plot.x_max - plot.x_min : 1.0;
  const double y_span = plot.y_max > plot.y_min ? plot.y_max - plot.y_min : 1.0;
  auto px = [&](double x) { return kLeft + (x - plot.x_min) / x_span * plot_w; };
  auto py = [&](double y) { return kTop + plot_h - (y - plot.y_min) / y_span * plot_h; };

  std::string out;
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      kWidth, kHeight);
  out += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n", kWidth, kHeight);
  out += fmt::format("<text class=\"title\" x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     kWidth / 2.0, escape_xml(plot.title));

  // Axes and ticks.
  out += fmt::format("<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n");
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\"/>\n", kLeft,
                     kTop + plot_h, kLeft + plot_w, kTop + plot_h);
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\"/>\n", kLeft, kTop,
                     kLeft, kTop + plot_h);
  out += "</g>\n";
  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double xv = plot.x_min + x_span * t / kTicks;
    const double yv = plot.y_min + y_span * t / kTicks;
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" stroke=\"black\"/>"
        "<text x=\"{0:.2f}\" y=\"{3:.2f}\" text-anchor=\"middle\">{4:g}</text>\n",
        px(xv), kTop + plot_h, kTop + plot_h + 5.0, kTop + plot_h + 18.0, xv);
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"#dddddd\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:.2f}</text>\n",
        kLeft, py(yv), kLeft + plot_w, kLeft - 6.0, py(yv) + 4.0, yv);
  }
  out += fmt::format("<text class=\"x-label\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n",
                     kLeft + plot_w / 2.0, kHeight - 18.0, escape_xml(plot.x_label));
  out += fmt::format(
      "<text class=\"y-label\" x=\"18\" y=\"{0:.2f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 18 {0:.2f})\">{1}</text>\n",
      kTop + plot_h / 2.0, escape_xml(plot.y_label));

  if (plot.marker_x) {
    out += fmt::format(
        "<line class=\"marker\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" y2=\"{2:.2f}\" "
        "stroke=\"#888888\" stroke-dasharray=\"4,4\"/>"
        "<text x=\"{3:.2f}\" y=\"{4:.2f}\" fill=\"#555555\">{5}</text>\n",
        px(*plot.marker_x), kTop, kTop + plot_h, px(*plot.marker_x) + 4.0, kTop + 12.0,
        escape_xml(plot.marker_label));
  }

  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& series = plot.series[s];
    std::string pts;
    for (const auto& [x, y] : series.points) {
      if (!pts.empty()) pts += ' ';
      pts += fmt::format("{:.2f},{:.2f}", px(x), py(y));
    }
    const char* color = kColors[s % kColors.size()];
    const char* dash = kDashes[s % kDashes.size()];
    out += fmt::format(
        "<polyline class=\"series\" data-label=\"{}\" fill=\"none\" stroke=\"{}\" "
        "stroke-width=\"2\"{} points=\"{}\"/>\n",
        escape_xml(series.label), color,
        *dash ? fmt::format(" stroke-dasharray=\"{}\"", dash) : std::string(), pts);
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(s);
    const double lx = kLeft + plot_w - 150.0;
    out += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{2:.2f}\" y2=\"{1:.2f}\" stroke=\"{3}\" "
        "stroke-width=\"2\"/><text class=\"legend\" x=\"{4:.2f}\" y=\"{5:.2f}\">{6}</text>\n",
        lx, ly, lx + 24.0, color, lx + 30.0, ly + 4.0, escape_xml(series.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace fadx::svg
