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

#include "fadx/report.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

#include "fadx/csv.hpp"
#include "fadx/digest.hpp"
#include "fadx/svg_plot.hpp"

namespace fadx::report {

std::string nauc_csv(const fad::NAUCReport& report) {
  std::vector<std::string> header = {"class", "instances"};
  header.insert(header.end(), report.methods.begin(), report.methods.end());
  header.emplace_back("best");
  std::string out = csv::join(header) + "\n";
  for (const auto& row : report.rows) {
    std::vector<std::string> fields = {row.class_label, std::to_string(row.instances)};
    for (const auto& entry : row.entries) fields.push_back(entry ? fmt::format("{:.6f}", entry->n_auc) : "");
    const auto best = row.best();
    fields.push_back(best ? report.methods[*best] : "");
    out += csv::join(fields) + "\n";
  }
  return out;
}

std::string nauc_markdown(const fad::NAUCReport& report) {
  std::string out = "| Class | Instances |";
  for (const auto& m : report.methods) out += fmt::format(" {} |", m);
  out += "\n|---|---:|";
  for (std::size_t m = 0; m < report.methods.size(); ++m) out += "---:|";
  out += "\n";
  for (const auto& row : report.rows) {
    out += fmt::format("| {} | {} |", row.class_label, row.instances);
    const auto best = row.best();
    for (std::size_t m = 0; m < row.entries.size(); ++m) {
      if (!row.entries[m]) {
        out += " excluded |";
      } else if (best && *best == m) {
        out += fmt::format(" **{:.2f}** |", row.entries[m]->n_auc);
      } else {
        out += fmt::format(" {:.2f} |", row.entries[m]->n_auc);
      }
    }
    out += "\n";
  }
  out += fmt::format("\nFAD curve N-AUC from 0% to {:g}% of dropped features ({}). Lowest is bold.\n",
                     report.beta, report.metric_name);
  if (!report.excluded_classes.empty()) {
    out += "\nExcluded classes (no test instances):";
    for (const auto& c : report.excluded_classes) out += " " + c;
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json nauc_json(const fad::NAUCReport& report) {
  nlohmann::ordered_json doc;
  doc["beta"] = report.beta;
  doc["metric"] = report.metric_name;
  doc["methods"] = report.methods;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : report.rows) {
    nlohmann::ordered_json r;
    r["class"] = row.class_label;
    r["instances"] = row.instances;
    nlohmann::ordered_json values;
    for (std::size_t m = 0; m < row.entries.size(); ++m) {
      const auto& e = row.entries[m];
      values[report.methods[m]] =
          e ? nlohmann::ordered_json{{"n_auc", e->n_auc}, {"auc", e->auc}, {"max_metric", e->max_metric}}
            : nlohmann::ordered_json(nullptr);
    }
    r["methods"] = std::move(values);
    const auto best = row.best();
    r["best"] = best ? nlohmann::ordered_json(report.methods[*best]) : nlohmann::ordered_json(nullptr);
    if (!row.notes.empty()) r["notes"] = row.notes;
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  doc["excluded_classes"] = report.excluded_classes;
  return doc;
}

std::string curve_csv(const fad::FADCurve& curve) {
  std::string out = "percent,metric\n";
  for (const auto& p : curve.points) {
    out += fmt::format("{},{}\n", csv::format_double(p.percent), csv::format_double(p.metric));
  }
  return out;
}

std::string curves_csv(std::span<const fad::FADCurve> curves) {
  std::string out = "class,method,fold,percent,metric\n";
  for (const auto& c : curves) {
    const std::string fold = c.fold < 0 ? "pooled" : std::to_string(c.fold);
    for (const auto& p : c.points) {
      out += csv::join({c.class_label, c.method, fold, csv::format_double(p.percent),
                        csv::format_double(p.metric)}) +
             "\n";
    }
  }
  return out;
}

std::string metrics_csv(const pipeline::ClassMetrics& metrics, std::span<const std::string> class_names) {
  std::string out = "class,precision,recall,f1,support,no_predictions\n";
  std::size_t total = 0;
  for (const auto& row : metrics.rows) {
    out += csv::join({class_names[row.class_index], fmt::format("{:.6f}", row.precision),
                      fmt::format("{:.6f}", row.recall), fmt::format("{:.6f}", row.f1),
                      std::to_string(row.support), row.no_predictions ? "true" : "false"}) +
           "\n";
    total += row.support;
  }
  out += fmt::format("Weighted Avg,{:.6f},{:.6f},{:.6f},{},false\n", metrics.weighted_precision,
                     metrics.weighted_recall, metrics.weighted_f1, total);
  return out;
}

std::string class_plot_svg(const std::string& class_label, std::span<const fad::FADCurve> curves,
                           double beta) {
  svg::LinePlot plot;
  plot.title = class_label + " FAD curves";
  plot.x_label = "% features dropped";
  plot.y_label = curves.empty() ? "accuracy" : curves.front().metric_name;
  plot.x_min = 0.0;
  plot.x_max = 100.0;
  plot.y_min = 0.0;
  plot.y_max = 1.0;
  for (const auto& c : curves) {
    for (const auto& p : c.points) plot.y_max = std::max(plot.y_max, p.metric);
  }
  plot.marker_x = beta;
  plot.marker_label = fmt::format("beta = {:g}%", beta);
  for (const auto& c : curves) {
    svg::Series s;
    s.label = c.method;
    for (const auto& p : c.points) s.points.emplace_back(p.percent, p.metric);
    plot.series.push_back(std::move(s));
  }
  return svg::render(plot);
}

nlohmann::ordered_json result_json(const pipeline::FadResult& result,
                                   std::span<const std::string> class_names) {
  nlohmann::ordered_json doc;
  doc["format"] = "fadx-fad-report";
  doc["version"] = 1;
  doc["nauc"] = nauc_json(result.report);
  doc["resolved_methods"] = result.resolved_methods;
  auto metrics = nlohmann::ordered_json::object();
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : result.metrics.rows) {
    rows.push_back({{"class", class_names[row.class_index]},
                    {"precision", row.precision},
                    {"recall", row.recall},
                    {"f1", row.f1},
                    {"support", row.support},
                    {"no_predictions", row.no_predictions}});
  }
  metrics["per_class"] = std::move(rows);
  metrics["weighted_precision"] = result.metrics.weighted_precision;
  metrics["weighted_recall"] = result.metrics.weighted_recall;
  metrics["weighted_f1"] = result.metrics.weighted_f1;
  metrics["accuracy"] = result.metrics.accuracy;
  doc["classification"] = std::move(metrics);
  auto folds = nlohmann::ordered_json::array();
  for (const auto& f : result.folds) {
    folds.push_back({{"fold", f.fold},
                     {"train_instances", f.train_instances},
                     {"test_instances", f.test_instances},
                     {"best_epoch", f.best_epoch},
                     {"train_accuracy", f.train_accuracy},
                     {"test_accuracy", f.test_accuracy}});
  }
  doc["folds"] = std::move(folds);
  auto diagnostics = nlohmann::ordered_json::array();
  for (const auto& d : result.diagnostics) {
    diagnostics.push_back({{"class", d.class_label},
                           {"method", d.method},
                           {"rises_within_beta", d.monotonicity.rises},
                           {"largest_rise", d.monotonicity.largest_rise}});
  }
  doc["monotonicity"] = std::move(diagnostics);
  return doc;
}

std::string slug(const std::string& label) {
  std::string out;
  for (char c : label) {
    out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_';
  }
  return out.empty() ? "_" : out;
}

std::vector<std::string> write_fad_outputs(const pipeline::FadResult& result,
                                           std::span<const std::string> class_names,
                                           const std::filesystem::path& dir) {
  std::vector<std::string> written;
  auto emit = [&](const std::string& rel, const std::string& contents) {
    write_file(dir / rel, contents);
    written.push_back(rel);
  };
  emit("report.json", result_json(result, class_names).dump(1) + "\n");
  emit("nauc.csv", nauc_csv(result.report));
  emit("nauc.md", nauc_markdown(result.report));
  emit("metrics.csv", metrics_csv(result.metrics, class_names));
  std::vector<fad::FADCurve> all(result.curves);
  all.insert(all.end(), result.fold_curves.begin(), result.fold_curves.end());
  emit("curves.csv", curves_csv(all));
  for (const auto& c : result.curves) {
    emit(fmt::format("curves/{}__{}.csv", slug(c.class_label), slug(c.method)), curve_csv(c));
  }
  for (const auto& row : result.report.rows) {
    std::vector<fad::FADCurve> mine;
    for (const auto& c : result.curves) {
      if (c.class_label == row.class_label) mine.push_back(c);
    }
    emit(fmt::format("plots/{}.svg", slug(row.class_label)),
         class_plot_svg(row.class_label, mine, result.report.beta));
  }
  return written;
}

}  // namespace fadx::report
