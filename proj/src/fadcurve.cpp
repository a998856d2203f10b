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

#include "fadx/fadcurve.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fadx/error.hpp"

namespace fadx::fad {
namespace {

void check_beta(double beta) {
  if (!(beta > 0.0) || beta > 100.0) {
    throw ConfigError(fmt::format("beta must lie in (0, 100], got {}", beta));
  }
}

}  // namespace

void FADCurve::validate() const {
  if (points.empty() || points.front().percent != 0.0) {
    throw DomainError("FAD curve must start at 0% dropped");
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& p = points[k];
    if (!std::isfinite(p.metric) || p.metric < 0.0) {
      throw DomainError("FAD curve metric must be finite and non-negative");
    }
    if (p.percent > 100.0 || (k > 0 && !(p.percent > points[k - 1].percent))) {
      throw DomainError("FAD curve percents must increase strictly within [0, 100]");
    }
  }
}

std::vector<double> drop_features(std::span<const double> x, std::span<const std::size_t> dropped,
                                  const attr::BaselineVector& baseline) {
  if (baseline.dim() != x.size()) throw ShapeError("baseline dim does not match input");
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t i : dropped) {
    if (i >= x.size()) throw IndexError(fmt::format("feature index {} out of range", i));
    out[i] = baseline.values[i];
  }
  return out;
}

double DropSchedule::percent(std::size_t k) const {
  return 100.0 * static_cast<double>(k) / static_cast<double>(dim);
}

std::vector<double> DropSchedule::percents() const {
  std::vector<double> out;
  out.reserve(counts.size());
  for (std::size_t k : counts) out.push_back(percent(k));
  return out;
}

DropSchedule default_schedule(std::size_t dim, double beta) {
  check_beta(beta);
  if (dim == 0) throw ConfigError("schedule needs at least one feature");
  DropSchedule s;
  s.dim = dim;
  const double d = static_cast<double>(dim);
  const auto dense_end =
      std::min(dim, static_cast<std::size_t>(std::ceil(beta * d / 100.0 - 1e-9)));
  for (std::size_t k = 0; k <= dense_end; ++k) s.counts.push_back(k);
  for (int p = 5; p <= 100; p += 5) {
    const auto k = static_cast<std::size_t>(std::ceil(p * d / 100.0 - 1e-9));
    if (k > s.counts.back()) s.counts.push_back(std::min(k, dim));
  }
  if (s.counts.back() != dim) s.counts.push_back(dim);
  return s;
}

std::vector<std::uint8_t> drop_outcomes(const nn::DenseNetwork& net, std::span<const double> x,
                                        const attr::ImportanceRanking& ranking,
                                        const attr::BaselineVector& baseline,
                                        const DropSchedule& schedule, std::size_t target_class) {
  if (ranking.dim() != x.size() || schedule.dim != x.size()) {
    throw ShapeError("ranking / schedule do not cover every feature");
  }
  if (baseline.dim() != x.size()) throw ShapeError("baseline dim does not match input");
  std::vector<double> current(x.begin(), x.end());
  std::vector<std::uint8_t> out;
  out.reserve(schedule.counts.size());
  std::size_t dropped = 0;
  for (std::size_t k : schedule.counts) {
    for (; dropped < k; ++dropped) {
      const std::size_t feature = ranking.order[dropped];
      current[feature] = baseline.values[feature];
    }
    out.push_back(nn::predict(net, current) == target_class ? 1 : 0);
  }
  return out;
}

FADCurve curve_from_outcomes(std::span<const std::vector<std::uint8_t>> outcomes,
                             const DropSchedule& schedule) {
  if (outcomes.empty()) throw DegenerateInputError("FAD curve over an empty class subset");
  FADCurve curve;
  const auto percents = schedule.percents();
  for (std::size_t s = 0; s < schedule.counts.size(); ++s) {
    std::size_t hits = 0;
    for (const auto& o : outcomes) {
      if (o.size() != schedule.counts.size()) throw ShapeError("outcome length mismatch");
      hits += o[s];
    }
    curve.points.push_back(
        {percents[s], static_cast<double>(hits) / static_cast<double>(outcomes.size())});
  }
  return curve;
}

FADCurve fad_curve(const nn::DenseNetwork& net, const nn::Samples& instances,
                   std::span<const attr::ImportanceRanking> rankings,
                   const attr::BaselineVector& baseline, const DropSchedule& schedule,
                   std::size_t target_class) {
  if (instances.size() == 0) throw DegenerateInputError("FAD curve over an empty class subset");
  if (rankings.size() != instances.size()) throw ShapeError("one ranking per instance required");
  std::vector<std::vector<std::uint8_t>> outcomes;
  outcomes.reserve(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    outcomes.push_back(
        drop_outcomes(net, instances.row(i), rankings[i], baseline, schedule, target_class));
  }
  return curve_from_outcomes(outcomes, schedule);
}

std::vector<CurvePoint> clip_curve(const FADCurve& curve, double beta) {
  check_beta(beta);
  curve.validate();
  std::vector<CurvePoint> out;
  for (std::size_t k = 0; k < curve.points.size(); ++k) {
    const CurvePoint& p = curve.points[k];
    if (p.percent <= beta) {
      out.push_back(p);
      if (p.percent == beta) return out;
      continue;
    }
    const CurvePoint& prev = curve.points[k - 1];
    const double t = (beta - prev.percent) / (p.percent - prev.percent);
    out.push_back({beta, prev.metric + t * (p.metric - prev.metric)});
    return out;
  }
  throw ConfigError(fmt::format("curve ends at {}% and does not reach beta = {}",
                                curve.points.back().percent, beta));
}

double max_metric_within(const FADCurve& curve, double beta) {
  const auto clipped = clip_curve(curve, beta);
  double top = 0.0;
  for (const auto& p : clipped) top = std::max(top, p.metric);
  return top;
}

double trapezoid_auc(const FADCurve& curve, double beta) {
  const auto clipped = clip_curve(curve, beta);
  // Integrate the deficit below the clipped maximum and subtract it from the
  // enclosing rectangle; equal in exact arithmetic to the plain trapezoid
  // sum, and exact for flat curves in floating point.
  double top = 0.0;
  for (const auto& p : clipped) top = std::max(top, p.metric);
  double deficit = 0.0;
  for (std::size_t k = 1; k < clipped.size(); ++k) {
    const double width = clipped[k].percent - clipped[k - 1].percent;
    deficit += ((top - clipped[k - 1].metric) + (top - clipped[k].metric)) / 2.0 * width;
  }
  return beta * top - deficit;
}

double n_auc(double auc, double beta, double max_metric) {
  check_beta(beta);
  if (!(max_metric > 0.0)) {
    throw ExcludedCaseError("maximum metric is zero within [0, beta]; case excluded from N-AUC");
  }
  if (!(auc > 0.0)) {
    throw ExcludedCaseError("bounded FAD curve area is zero; case excluded from N-AUC");
  }
  return auc / (beta * max_metric);
}

FADCurve mean_curve(std::span<const FADCurve> curves) {
  if (curves.empty()) throw DegenerateInputError("no curves to average");
  FADCurve out = curves.front();
  out.fold = -1;
  for (std::size_t c = 1; c < curves.size(); ++c) {
    if (curves[c].points.size() != out.points.size()) throw ShapeError("curve grids differ");
    for (std::size_t k = 0; k < out.points.size(); ++k) {
      if (curves[c].points[k].percent != out.points[k].percent) throw ShapeError("curve grids differ");
      out.points[k].metric += curves[c].points[k].metric;
    }
  }
  for (auto& p : out.points) p.metric /= static_cast<double>(curves.size());
  return out;
}

MonotonicityDiagnostics monotonicity(const FADCurve& curve, double beta) {
  const auto clipped = clip_curve(curve, beta);
  MonotonicityDiagnostics diag;
  for (std::size_t k = 1; k < clipped.size(); ++k) {
    const double rise = clipped[k].metric - clipped[k - 1].metric;
    if (rise > 0.0) {
      ++diag.rises;
      diag.largest_rise = std::max(diag.largest_rise, rise);
    }
  }
  return diag;
}

std::optional<std::size_t> NAUCRow::best() const {
  std::optional<std::size_t> best_index;
  for (std::size_t m = 0; m < entries.size(); ++m) {
    if (!entries[m]) continue;
    if (!best_index || entries[m]->n_auc < entries[*best_index]->n_auc) best_index = m;
  }
  return best_index;
}

NAUCRow make_row(const std::string& class_label, std::size_t instances,
                 std::span<const FADCurve> curves_by_method, double beta) {
  NAUCRow row;
  row.class_label = class_label;
  row.instances = instances;
  double top = 0.0;
  for (const auto& curve : curves_by_method) top = std::max(top, max_metric_within(curve, beta));
  for (const auto& curve : curves_by_method) {
    const double auc = trapezoid_auc(curve, beta);
    try {
      row.entries.push_back(NAUCEntry{class_label, curve.method, auc, n_auc(auc, beta, top), beta, top});
    } catch (const ExcludedCaseError& e) {
      row.entries.push_back(std::nullopt);
      row.notes.push_back(fmt::format("{}: {}", curve.method, e.what()));
    }
  }
  return row;
}

}  // namespace fadx::fad
