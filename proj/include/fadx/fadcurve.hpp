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

#ifndef FADX_FADCURVE_HPP_
#define FADX_FADCURVE_HPP_

// Feature Attribution Dropping curves: metric against the percentage of
// features replaced by baseline values in descending |attribution| order,
// their bounded trapezoidal AUC, and the normalized AUC.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fadx/attribution.hpp"
#include "fadx/nncore.hpp"

namespace fadx::fad {

inline constexpr double kDefaultBeta = 20.0;

struct CurvePoint {
  double percent = 0.0;
  double metric = 0.0;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct FADCurve {
  std::vector<CurvePoint> points;
  std::string class_label;
  std::string method;
  int fold = -1;  // -1 for pooled or averaged curves
  std::string metric_name = "accuracy";

  /// Percents strictly increasing from exactly 0 within [0, 100]; metrics
  /// finite and non-negative. Throws DomainError otherwise.
  void validate() const;
};

/// Copy of x with every index in `dropped` set to its baseline value.
std::vector<double> drop_features(std::span<const double> x, std::span<const std::size_t> dropped,
                                  const attr::BaselineVector& baseline);

/// Numbers of dropped features at which a curve is sampled.
struct DropSchedule {
  std::size_t dim = 0;
  std::vector<std::size_t> counts;  // strictly increasing, starts at 0

  double percent(std::size_t k) const;
  std::vector<double> percents() const;
};

/// Every integer count up to ceil(beta * dim / 100), then one point per
/// further 5% up to 100%.
DropSchedule default_schedule(std::size_t dim, double beta = kDefaultBeta);

/// For one instance: whether the prediction equals `target_class` after
/// dropping the top-k features of `ranking`, for each k in the schedule.
std::vector<std::uint8_t> drop_outcomes(const nn::DenseNetwork& net, std::span<const double> x,
                                        const attr::ImportanceRanking& ranking,
                                        const attr::BaselineVector& baseline,
                                        const DropSchedule& schedule, std::size_t target_class);

/// Fraction of instances still predicted as the class at each schedule point.
FADCurve curve_from_outcomes(std::span<const std::vector<std::uint8_t>> outcomes,
                             const DropSchedule& schedule);

/// FAD curve of one class subset, each instance dropped by its own ranking.
/// Throws DegenerateInputError for an empty subset.
FADCurve fad_curve(const nn::DenseNetwork& net, const nn::Samples& instances,
                   std::span<const attr::ImportanceRanking> rankings,
                   const attr::BaselineVector& baseline, const DropSchedule& schedule,
                   std::size_t target_class);

/// Curve restricted to [0, beta], with a linearly interpolated endpoint at
/// beta when beta falls between sample points.
std::vector<CurvePoint> clip_curve(const FADCurve& curve, double beta);

/// Largest metric on the clipped curve.
double max_metric_within(const FADCurve& curve, double beta);

/// Trapezoidal area under the metric over [0, beta]. ConfigError when beta
/// is not in (0, 100] or the curve does not reach beta.
double trapezoid_auc(const FADCurve& curve, double beta);

/// auc / (beta * max_metric). ExcludedCaseError when max_metric or auc is
/// not positive (the bounded curve is identically zero).
double n_auc(double auc, double beta, double max_metric);

/// Pointwise mean of curves sampled on identical grids.
FADCurve mean_curve(std::span<const FADCurve> curves);

/// Segments inside [0, beta] along which the metric increases; dropping
/// correlated features can raise the metric.
struct MonotonicityDiagnostics {
  std::size_t rises = 0;
  double largest_rise = 0.0;
};
MonotonicityDiagnostics monotonicity(const FADCurve& curve, double beta);

struct NAUCEntry {
  std::string class_label;
  std::string method;
  double auc = 0.0;
  double n_auc = 0.0;
  double beta = kDefaultBeta;
  double max_metric = 0.0;
};

/// One table row: a class with one optional entry per compared method.
struct NAUCRow {
  std::string class_label;
  std::size_t instances = 0;
  std::vector<std::optional<NAUCEntry>> entries;  // same order as report methods
  std::vector<std::string> notes;

  /// Index of the lowest N-AUC, ties to the first; nullopt if none.
  std::optional<std::size_t> best() const;
};

struct NAUCReport {
  double beta = kDefaultBeta;
  std::string metric_name = "accuracy";
  std::vector<std::string> methods;
  std::vector<NAUCRow> rows;
  std::vector<std::string> excluded_classes;
};

/// Normalizes every method's curve for one class by the largest metric any
/// of them reaches within [0, beta].
NAUCRow make_row(const std::string& class_label, std::size_t instances,
                 std::span<const FADCurve> curves_by_method, double beta);

}  // namespace fadx::fad

#endif  // FADX_FADCURVE_HPP_
