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

#ifndef FADX_PIPELINE_HPP_
#define FADX_PIPELINE_HPP_

// Cross-validated FAD analysis: stratified folds, per-fold training,
// per-instance attributions, pooled per-class FAD curves and N-AUC tables.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fadx/attribution.hpp"
#include "fadx/dataset.hpp"
#include "fadx/fadcurve.hpp"
#include "fadx/nncore.hpp"

namespace fadx::pipeline {

struct FoldPlan {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::vector<std::size_t> fold_of;  // per instance
  std::vector<std::string> warnings;

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded shuffle within each class, then round-robin assignment that
/// continues across classes so fold sizes also stay balanced.
FoldPlan stratified_kfold(std::span<const std::size_t> labels, std::size_t class_count,
                          std::size_t k, std::uint64_t seed);

struct ClassRow {
  std::size_t class_index = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  bool no_predictions = false;  // precision reported as 0
};

struct ClassMetrics {
  std::vector<ClassRow> rows;  // classes with support > 0, ascending index
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  double accuracy = 0.0;
};

ClassMetrics classification_metrics(std::span<const std::size_t> predictions,
                                    std::span<const std::size_t> labels, std::size_t class_count);

struct VitalFewConfig {
  std::size_t instances = 500;
  std::size_t features = 50;
  double informative_fraction = 0.2;
  std::size_t classes = 3;
  std::uint64_t seed = 0;
  // Class-mean offset on informative features, in noise standard deviations.
  double separation = 1.0;
};

/// Balanced classes. Each informative feature belongs to one class: that
/// class has mean +separation on it, every other class -separation/(C-1),
/// so the overall mean is 0. Remaining features are N(0, 1) noise. The
/// informative indices are stored in the dataset as ground truth.
data::TabularDataset generate_vital_few(const VitalFewConfig& config);

struct HoldoutSplit {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validation;
};

/// Per class, floor(fraction * class size) seeded-random instances go to
/// validation. Both index lists come back sorted.
HoldoutSplit validation_split(const nn::Samples& samples, std::size_t class_count,
                              double fraction, std::uint64_t seed);

/// Mean / population standard deviation scaling for continuous features;
/// binary features and constant columns keep offset 0 / scale 1 resp.
nn::InputScaler fit_scaler(const nn::Samples& samples, std::span<const attr::FeatureKind> kinds);

enum class BaselineMode { kMean, kZero };
enum class RankingMode { kPerInstance, kClassGlobal };
enum class FoldAggregation { kPooled, kMean };

struct ModelSettings {
  std::vector<std::size_t> hidden = {32, 32, 32};
  nn::TrainConfig optimizer;
  double validation_fraction = 0.1;
  bool standardize = true;
  nn::GradientTarget gradient_target = nn::GradientTarget::kProbability;
};

struct FadSettings {
  double beta = fad::kDefaultBeta;
  // "ig", "shapley" (exact when dim <= 15, else sampled), "shapley-exact",
  // "shapley-sampled", "oracle", "random".
  std::vector<std::string> methods = {"ig", "shapley"};
  BaselineMode baseline = BaselineMode::kMean;
  RankingMode ranking = RankingMode::kPerInstance;
  FoldAggregation aggregation = FoldAggregation::kPooled;
  std::size_t folds = 5;
  std::size_t ig_steps = attr::kDefaultIgSteps;
  std::size_t permutations = 64;
  std::uint64_t seed = 0;
  unsigned jobs = 1;

  void validate() const;
};

/// Column label used in tables and plots, e.g. "ig" -> "IG".
std::string method_label(const std::string& method);

struct FoldSummary {
  std::size_t fold = 0;
  std::size_t train_instances = 0;
  std::size_t test_instances = 0;
  int best_epoch = -1;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct CurveDiagnostics {
  std::string class_label;
  std::string method;
  fad::MonotonicityDiagnostics monotonicity;
};

struct FadResult {
  fad::NAUCReport report;
  std::vector<std::string> resolved_methods;   // per column, e.g. "shapley-sampled"
  std::vector<fad::FADCurve> curves;           // aggregated, class-major then method
  std::vector<fad::FADCurve> fold_curves;
  std::vector<CurveDiagnostics> diagnostics;
  ClassMetrics metrics;                        // pooled out-of-fold predictions
  std::vector<FoldSummary> folds;
};

/// Full cross-validated FAD analysis. Output is identical for any `jobs`.
FadResult run_fad_analysis(const data::TabularDataset& dataset, const ModelSettings& model,
                           const FadSettings& settings);

/// Fraction of (report, class) pairs in which `method` has a strictly lower
/// N-AUC than `reference`. Pairs where `reference` is excluded are skipped;
/// pairs where `method` is excluded count as losses.
double win_rate(std::span<const FadResult> results, const std::string& method,
                const std::string& reference);

}  // namespace fadx::pipeline

#endif  // FADX_PIPELINE_HPP_
