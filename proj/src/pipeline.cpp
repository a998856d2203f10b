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

#include "fadx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fadx/error.hpp"
#include "fadx/parallel.hpp"
#include "fadx/rng.hpp"

namespace fadx::pipeline {
namespace {

// Seed streams. Every random draw in an analysis derives from one of these
// so that serial and parallel runs agree.
enum Stream : std::uint64_t {
  kFoldStream = 1,
  kSplitStream = 1000,
  kInitStream = 2000,
  kShuffleStream = 3000,
  kShapleyStream = 4000,
  kRandomStream = 5000,
};

struct ResolvedMethod {
  std::string requested;
  attr::Method method;
};

std::vector<ResolvedMethod> resolve_methods(const FadSettings& settings, std::size_t dim) {
  std::vector<ResolvedMethod> out;
  for (const auto& m : settings.methods) {
    if (m == "shapley") {
      out.push_back({m, dim <= attr::kExactEnumerationLimit ? attr::Method::kShapleyExact
                                                            : attr::Method::kShapleySampled});
    } else {
      out.push_back({m, attr::parse_method(m)});
    }
  }
  return out;
}

struct InstanceOutcome {
  std::size_t index = 0;  // into the dataset
  std::size_t label = 0;
  std::size_t prediction = 0;
  std::vector<std::vector<std::uint8_t>> by_method;
};

struct FoldOutput {
  FoldSummary summary;
  std::vector<InstanceOutcome> instances;
};

FoldOutput run_fold(const data::TabularDataset& ds, const ModelSettings& model,
                    const FadSettings& settings, const FoldPlan& plan, std::size_t fold,
                    std::span<const ResolvedMethod> methods, const fad::DropSchedule& schedule) {
  const auto train_idx = plan.train_indices(fold);
  const auto test_idx = plan.test_indices(fold);
  const nn::Samples train = data::subset(ds.samples, train_idx);

  const HoldoutSplit split = validation_split(train, ds.class_count(), model.validation_fraction,
                                              mix_seed(settings.seed, kSplitStream + fold));
  const nn::Samples fit = data::subset(train, split.fit);
  const nn::Samples validation = data::subset(train, split.validation);
  if (fit.size() == 0) throw DegenerateInputError(fmt::format("fold {} has no training instances", fold));

  nn::DenseNetwork init = nn::DenseNetwork::initialize(
      {ds.dim(), model.hidden, ds.class_count()}, mix_seed(model.optimizer.seed, kInitStream + fold));
  if (model.standardize) init.set_scaler(fit_scaler(fit, ds.kinds));
  init.set_gradient_target(model.gradient_target);
  nn::TrainConfig optimizer = model.optimizer;
  optimizer.seed = mix_seed(model.optimizer.seed, kShuffleStream + fold);
  const nn::TrainResult trained =
      nn::train(fit, validation.size() > 0 ? &validation : nullptr, std::move(init), optimizer);
  const nn::DenseNetwork& net = trained.network;

  const attr::BaselineVector baseline = settings.baseline == BaselineMode::kMean
                                            ? attr::make_baseline(fit, ds.kinds)
                                            : attr::zero_baseline(ds.dim());

  FoldOutput out;
  out.summary.fold = fold;
  out.summary.train_instances = train.size();
  out.summary.test_instances = test_idx.size();
  out.summary.best_epoch = trained.best_epoch;
  out.summary.train_accuracy = nn::accuracy(net, fit);

  // attributions[method][local test index]
  std::vector<std::vector<attr::AttributionVector>> attributions(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t i : test_idx) {
      const auto x = ds.samples.row(i);
      const std::size_t label = ds.samples.labels[i];
      switch (methods[m].method) {
        case attr::Method::kIntegratedGradients:
          attributions[m].push_back(attr::integrated_gradients(net, x, baseline, label, settings.ig_steps));
          break;
        case attr::Method::kShapleyExact:
          attributions[m].push_back(attr::shapley_exact(net, x, baseline, label));
          break;
        case attr::Method::kShapleySampled:
          attributions[m].push_back(attr::shapley_sampled(
              net, x, baseline, label, settings.permutations,
              mix_seed(mix_seed(settings.seed, kShapleyStream + m), i)));
          break;
        case attr::Method::kOracle:
          if (ds.informative.empty()) {
            throw ConfigError("oracle method needs a dataset with ground-truth informative features");
          }
          attributions[m].push_back(attr::oracle_attribution(ds.dim(), ds.informative, label));
          break;
        case attr::Method::kRandom:
          attributions[m].push_back(attr::random_attribution(
              ds.dim(), label, mix_seed(mix_seed(settings.seed, kRandomStream + m), i)));
          break;
      }
    }
  }

  // rankings[method][local test index]
  std::vector<std::vector<attr::ImportanceRanking>> rankings(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (const auto& a : attributions[m]) rankings[m].push_back(attr::importance_ranking(a));
    if (settings.ranking != RankingMode::kClassGlobal) continue;
    for (std::size_t c = 0; c < ds.class_count(); ++c) {
      std::vector<attr::AttributionVector> members;
      for (std::size_t t = 0; t < test_idx.size(); ++t) {
        if (ds.samples.labels[test_idx[t]] == c) members.push_back(attributions[m][t]);
      }
      if (members.empty()) continue;
      const auto shared = attr::mean_magnitude_ranking(members);
      for (std::size_t t = 0; t < test_idx.size(); ++t) {
        if (ds.samples.labels[test_idx[t]] == c) rankings[m][t] = shared;
      }
    }
  }

  std::size_t hits = 0;
  for (std::size_t t = 0; t < test_idx.size(); ++t) {
    const std::size_t i = test_idx[t];
    InstanceOutcome o;
    o.index = i;
    o.label = ds.samples.labels[i];
    o.prediction = nn::predict(net, ds.samples.row(i));
    hits += o.prediction == o.label;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      o.by_method.push_back(
          fad::drop_outcomes(net, ds.samples.row(i), rankings[m][t], baseline, schedule, o.label));
    }
    out.instances.push_back(std::move(o));
  }
  out.summary.test_accuracy =
      test_idx.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(test_idx.size());
  return out;
}

}  // namespace

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_kfold(std::span<const std::size_t> labels, std::size_t class_count,
                          std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold cross-validation needs k >= 2");
  std::vector<std::vector<std::size_t>> members(class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count) throw IndexError(fmt::format("label {} out of range", labels[i]));
    members[labels[i]].push_back(i);
  }
  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.fold_of.assign(labels.size(), 0);
  std::size_t smallest = labels.size();
  for (std::size_t c = 0; c < class_count; ++c) {
    if (members[c].empty()) throw ConfigError(fmt::format("class {} has no instances", c));
    smallest = std::min(smallest, members[c].size());
  }
  if (k > smallest) {
    plan.warnings.push_back(fmt::format(
        "k = {} exceeds the smallest class size {}; some folds lack that class", k, smallest));
  }
  Rng rng(seed);
  std::size_t next_fold = 0;
  for (std::size_t c = 0; c < class_count; ++c) {
    rng.shuffle(std::span<std::size_t>(members[c]));
    for (std::size_t i : members[c]) {
      plan.fold_of[i] = next_fold;
      next_fold = (next_fold + 1) % k;
    }
  }
  return plan;
}

HoldoutSplit validation_split(const nn::Samples& samples, std::size_t class_count,
                              double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("validation fraction must lie in [0, 1)");
  HoldoutSplit split;
  Rng rng(seed);
  for (std::size_t c = 0; c < class_count; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples.labels[i] == c) members.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(members));
    const auto held =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(members.size())));
    for (std::size_t k = 0; k < members.size(); ++k) {
      (k < held ? split.validation : split.fit).push_back(members[k]);
    }
  }
  std::sort(split.fit.begin(), split.fit.end());
  std::sort(split.validation.begin(), split.validation.end());
  return split;
}

nn::InputScaler fit_scaler(const nn::Samples& samples, std::span<const attr::FeatureKind> kinds) {
  if (kinds.size() != samples.dim) throw ShapeError("feature kinds do not match data dim");
  if (samples.size() == 0) throw ConfigError("cannot fit a scaler on empty data");
  nn::InputScaler s;
  s.offset.assign(samples.dim, 0.0);
  s.scale.assign(samples.dim, 1.0);
  const double n = static_cast<double>(samples.size());
  for (std::size_t j = 0; j < samples.dim; ++j) {
    if (kinds[j] != attr::FeatureKind::kContinuous) continue;
    double mean = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) mean += samples.row(i)[j];
    mean /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double d = samples.row(i)[j] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / n);
    s.offset[j] = mean;
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

ClassMetrics classification_metrics(std::span<const std::size_t> predictions,
                                    std::span<const std::size_t> labels, std::size_t class_count) {
  if (predictions.size() != labels.size()) throw ShapeError("predictions and labels differ in length");
  if (labels.empty()) throw DegenerateInputError("classification metrics of an empty set");
  std::vector<std::size_t> tp(class_count, 0);
  std::vector<std::size_t> predicted(class_count, 0);
  std::vector<std::size_t> support(class_count, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= class_count || predictions[i] >= class_count) {
      throw IndexError("class index out of range in classification metrics");
    }
    ++support[labels[i]];
    ++predicted[predictions[i]];
    if (labels[i] == predictions[i]) {
      ++tp[labels[i]];
      ++correct;
    }
  }
  ClassMetrics m;
  const double total = static_cast<double>(labels.size());
  for (std::size_t c = 0; c < class_count; ++c) {
    if (support[c] == 0) continue;
    ClassRow row;
    row.class_index = c;
    row.support = support[c];
    row.recall = static_cast<double>(tp[c]) / static_cast<double>(support[c]);
    row.no_predictions = predicted[c] == 0;
    row.precision = row.no_predictions ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(predicted[c]);
    row.f1 = row.precision + row.recall > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    const double w = static_cast<double>(support[c]) / total;
    m.weighted_precision += w * row.precision;
    m.weighted_recall += w * row.recall;
    m.weighted_f1 += w * row.f1;
    m.rows.push_back(row);
  }
  m.accuracy = static_cast<double>(correct) / total;
  return m;
}

data::TabularDataset generate_vital_few(const VitalFewConfig& config) {
  if (!(config.informative_fraction > 0.0 && config.informative_fraction < 1.0)) {
    throw ConfigError("informative_fraction must lie in (0, 1)");
  }
  if (config.classes < 2) throw ConfigError("generator needs at least two classes");
  if (config.instances == 0) throw ConfigError("generator needs at least one instance");
  const auto informative_count = static_cast<std::size_t>(
      std::llround(config.informative_fraction * static_cast<double>(config.features)));
  if (informative_count < 1) {
    throw ConfigError(fmt::format("{} features x fraction {} leaves no informative feature",
                                  config.features, config.informative_fraction));
  }
  Rng rng(config.seed);
  data::TabularDataset ds;
  const int width = config.features > 1 ? static_cast<int>(std::to_string(config.features - 1).size()) : 1;
  for (std::size_t j = 0; j < config.features; ++j) {
    ds.feature_names.push_back(fmt::format("f{:0{}}", j, width));
    ds.kinds.push_back(attr::FeatureKind::kContinuous);
  }
  for (std::size_t c = 0; c < config.classes; ++c) ds.class_names.push_back(fmt::format("class{}", c));

  std::vector<std::size_t> all(config.features);
  std::iota(all.begin(), all.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(all));
  ds.informative.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(informative_count));
  std::sort(ds.informative.begin(), ds.informative.end());

  // means[c][j]
  const double other = -config.separation / static_cast<double>(config.classes - 1);
  std::vector<std::vector<double>> means(config.classes, std::vector<double>(config.features, 0.0));
  for (std::size_t t = 0; t < ds.informative.size(); ++t) {
    const std::size_t owner = t % config.classes;
    for (std::size_t c = 0; c < config.classes; ++c) {
      means[c][ds.informative[t]] = c == owner ? config.separation : other;
    }
  }

  std::vector<std::size_t> labels(config.instances);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % config.classes;
  rng.shuffle(std::span<std::size_t>(labels));
  ds.samples.dim = config.features;
  std::vector<double> x(config.features);
  for (std::size_t label : labels) {
    for (std::size_t j = 0; j < config.features; ++j) x[j] = means[label][j] + rng.normal();
    ds.samples.push_back(x, label);
  }
  return ds;
}

void FadSettings::validate() const {
  if (!(beta > 0.0) || beta > 100.0) throw ConfigError(fmt::format("beta must lie in (0, 100], got {}", beta));
  if (methods.empty()) throw ConfigError("at least one attribution method is required");
  for (const auto& m : methods) {
    if (m != "shapley") attr::parse_method(m);
  }
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (ig_steps < 1) throw ConfigError("ig_steps must be positive");
  if (permutations < 1) throw ConfigError("permutations must be positive");
}

std::string method_label(const std::string& method) {
  if (method == "ig") return "IG";
  if (method == "shapley") return "Shapley";
  if (method == "shapley-exact") return "Shapley-exact";
  if (method == "shapley-sampled") return "Shapley-sampled";
  if (method == "oracle") return "Oracle";
  if (method == "random") return "Random";
  return method;
}

FadResult run_fad_analysis(const data::TabularDataset& ds, const ModelSettings& model,
                           const FadSettings& settings) {
  settings.validate();
  model.optimizer.validate();
  ds.validate();
  if (ds.class_count() < 2) throw ConfigError("FAD analysis needs at least two classes");
  if (!(model.validation_fraction >= 0.0 && model.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in [0, 1)");
  }
  const auto methods = resolve_methods(settings, ds.dim());
  const fad::DropSchedule schedule = fad::default_schedule(ds.dim(), settings.beta);

  // Classes absent from the data cannot be stratified; they are reported as
  // excluded instead.
  std::vector<std::size_t> counts(ds.class_count(), 0);
  for (std::size_t label : ds.samples.labels) ++counts[label];
  std::vector<std::size_t> present;
  std::vector<std::size_t> compact(ds.class_count(), 0);
  for (std::size_t c = 0; c < ds.class_count(); ++c) {
    if (counts[c] > 0) {
      compact[c] = present.size();
      present.push_back(c);
    }
  }
  std::vector<std::size_t> compact_labels;
  for (std::size_t label : ds.samples.labels) compact_labels.push_back(compact[label]);
  const FoldPlan plan = stratified_kfold(compact_labels, present.size(), settings.folds,
                                         mix_seed(settings.seed, kFoldStream));

  std::vector<FoldOutput> folds(settings.folds);
  parallel_for(settings.folds, settings.jobs, [&](std::size_t f) {
    folds[f] = run_fold(ds, model, settings, plan, f, methods, schedule);
  });

  FadResult result;
  result.report.beta = settings.beta;
  for (const auto& m : methods) {
    result.report.methods.push_back(method_label(m.requested));
    result.resolved_methods.emplace_back(attr::to_string(m.method));
  }

  std::vector<std::size_t> predictions;
  std::vector<std::size_t> labels;
  for (const auto& f : folds) {
    result.folds.push_back(f.summary);
    for (const auto& o : f.instances) {
      predictions.push_back(o.prediction);
      labels.push_back(o.label);
    }
  }
  result.metrics = classification_metrics(predictions, labels, ds.class_count());

  for (std::size_t c = 0; c < ds.class_count(); ++c) {
    const std::string& name = ds.class_names[c];
    if (counts[c] == 0) {
      result.report.excluded_classes.push_back(name);
      continue;
    }
    std::vector<fad::FADCurve> by_method;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::vector<fad::FADCurve> per_fold;
      std::vector<std::vector<std::uint8_t>> pooled;
      for (const auto& f : folds) {
        std::vector<std::vector<std::uint8_t>> local;
        for (const auto& o : f.instances) {
          if (o.label == c) local.push_back(o.by_method[m]);
        }
        if (local.empty()) continue;
        fad::FADCurve curve = fad::curve_from_outcomes(local, schedule);
        curve.class_label = name;
        curve.method = result.report.methods[m];
        curve.fold = static_cast<int>(f.summary.fold);
        per_fold.push_back(curve);
        result.fold_curves.push_back(std::move(curve));
        pooled.insert(pooled.end(), local.begin(), local.end());
      }
      fad::FADCurve curve = settings.aggregation == FoldAggregation::kPooled
                                ? fad::curve_from_outcomes(pooled, schedule)
                                : fad::mean_curve(per_fold);
      curve.class_label = name;
      curve.method = result.report.methods[m];
      curve.fold = -1;
      result.diagnostics.push_back({name, curve.method, fad::monotonicity(curve, settings.beta)});
      by_method.push_back(curve);
      result.curves.push_back(std::move(curve));
    }
    result.report.rows.push_back(fad::make_row(name, counts[c], by_method, settings.beta));
  }
  return result;
}

double win_rate(std::span<const FadResult> results, const std::string& method,
                const std::string& reference) {
  std::size_t wins = 0;
  std::size_t total = 0;
  for (const auto& r : results) {
    const auto& cols = r.report.methods;
    const auto mi = std::find(cols.begin(), cols.end(), method_label(method));
    const auto ri = std::find(cols.begin(), cols.end(), method_label(reference));
    if (mi == cols.end() || ri == cols.end()) throw ConfigError("method not present in report");
    const auto m = static_cast<std::size_t>(mi - cols.begin());
    const auto ref = static_cast<std::size_t>(ri - cols.begin());
    for (const auto& row : r.report.rows) {
      if (!row.entries[ref]) continue;
      ++total;
      if (row.entries[m] && row.entries[m]->n_auc < row.entries[ref]->n_auc) ++wins;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(total);
}

}  // namespace fadx::pipeline
