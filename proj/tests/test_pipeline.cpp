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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fadx/dataset.hpp"
#include "fadx/error.hpp"
#include "fadx/pipeline.hpp"
#include "fadx/report.hpp"

using namespace fadx;
using namespace fadx::pipeline;

namespace {

std::vector<std::size_t> ratio_labels(std::size_t n0, std::size_t n1) {
  std::vector<std::size_t> labels(n0, 0);
  labels.insert(labels.end(), n1, 1);
  return labels;
}

// Per-fold count of each class.
std::vector<std::vector<std::size_t>> fold_counts(const FoldPlan& plan, std::span<const std::size_t> labels,
                                                  std::size_t classes) {
  std::vector<std::vector<std::size_t>> counts(plan.k, std::vector<std::size_t>(classes, 0));
  for (std::size_t i = 0; i < labels.size(); ++i) ++counts[plan.fold_of[i]][labels[i]];
  return counts;
}

ModelSettings quick_model(int epochs) {
  ModelSettings m;
  m.hidden = {16};
  m.optimizer.epochs = epochs;
  return m;
}

}  // namespace

TEST_CASE("stratified folds on a balanced toy set") {
  const auto labels = ratio_labels(5, 5);
  const auto plan = stratified_kfold(labels, 2, 5, 3);
  for (const auto& row : fold_counts(plan, labels, 2)) CHECK(row == std::vector<std::size_t>{1, 1});
  CHECK(plan.fold_of == stratified_kfold(labels, 2, 5, 3).fold_of);
  CHECK(plan.warnings.empty());
}

TEST_CASE("stratified folds at 7:3") {
  const auto labels = ratio_labels(70, 30);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto plan = stratified_kfold(labels, 2, 5, seed);
    for (const auto& row : fold_counts(plan, labels, 2)) {
      CHECK(std::abs(static_cast<long>(row[0]) - 14) <= 1);
      CHECK(std::abs(static_cast<long>(row[1]) - 6) <= 1);
    }
  }
}

TEST_CASE("folds partition the instances") {
  std::vector<std::size_t> labels;
  for (std::size_t i = 0; i < 101; ++i) labels.push_back((i * 7) % 3);
  const auto plan = stratified_kfold(labels, 3, 4, 9);
  std::vector<int> seen(labels.size(), 0);
  for (std::size_t f = 0; f < plan.k; ++f) {
    const auto test = plan.test_indices(f);
    const auto train = plan.train_indices(f);
    CHECK(test.size() + train.size() == labels.size());
    std::set<std::size_t> overlap(test.begin(), test.end());
    for (std::size_t i : train) CHECK_FALSE(overlap.contains(i));
    for (std::size_t i : test) ++seen[i];
  }
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("fold errors and warnings") {
  const std::vector<std::size_t> labels{0, 0, 0, 1};
  CHECK(stratified_kfold(labels, 2, 2, 0).warnings.size() == 1);
  CHECK_THROWS_AS(stratified_kfold(labels, 3, 2, 0), ConfigError);
  CHECK_THROWS_AS(stratified_kfold(labels, 2, 1, 0), ConfigError);
}

TEST_CASE("classification metrics by hand") {
  const std::vector<std::size_t> labels{0, 0, 1, 1};
  const auto perfect = classification_metrics(labels, labels, 2);
  for (const auto& r : perfect.rows) {
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
  }
  const std::vector<std::size_t> constant{0, 0, 0, 0};
  const auto m = classification_metrics(constant, labels, 2);
  CHECK(m.rows[0].recall == 1.0);
  CHECK(m.rows[0].precision == 0.5);
  CHECK(m.rows[1].no_predictions);
  CHECK(m.rows[1].precision == 0.0);

  const auto missing = classification_metrics(labels, labels, 3);
  CHECK(missing.rows.size() == 2);
  CHECK_THROWS_AS(classification_metrics({}, {}, 2), DegenerateInputError);
}

TEST_CASE("weighted F1 lies between per-class extremes") {
  const std::vector<std::size_t> labels{0, 0, 0, 1, 1, 2, 2, 2, 2, 1};
  const std::vector<std::size_t> preds{0, 1, 0, 1, 2, 2, 2, 0, 2, 1};
  const auto m = classification_metrics(preds, labels, 3);
  double lo = 1.0;
  double hi = 0.0;
  for (const auto& r : m.rows) {
    lo = std::min(lo, r.f1);
    hi = std::max(hi, r.f1);
  }
  CHECK(m.weighted_f1 >= lo);
  CHECK(m.weighted_f1 <= hi);
}

TEST_CASE("vital-few generator") {
  VitalFewConfig config;
  config.seed = 4;
  const auto ds = generate_vital_few(config);
  CHECK(ds.informative.size() == 10);
  CHECK(ds.size() == 500);
  CHECK(ds.dim() == 50);
  const auto again = generate_vital_few(config);
  CHECK(again.samples.features == ds.samples.features);
  CHECK(again.samples.labels == ds.samples.labels);
  config.informative_fraction = 0.005;
  CHECK_THROWS_AS(generate_vital_few(config), ConfigError);
  config.informative_fraction = 1.0;
  CHECK_THROWS_AS(generate_vital_few(config), ConfigError);
}

TEST_CASE("noise features alone sit at chance, informative ones do not") {
  VitalFewConfig config;
  config.instances = 900;
  config.seed = 8;
  const auto ds = generate_vital_few(config);
  std::vector<std::size_t> noise;
  for (std::size_t j = 0; j < ds.dim(); ++j) {
    if (std::find(ds.informative.begin(), ds.informative.end(), j) == ds.informative.end()) noise.push_back(j);
  }
  auto project = [&](std::size_t from, std::size_t to, const std::vector<std::size_t>& cols) {
    nn::Samples s{cols.size(), {}, {}};
    for (std::size_t i = from; i < to; ++i) {
      std::vector<double> x;
      for (std::size_t j : cols) x.push_back(ds.samples.row(i)[j]);
      s.push_back(x, ds.samples.labels[i]);
    }
    return s;
  };
  std::vector<std::size_t> all(ds.dim());
  std::iota(all.begin(), all.end(), 0);
  nn::TrainConfig config_nn;
  config_nn.epochs = 30;
  for (const auto* cols : {&noise, &all}) {
    const auto train = project(0, 450, *cols);
    const auto valid = project(450, 600, *cols);
    const auto test = project(600, 900, *cols);
    const auto model = nn::train(train, &valid, nn::NetworkSpec{cols->size(), {16}, 3}, config_nn).network;
    const double acc = nn::accuracy(model, test);
    if (cols == &noise) {
      CHECK(std::abs(acc - 1.0 / 3.0) <= 0.1);
    } else {
      CHECK(acc >= 0.6);
    }
  }
}

TEST_CASE("constant model gives N-AUC of one") {
  data::TabularDataset ds;
  for (int j = 0; j < 5; ++j) {
    ds.feature_names.push_back("z" + std::to_string(j));
    ds.kinds.push_back(attr::FeatureKind::kContinuous);
  }
  ds.class_names = {"a", "b", "c"};
  ds.samples = nn::Samples{5, {}, {}};
  for (std::size_t i = 0; i < 60; ++i) ds.samples.push_back(std::vector<double>(5, 0.0), i % 3);
  FadSettings settings;
  settings.folds = 3;
  settings.ig_steps = 8;
  const auto result = run_fad_analysis(ds, quick_model(3), settings);
  std::size_t scored = 0;
  for (const auto& row : result.report.rows) {
    for (const auto& e : row.entries) {
      if (!e) continue;
      CHECK(e->n_auc == 1.0);
      ++scored;
    }
  }
  CHECK(scored >= 1);
}

TEST_CASE("analysis report shape and determinism across jobs") {
  VitalFewConfig config;
  config.instances = 150;
  config.features = 10;
  config.seed = 2;
  const auto ds = generate_vital_few(config);
  FadSettings settings;
  settings.methods = {"ig", "shapley", "oracle", "random"};
  settings.folds = 3;
  settings.ig_steps = 16;
  settings.seed = 5;
  auto model = quick_model(10);
  model.optimizer.seed = 5;
  const auto serial = run_fad_analysis(ds, model, settings);
  settings.jobs = 3;
  const auto parallel = run_fad_analysis(ds, model, settings);
  const std::vector<std::string> names = ds.class_names;
  CHECK(report::result_json(serial, names).dump() == report::result_json(parallel, names).dump());

  CHECK(serial.report.methods == std::vector<std::string>{"IG", "Shapley", "Oracle", "Random"});
  CHECK(serial.resolved_methods[1] == "shapley-exact");
  CHECK(serial.report.rows.size() == 3);
  std::size_t total = 0;
  for (const auto& row : serial.report.rows) {
    total += row.instances;
    for (const auto& e : row.entries) {
      if (e) CHECK((e->n_auc > 0.0 && e->n_auc <= 1.0));
    }
  }
  CHECK(total == 150);
  CHECK(serial.folds.size() == 3);
  CHECK(serial.fold_curves.size() == 3 * 3 * 4);

  settings.aggregation = FoldAggregation::kMean;
  settings.ranking = RankingMode::kClassGlobal;
  const auto averaged = run_fad_analysis(ds, model, settings);
  CHECK(averaged.report.rows.size() == 3);
}

TEST_CASE("analysis settings validation") {
  FadSettings settings;
  settings.methods = {};
  CHECK_THROWS_AS(settings.validate(), ConfigError);
  settings.methods = {"bogus"};
  CHECK_THROWS_AS(settings.validate(), ConfigError);
  settings.methods = {"ig"};
  settings.folds = 1;
  CHECK_THROWS_AS(settings.validate(), ConfigError);
}

TEST_CASE("dataset CSV round trip and errors") {
  VitalFewConfig config;
  config.instances = 20;
  config.features = 5;
  const auto ds = generate_vital_few(config);
  const auto back = data::load_dataset(data::dataset_to_csv(ds), data::sidecar_to_json(ds));
  CHECK(back.samples.features == ds.samples.features);
  CHECK(back.samples.labels == ds.samples.labels);
  CHECK(back.class_names == ds.class_names);
  CHECK(back.informative == ds.informative);
  try {
    data::load_dataset("a,b\n1,2\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    data::load_dataset("a,label\n1,x\n2\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  const auto inferred = data::load_dataset("a,flag,label\n0.5,1,y\n1.5,0,x\n");
  CHECK(inferred.kinds[1] == attr::FeatureKind::kBinary);
  CHECK(inferred.class_names == std::vector<std::string>{"x", "y"});
}
