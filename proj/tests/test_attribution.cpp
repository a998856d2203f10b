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

#include <cmath>
#include <random>

#include "fadx/attribution.hpp"
#include "fadx/error.hpp"
#include "support/oracles.hpp"

using namespace fadx;
using nn::GradientTarget;

namespace {

nn::DenseNetwork linear_logit(std::vector<double> w, double bias = 0.0) {
  nn::DenseLayer layer = nn::DenseLayer::zeros(w.size(), 2);
  for (std::size_t i = 0; i < w.size(); ++i) layer.weight(0, i) = w[i];
  layer.bias[0] = bias;
  return nn::DenseNetwork({layer}, {}, GradientTarget::kLogit);
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("baseline policies") {
  nn::Samples train{2, {}, {}};
  train.push_back(std::vector<double>{1, 1}, 0);
  train.push_back(std::vector<double>{2, 0}, 1);
  train.push_back(std::vector<double>{3, 1}, 0);
  const attr::FeatureKind kinds[] = {attr::FeatureKind::kContinuous, attr::FeatureKind::kBinary};
  const auto b = attr::make_baseline(train, kinds);
  CHECK(b.values == std::vector<double>{2.0, 0.0});
  CHECK(b.policies[0] == attr::BaselinePolicy::kMean);
  CHECK(b.policies[1] == attr::BaselinePolicy::kZero);

  const auto custom = attr::custom_baseline({0.25, -4.0});
  CHECK(custom.values == std::vector<double>{0.25, -4.0});
  CHECK(custom.policies == std::vector<attr::BaselinePolicy>(2, attr::BaselinePolicy::kCustom));

  CHECK_THROWS_AS(attr::make_baseline(nn::Samples{2, {}, {}}, kinds), ConfigError);
}

TEST_CASE("integrated gradients at the baseline is zero") {
  std::mt19937_64 gen(1);
  const auto net = testing::random_network(gen, 5, 3);
  const auto x = testing::random_vector(gen, 5);
  const auto a = attr::integrated_gradients(net, x, attr::custom_baseline(x), 1);
  for (double s : a.scores) CHECK(s == 0.0);
}

TEST_CASE("integrated gradients on a linear logit") {
  const auto net = linear_logit({2.0, 3.0});
  const auto a = attr::integrated_gradients(net, std::vector<double>{1, 1}, attr::zero_baseline(2), 0, 64);
  CHECK(a.scores == std::vector<double>{2.0, 3.0});
  CHECK(a.method == attr::Method::kIntegratedGradients);
  CHECK(a.metadata.steps == 64);
  CHECK(std::abs(a.metadata.completeness_gap) <= 1e-15);
}

TEST_CASE("integrated gradients completeness on random networks") {
  std::mt19937_64 gen(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto net = testing::random_network(gen, 6, 3);
    const auto x = testing::random_vector(gen, 6, -2, 2);
    const auto base = testing::random_vector(gen, 6, -1, 1);
    const auto a = attr::integrated_gradients(net, x, attr::custom_baseline(base), trial % 3, 512);
    const double delta = testing::reference_output(net, x, trial % 3, net.gradient_target()) -
                         testing::reference_output(net, base, trial % 3, net.gradient_target());
    CHECK(std::abs(sum(a.scores) - delta) <= 1e-3 * std::abs(delta) + 1e-6);
    CHECK(std::abs(a.metadata.completeness_gap - (delta - sum(a.scores))) <= 1e-12);
  }
}

TEST_CASE("integrated gradients validation") {
  const auto net = linear_logit({1.0, 1.0});
  CHECK_THROWS_AS(attr::integrated_gradients(net, std::vector<double>{1, 1}, attr::zero_baseline(2), 0, 0),
                  ConfigError);
  CHECK_THROWS_AS(attr::integrated_gradients(net, std::vector<double>{1, 1}, attr::zero_baseline(3), 0),
                  ShapeError);
  CHECK_THROWS_AS(attr::integrated_gradients(net, std::vector<double>{1, 1}, attr::zero_baseline(2), 5),
                  IndexError);
}

TEST_CASE("brute-force oracle reproduces the product game") {
  const auto phi = testing::brute_force_shapley(2, [](const std::vector<bool>& s) {
    return (s[0] ? 1.0 : 0.0) * (s[1] ? 1.0 : 0.0);
  });
  CHECK(phi == std::vector<double>{0.5, 0.5});
}

TEST_CASE("exact Shapley matches brute-force enumeration") {
  std::mt19937_64 gen(3);
  for (std::size_t d = 1; d <= 7; ++d) {
    const auto net = testing::random_network(gen, d, 3);
    const auto x = testing::random_vector(gen, d, -2, 2);
    const auto base = testing::random_vector(gen, d);
    const auto a = attr::shapley_exact(net, x, attr::custom_baseline(base), 2);
    const auto ref = testing::brute_force_shapley(d, testing::network_game(net, x, base, 2));
    for (std::size_t i = 0; i < d; ++i) CHECK(std::abs(a.scores[i] - ref[i]) <= 1e-12);
  }
}

TEST_CASE("exact Shapley on an additive model") {
  const auto net = linear_logit({1.5, -2.0, 0.5, 4.0}, 0.3);
  const std::vector<double> x{1, 2, -3, 0.5};
  const std::vector<double> b{0.5, -1, 1, 0.25};
  const auto a = attr::shapley_exact(net, x, attr::custom_baseline(b), 0);
  const double w[] = {1.5, -2.0, 0.5, 4.0};
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a.scores[i] - w[i] * (x[i] - b[i])) <= 1e-12);
}

TEST_CASE("Shapley at the baseline is zero") {
  std::mt19937_64 gen(4);
  const auto net = testing::random_network(gen, 6, 2);
  const auto x = testing::random_vector(gen, 6);
  for (double s : attr::shapley_exact(net, x, attr::custom_baseline(x), 0).scores) CHECK(s == 0.0);
  for (std::uint64_t seed : {1, 2, 3}) {
    for (double s : attr::shapley_sampled(net, x, attr::custom_baseline(x), 0, 10, seed).scores) CHECK(s == 0.0);
  }
}

TEST_CASE("exact Shapley refuses wide inputs") {
  const auto net = linear_logit(std::vector<double>(16, 1.0));
  const std::vector<double> x(16, 1.0);
  CHECK_THROWS_AS(attr::shapley_exact(net, x, attr::zero_baseline(16), 0), ConfigError);
  CHECK_THROWS_AS(attr::shapley_exhaustive(net, x, attr::zero_baseline(16), 0), ConfigError);
}

TEST_CASE("exhaustive permutations equal exact enumeration bit for bit") {
  std::mt19937_64 gen(5);
  for (std::size_t d = 1; d <= 8; ++d) {
    const auto net = testing::random_network(gen, d, 2);
    const auto x = testing::random_vector(gen, d, -2, 2);
    const auto b = attr::custom_baseline(testing::random_vector(gen, d));
    const auto exact = attr::shapley_exact(net, x, b, 1);
    const auto exhaustive = attr::shapley_exhaustive(net, x, b, 1);
    CHECK(exhaustive.scores == exact.scores);
    CHECK(exhaustive.metadata.exhaustive);
  }
}

TEST_CASE("sampled Shapley converges and is deterministic") {
  std::mt19937_64 gen(6);
  const auto net = testing::random_network(gen, 6, 3);
  const auto x = testing::random_vector(gen, 6, -2, 2);
  const auto b = attr::custom_baseline(testing::random_vector(gen, 6));
  const auto exact = attr::shapley_exact(net, x, b, 0);
  const auto a = attr::shapley_sampled(net, x, b, 0, 4000, 42);
  const auto again = attr::shapley_sampled(net, x, b, 0, 4000, 42);
  CHECK(a.scores == again.scores);
  double top = 0.0;
  for (double v : exact.scores) top = std::max(top, std::abs(v));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a.scores[i] - exact.scores[i]) <= 0.05 * (top + 1e-9));
  CHECK(a.metadata.standard_errors.size() == 6);
  // Every permutation telescopes, so the estimate is efficient exactly.
  CHECK(std::abs(sum(a.scores) - (a.metadata.output_at_input - a.metadata.output_at_baseline)) <= 1e-12);
}

TEST_CASE("importance ranking order and ties") {
  CHECK(attr::importance_ranking(std::vector<double>{0.2, -0.5, 0.1}).order == std::vector<std::size_t>{1, 0, 2});
  CHECK(attr::importance_ranking(std::vector<double>{0.3, 0.3}).order == std::vector<std::size_t>{0, 1});
  CHECK(attr::importance_ranking(std::vector<double>(5, 0.0)).order == std::vector<std::size_t>{0, 1, 2, 3, 4});
  CHECK(attr::importance_ranking(std::vector<double>{-0.3, 0.3, 0.0}).order == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("oracle and random attributions") {
  const std::size_t informative[] = {3, 1};
  const auto oracle = attr::oracle_attribution(5, informative, 0);
  CHECK(attr::importance_ranking(oracle).order == std::vector<std::size_t>{1, 3, 0, 2, 4});
  CHECK(attr::random_attribution(8, 0, 7).scores == attr::random_attribution(8, 0, 7).scores);
  CHECK(attr::random_attribution(8, 0, 7).scores != attr::random_attribution(8, 0, 8).scores);
}

TEST_CASE("attribution JSON round trip") {
  std::mt19937_64 gen(7);
  const auto net = testing::random_network(gen, 3, 2);
  const auto a = attr::integrated_gradients(net, std::vector<double>{1, 2, 3}, attr::zero_baseline(3), 1, 16);
  const std::vector<std::string> names{"a", "b", "c"};
  const auto back = attr::attribution_from_json(nlohmann::json::parse(attr::to_json(a, names).dump()));
  CHECK(back.scores == a.scores);
  CHECK(back.method == a.method);
  CHECK(back.target_class == 1);
}
