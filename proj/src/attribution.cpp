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

#include "fadx/attribution.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "fadx/error.hpp"
#include "fadx/rng.hpp"

namespace fadx::attr {
namespace {

void check_dims(const nn::DenseNetwork& net, std::span<const double> x,
                const BaselineVector& baseline, std::size_t target_class) {
  if (x.size() != net.input_dim() || baseline.dim() != net.input_dim()) {
    throw ShapeError(fmt::format("input dim {} / baseline dim {} do not match network input dim {}",
                                 x.size(), baseline.dim(), net.input_dim()));
  }
  if (target_class >= net.class_count()) {
    throw IndexError(fmt::format("target class {} out of range for {} classes", target_class,
                                 net.class_count()));
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("attribution input contains a non-finite value");
  }
}

double output(const nn::DenseNetwork& net, std::span<const double> x, std::size_t target_class) {
  return nn::target_output(net, x, target_class, net.gradient_target());
}

void finish(AttributionVector& attr, const nn::DenseNetwork& net, std::span<const double> x,
            const BaselineVector& baseline) {
  attr.target = net.gradient_target();
  attr.metadata.output_at_input = output(net, x, attr.target_class);
  attr.metadata.output_at_baseline = output(net, baseline.values, attr.target_class);
  const double total = std::accumulate(attr.scores.begin(), attr.scores.end(), 0.0);
  attr.metadata.completeness_gap =
      attr.metadata.output_at_input - attr.metadata.output_at_baseline - total;
}

// Exact factorials up to 20! (15! and below are exact in double).
double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t k = 2; k <= n; ++k) f *= static_cast<double>(k);
  return f;
}

std::vector<double> all_coalition_values(const nn::DenseNetwork& net, std::span<const double> x,
                                         const BaselineVector& baseline,
                                         std::size_t target_class) {
  const std::size_t d = x.size();
  std::vector<double> values(std::size_t{1} << d);
  std::vector<double> composite(d);
  for (std::uint64_t mask = 0; mask < values.size(); ++mask) {
    for (std::size_t i = 0; i < d; ++i) composite[i] = (mask >> i & 1U) ? x[i] : baseline.values[i];
    values[mask] = output(net, composite, target_class);
  }
  return values;
}

// phi_i = sum over S not containing i of weight(S, i) * (v(S + i) - v(S)),
// reduced in ascending coalition order.
template <typename Weight>
std::vector<double> reduce_marginals(std::size_t d, const std::vector<double>& values,
                                     Weight&& weight) {
  std::vector<double> phi(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << i;
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < values.size(); ++mask) {
      if (mask & bit) continue;
      total += weight(i, mask) * (values[mask | bit] - values[mask]);
    }
    phi[i] = total;
  }
  return phi;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
  return kind == FeatureKind::kBinary ? "binary" : "continuous";
}

FeatureKind parse_feature_kind(std::string_view text) {
  if (text == "continuous") return FeatureKind::kContinuous;
  if (text == "binary" || text == "indicator") return FeatureKind::kBinary;
  throw ConfigError(fmt::format("unknown feature kind '{}'", text));
}

std::string_view to_string(BaselinePolicy policy) {
  switch (policy) {
    case BaselinePolicy::kMean: return "mean";
    case BaselinePolicy::kZero: return "zero";
    case BaselinePolicy::kCustom: return "custom";
  }
  return "custom";
}

BaselineVector make_baseline(const nn::Samples& training, std::span<const FeatureKind> kinds) {
  if (training.size() == 0) throw ConfigError("baseline needs non-empty training data");
  if (kinds.size() != training.dim) throw ShapeError("feature kinds do not match data dim");
  BaselineVector b;
  b.values.assign(training.dim, 0.0);
  b.policies.assign(training.dim, BaselinePolicy::kZero);
  for (std::size_t j = 0; j < training.dim; ++j) {
    if (kinds[j] != FeatureKind::kContinuous) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < training.size(); ++i) total += training.row(i)[j];
    b.values[j] = total / static_cast<double>(training.size());
    b.policies[j] = BaselinePolicy::kMean;
  }
  return b;
}

BaselineVector zero_baseline(std::size_t dim) {
  return BaselineVector{std::vector<double>(dim, 0.0),
                        std::vector<BaselinePolicy>(dim, BaselinePolicy::kZero)};
}

BaselineVector custom_baseline(std::vector<double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError("custom baseline contains a non-finite value");
  }
  const std::size_t d = values.size();
  return BaselineVector{std::move(values), std::vector<BaselinePolicy>(d, BaselinePolicy::kCustom)};
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kIntegratedGradients: return "ig";
    case Method::kShapleyExact: return "shapley-exact";
    case Method::kShapleySampled: return "shapley-sampled";
    case Method::kOracle: return "oracle";
    case Method::kRandom: return "random";
  }
  return "ig";
}

Method parse_method(std::string_view text) {
  if (text == "ig") return Method::kIntegratedGradients;
  if (text == "shapley-exact") return Method::kShapleyExact;
  if (text == "shapley-sampled") return Method::kShapleySampled;
  if (text == "oracle") return Method::kOracle;
  if (text == "random") return Method::kRandom;
  throw ConfigError(fmt::format("unknown attribution method '{}'", text));
}

AttributionVector integrated_gradients(const nn::DenseNetwork& net, std::span<const double> x,
                                       const BaselineVector& baseline, std::size_t target_class,
                                       std::size_t steps) {
  if (steps < 1) throw ConfigError("integrated gradients needs at least one step");
  check_dims(net, x, baseline, target_class);
  const std::size_t d = x.size();
  std::vector<double> delta(d);
  for (std::size_t i = 0; i < d; ++i) delta[i] = x[i] - baseline.values[i];

  std::vector<double> grad_sum(d, 0.0);
  std::vector<double> point(d);
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = (static_cast<double>(k) - 0.5) / static_cast<double>(steps);
    for (std::size_t i = 0; i < d; ++i) point[i] = baseline.values[i] + t * delta[i];
    const auto g = nn::input_gradient(net, point, target_class);
    for (std::size_t i = 0; i < d; ++i) grad_sum[i] += g.values[i];
  }
  AttributionVector attr;
  attr.method = Method::kIntegratedGradients;
  attr.target_class = target_class;
  attr.scores.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    attr.scores[i] = delta[i] * (grad_sum[i] / static_cast<double>(steps));
  }
  attr.metadata.steps = steps;
  finish(attr, net, x, baseline);
  return attr;
}

double coalition_value(const nn::DenseNetwork& net, std::span<const double> x,
                       const BaselineVector& baseline, std::size_t target_class,
                       std::uint64_t coalition) {
  check_dims(net, x, baseline, target_class);
  std::vector<double> composite(baseline.values);
  for (std::size_t i = 0; i < x.size() && i < 64; ++i) {
    if (coalition >> i & 1U) composite[i] = x[i];
  }
  return output(net, composite, target_class);
}

AttributionVector shapley_exact(const nn::DenseNetwork& net, std::span<const double> x,
                                const BaselineVector& baseline, std::size_t target_class,
                                std::size_t limit) {
  check_dims(net, x, baseline, target_class);
  const std::size_t d = x.size();
  if (d > limit || d > 20) {
    throw ConfigError(fmt::format(
        "exact Shapley enumeration is limited to {} features (got {}); use shapley-sampled",
        std::min<std::size_t>(limit, 20), d));
  }
  const auto values = all_coalition_values(net, x, baseline, target_class);
  std::vector<double> fact(d + 1);
  for (std::size_t n = 0; n <= d; ++n) fact[n] = factorial(n);
  AttributionVector attr;
  attr.method = Method::kShapleyExact;
  attr.target_class = target_class;
  attr.scores = reduce_marginals(d, values, [&](std::size_t, std::uint64_t mask) {
    const auto s = static_cast<std::size_t>(std::popcount(mask));
    return fact[s] * fact[d - s - 1] / fact[d];
  });
  finish(attr, net, x, baseline);
  return attr;
}

AttributionVector shapley_exhaustive(const nn::DenseNetwork& net, std::span<const double> x,
                                     const BaselineVector& baseline, std::size_t target_class) {
  check_dims(net, x, baseline, target_class);
  const std::size_t d = x.size();
  if (d > kExhaustivePermutationLimit) {
    throw ConfigError(fmt::format("exhaustive permutation mode is limited to {} features",
                                  kExhaustivePermutationLimit));
  }
  // counts[i][S]: orderings in which the features preceding i are exactly S.
  const std::size_t masks = std::size_t{1} << d;
  std::vector<std::uint64_t> counts(d * masks, 0);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t orderings = 0;
  do {
    std::uint64_t before = 0;
    for (std::size_t feature : order) {
      ++counts[feature * masks + before];
      before |= std::uint64_t{1} << feature;
    }
    ++orderings;
  } while (std::next_permutation(order.begin(), order.end()));

  const auto values = all_coalition_values(net, x, baseline, target_class);
  const double total = factorial(d);
  AttributionVector attr;
  attr.method = Method::kShapleySampled;
  attr.target_class = target_class;
  attr.scores = reduce_marginals(d, values, [&](std::size_t i, std::uint64_t mask) {
    return static_cast<double>(counts[i * masks + mask]) / total;
  });
  attr.metadata.permutations = orderings;
  attr.metadata.exhaustive = true;
  finish(attr, net, x, baseline);
  return attr;
}

AttributionVector shapley_sampled(const nn::DenseNetwork& net, std::span<const double> x,
                                  const BaselineVector& baseline, std::size_t target_class,
                                  std::size_t permutations, std::uint64_t seed) {
  if (permutations < 1) throw ConfigError("sampled Shapley needs at least one permutation");
  check_dims(net, x, baseline, target_class);
  const std::size_t d = x.size();
  Rng rng(seed);
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> composite(d);
  // Welford running mean / M2 per feature.
  std::vector<double> mean(d, 0.0);
  std::vector<double> m2(d, 0.0);
  const double empty_value = output(net, baseline.values, target_class);
  for (std::size_t p = 1; p <= permutations; ++p) {
    rng.shuffle(std::span<std::size_t>(order));
    composite = baseline.values;
    double previous = empty_value;
    for (std::size_t feature : order) {
      composite[feature] = x[feature];
      const double current = output(net, composite, target_class);
      const double contribution = current - previous;
      previous = current;
      const double shift = contribution - mean[feature];
      mean[feature] += shift / static_cast<double>(p);
      m2[feature] += shift * (contribution - mean[feature]);
    }
  }
  AttributionVector attr;
  attr.method = Method::kShapleySampled;
  attr.target_class = target_class;
  attr.scores = mean;
  attr.metadata.permutations = permutations;
  attr.metadata.seed = seed;
  attr.metadata.standard_errors.assign(d, 0.0);
  if (permutations > 1) {
    const double n = static_cast<double>(permutations);
    for (std::size_t i = 0; i < d; ++i) {
      attr.metadata.standard_errors[i] = std::sqrt(m2[i] / (n - 1.0) / n);
    }
  }
  finish(attr, net, x, baseline);
  return attr;
}

AttributionVector oracle_attribution(std::size_t dim, std::span<const std::size_t> informative,
                                     std::size_t target_class) {
  AttributionVector attr;
  attr.method = Method::kOracle;
  attr.target_class = target_class;
  attr.scores.assign(dim, 0.0);
  for (std::size_t i : informative) {
    if (i >= dim) throw IndexError(fmt::format("informative index {} out of range", i));
    attr.scores[i] = 1.0;
  }
  return attr;
}

AttributionVector random_attribution(std::size_t dim, std::size_t target_class,
                                     std::uint64_t seed) {
  Rng rng(seed);
  AttributionVector attr;
  attr.method = Method::kRandom;
  attr.target_class = target_class;
  attr.scores.resize(dim);
  for (double& s : attr.scores) s = rng.uniform();
  attr.metadata.seed = seed;
  return attr;
}

ImportanceRanking importance_ranking(std::span<const double> scores) {
  ImportanceRanking ranking;
  ranking.order.resize(scores.size());
  std::iota(ranking.order.begin(), ranking.order.end(), std::size_t{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(scores[a]) > std::abs(scores[b]);
  });
  return ranking;
}

ImportanceRanking importance_ranking(const AttributionVector& attr) {
  return importance_ranking(attr.scores);
}

ImportanceRanking mean_magnitude_ranking(std::span<const AttributionVector> attrs) {
  if (attrs.empty()) throw DegenerateInputError("no attributions to rank");
  std::vector<double> mean(attrs.front().dim(), 0.0);
  for (const auto& a : attrs) {
    if (a.dim() != mean.size()) throw ShapeError("attribution dims differ");
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += std::abs(a.scores[i]);
  }
  for (double& m : mean) m /= static_cast<double>(attrs.size());
  return importance_ranking(mean);
}

nlohmann::ordered_json features_to_json(const AttributionVector& attr,
                                        std::span<const std::string> feature_names) {
  const ImportanceRanking ranking = importance_ranking(attr);
  std::vector<std::size_t> rank(attr.dim());
  for (std::size_t r = 0; r < ranking.order.size(); ++r) rank[ranking.order[r]] = r + 1;
  double magnitude = 0.0;
  for (double s : attr.scores) magnitude += std::abs(s);
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < attr.dim(); ++i) {
    const std::string name =
        i < feature_names.size() ? feature_names[i] : fmt::format("f{}", i);
    rows.push_back({{"feature", name},
                    {"score", attr.scores[i]},
                    {"share", magnitude > 0.0 ? std::abs(attr.scores[i]) / magnitude : 0.0},
                    {"rank", rank[i]}});
  }
  return rows;
}

nlohmann::ordered_json to_json(const AttributionVector& attr,
                               std::span<const std::string> feature_names) {
  nlohmann::ordered_json meta;
  meta["gradient_target"] = std::string(nn::to_string(attr.target));
  if (attr.method == Method::kIntegratedGradients) meta["steps"] = attr.metadata.steps;
  if (attr.method == Method::kShapleySampled) {
    meta["permutations"] = attr.metadata.permutations;
    meta["exhaustive"] = attr.metadata.exhaustive;
    if (!attr.metadata.exhaustive) meta["seed"] = attr.metadata.seed;
    if (!attr.metadata.standard_errors.empty()) meta["standard_errors"] = attr.metadata.standard_errors;
  }
  if (attr.method == Method::kRandom) meta["seed"] = attr.metadata.seed;
  if (attr.method != Method::kOracle && attr.method != Method::kRandom) {
    meta["output_at_input"] = attr.metadata.output_at_input;
    meta["output_at_baseline"] = attr.metadata.output_at_baseline;
    meta["completeness_gap"] = attr.metadata.completeness_gap;
  }
  nlohmann::ordered_json doc;
  doc["method"] = std::string(to_string(attr.method));
  doc["target_class"] = attr.target_class;
  doc["metadata"] = std::move(meta);
  doc["features"] = features_to_json(attr, feature_names);
  return doc;
}

AttributionVector attribution_from_json(const nlohmann::json& doc) {
  AttributionVector attr;
  attr.method = parse_method(doc.at("method").get<std::string>());
  attr.target_class = doc.at("target_class").get<std::size_t>();
  const auto& meta = doc.value("metadata", nlohmann::json::object());
  attr.target = nn::parse_gradient_target(meta.value("gradient_target", "probability"));
  attr.metadata.steps = meta.value("steps", std::size_t{0});
  attr.metadata.permutations = meta.value("permutations", std::size_t{0});
  attr.metadata.seed = meta.value("seed", std::uint64_t{0});
  attr.metadata.exhaustive = meta.value("exhaustive", false);
  attr.metadata.completeness_gap = meta.value("completeness_gap", 0.0);
  for (const auto& row : doc.at("features")) {
    const double score = row.at("score").get<double>();
    if (!std::isfinite(score)) throw DomainError("attribution score is not finite");
    attr.scores.push_back(score);
  }
  return attr;
}

}  // namespace fadx::attr
