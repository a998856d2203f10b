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

#ifndef FADX_ATTRIBUTION_HPP_
#define FADX_ATTRIBUTION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fadx/nncore.hpp"
#include "json.hpp"

namespace fadx::attr {

enum class FeatureKind { kContinuous, kBinary };

std::string_view to_string(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view text);

enum class BaselinePolicy { kMean, kZero, kCustom };

std::string_view to_string(BaselinePolicy policy);

/// Per-feature "absence" values shared by IG, the Shapley value function and
/// FAD dropping.
struct BaselineVector {
  std::vector<double> values;
  std::vector<BaselinePolicy> policies;

  std::size_t dim() const { return values.size(); }
};

/// Continuous features take their training mean, binary features 0.
/// Throws ConfigError on empty data.
BaselineVector make_baseline(const nn::Samples& training, std::span<const FeatureKind> kinds);

BaselineVector zero_baseline(std::size_t dim);

/// Returned verbatim, every feature tagged custom.
BaselineVector custom_baseline(std::vector<double> values);

enum class Method { kIntegratedGradients, kShapleyExact, kShapleySampled, kOracle, kRandom };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

struct AttributionMetadata {
  std::size_t steps = 0;         // IG
  std::size_t permutations = 0;  // sampled Shapley (d! when exhaustive)
  std::uint64_t seed = 0;
  bool exhaustive = false;
  // F(x), F(baseline) and F(x) - F(baseline) - sum(scores).
  double output_at_input = 0.0;
  double output_at_baseline = 0.0;
  double completeness_gap = 0.0;
  std::vector<double> standard_errors;  // sampled Shapley only
};

struct AttributionVector {
  std::vector<double> scores;
  std::size_t target_class = 0;
  Method method = Method::kIntegratedGradients;
  nn::GradientTarget target = nn::GradientTarget::kProbability;
  AttributionMetadata metadata;

  std::size_t dim() const { return scores.size(); }
};

inline constexpr std::size_t kDefaultIgSteps = 64;
inline constexpr std::size_t kExactEnumerationLimit = 15;
inline constexpr std::size_t kExhaustivePermutationLimit = 10;

/// Midpoint Riemann sum of the straight-line path integral from the baseline
/// to x. The differentiated output is the network's gradient target.
AttributionVector integrated_gradients(const nn::DenseNetwork& net, std::span<const double> x,
                                       const BaselineVector& baseline, std::size_t target_class,
                                       std::size_t steps = kDefaultIgSteps);

/// Value of a coalition: F_target at the composite taking x on `present`
/// features and the baseline elsewhere. Bit i of `coalition` marks feature i.
double coalition_value(const nn::DenseNetwork& net, std::span<const double> x,
                       const BaselineVector& baseline, std::size_t target_class,
                       std::uint64_t coalition);

/// Shapley values by enumerating all 2^d coalitions. Refuses (ConfigError)
/// above `limit` features.
AttributionVector shapley_exact(const nn::DenseNetwork& net, std::span<const double> x,
                                const BaselineVector& baseline, std::size_t target_class,
                                std::size_t limit = kExactEnumerationLimit);

/// Monte Carlo permutation estimate with per-feature standard errors.
AttributionVector shapley_sampled(const nn::DenseNetwork& net, std::span<const double> x,
                                  const BaselineVector& baseline, std::size_t target_class,
                                  std::size_t permutations, std::uint64_t seed);

/// Walks every one of the d! orderings (d <= 10), tallies how often each
/// predecessor set occurs, and reduces in coalition order. Equals
/// shapley_exact bit for bit.
AttributionVector shapley_exhaustive(const nn::DenseNetwork& net, std::span<const double> x,
                                     const BaselineVector& baseline, std::size_t target_class);

/// Score 1 on the given features and 0 elsewhere.
AttributionVector oracle_attribution(std::size_t dim, std::span<const std::size_t> informative,
                                     std::size_t target_class);

/// Independent uniform scores on [0, 1); ranking is a random permutation.
AttributionVector random_attribution(std::size_t dim, std::size_t target_class,
                                     std::uint64_t seed);

/// Feature indices sorted by |score| descending, ties by ascending index.
struct ImportanceRanking {
  std::vector<std::size_t> order;
  static constexpr std::string_view kTieBreak = "ascending-index";

  std::size_t dim() const { return order.size(); }
};

ImportanceRanking importance_ranking(std::span<const double> scores);
ImportanceRanking importance_ranking(const AttributionVector& attr);

/// Ranking by mean |score| over several instances.
ImportanceRanking mean_magnitude_ranking(std::span<const AttributionVector> attrs);

/// One JSON row per feature: name, score, share = |score| / sum |score|,
/// and 1-based rank by |score|.
nlohmann::ordered_json features_to_json(const AttributionVector& attr,
                                        std::span<const std::string> feature_names);

nlohmann::ordered_json to_json(const AttributionVector& attr,
                               std::span<const std::string> feature_names);
AttributionVector attribution_from_json(const nlohmann::json& doc);

}  // namespace fadx::attr

#endif  // FADX_ATTRIBUTION_HPP_
