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

// Independent reference implementations used by the test suite. Nothing here
// calls into the library code paths it is used to check.

#ifndef FADX_TESTS_SUPPORT_ORACLES_HPP_
#define FADX_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fadx/nncore.hpp"

namespace fadx::testing {

using Vec = std::vector<double>;

// GELU evaluated with 50 significant digits.
inline double gelu_high_precision(double x) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const Big bx(x);
  const Big phi = (Big(1) + boost::math::erf(bx / boost::multiprecision::sqrt(Big(2)))) / 2;
  return static_cast<double>(bx * phi);
}

// Random network with 0..max_hidden hidden layers and nonzero biases.
inline nn::DenseNetwork random_network(std::mt19937_64& gen, std::size_t input_dim,
                                       std::size_t class_count, std::size_t max_hidden = 3,
                                       std::size_t max_width = 32) {
  std::uniform_int_distribution<std::size_t> depth(0, max_hidden);
  std::uniform_int_distribution<std::size_t> width(1, max_width);
  nn::NetworkSpec spec{input_dim, {}, class_count};
  const std::size_t layers = depth(gen);
  for (std::size_t l = 0; l < layers; ++l) spec.hidden.push_back(width(gen));
  nn::DenseNetwork net = nn::DenseNetwork::initialize(spec, gen());
  std::uniform_real_distribution<double> bias(-0.5, 0.5);
  for (auto& layer : net.mutable_layers()) {
    for (double& b : layer.bias) b = bias(gen);
  }
  return net;
}

inline Vec random_vector(std::mt19937_64& gen, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (double& x : v) x = u(gen);
  return v;
}

// Plain forward pass written out again, with GELU via std::erf.
inline Vec reference_logits(const nn::DenseNetwork& net, std::span<const double> input) {
  Vec a(input.begin(), input.end());
  if (!net.scaler().is_identity()) {
    for (std::size_t j = 0; j < a.size(); ++j) a[j] = (a[j] - net.scaler().offset[j]) / net.scaler().scale[j];
  }
  const auto& layers = net.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    Vec z(layer.out_dim);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      double s = layer.bias[o];
      for (std::size_t i = 0; i < layer.in_dim; ++i) s += layer.weights[o * layer.in_dim + i] * a[i];
      z[o] = s;
    }
    if (l + 1 < layers.size()) {
      for (double& v : z) v = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    }
    a = std::move(z);
  }
  return a;
}

inline double reference_output(const nn::DenseNetwork& net, std::span<const double> x,
                               std::size_t cls, nn::GradientTarget target) {
  const Vec z = reference_logits(net, x);
  if (target == nn::GradientTarget::kLogit) return z[cls];
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - m);
  return std::exp(z[cls] - m) / total;
}

// Central differences of the target output with respect to the input.
inline Vec fd_input_gradient(const nn::DenseNetwork& net, std::span<const double> x,
                             std::size_t cls, nn::GradientTarget target, double h = 1e-5) {
  Vec grad(x.size());
  Vec probe(x.begin(), x.end());
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const double up = reference_output(net, probe, cls, target);
    probe[j] = x[j] - h;
    const double down = reference_output(net, probe, cls, target);
    probe[j] = x[j];
    grad[j] = (up - down) / (2.0 * h);
  }
  return grad;
}

inline double reference_cross_entropy(const nn::DenseNetwork& net, std::span<const double> x,
                                      std::size_t label) {
  const Vec z = reference_logits(net, x);
  const double m = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - m);
  return m + std::log(total) - z[label];
}

// Central differences of the cross-entropy with respect to every parameter,
// flattened layer by layer as weights then bias.
inline Vec fd_parameter_gradient(nn::DenseNetwork net, std::span<const double> x,
                                 std::size_t label, double h = 1e-5) {
  Vec grad;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    for (int part = 0; part < 2; ++part) {
      const std::size_t n =
          part == 0 ? net.layers()[l].weights.size() : net.layers()[l].bias.size();
      for (std::size_t p = 0; p < n; ++p) {
        double& slot = part == 0 ? net.mutable_layers()[l].weights[p] : net.mutable_layers()[l].bias[p];
        const double saved = slot;
        slot = saved + h;
        const double up = reference_cross_entropy(net, x, label);
        slot = saved - h;
        const double down = reference_cross_entropy(net, x, label);
        slot = saved;
        grad.push_back((up - down) / (2.0 * h));
      }
    }
  }
  return grad;
}

inline double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// ||a - b|| / max(||a||, ||b||), with an absolute floor for vanishing gradients.
inline double relative_error(std::span<const double> a, std::span<const double> b,
                             double floor = 1e-8) {
  Vec diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  return norm(diff) / std::max({norm(a), norm(b), floor});
}

// Shapley values by enumerating every ordering of the players.
template <typename Game>
Vec brute_force_shapley(std::size_t d, Game value) {
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  Vec phi(d, 0.0);
  double count = 0.0;
  do {
    std::vector<bool> present(d, false);
    double before = value(present);
    for (std::size_t p : order) {
      present[p] = true;
      const double after = value(present);
      phi[p] += after - before;
      before = after;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (double& v : phi) v /= count;
  return phi;
}

// Characteristic function of the baseline-replacement game on a network.
inline auto network_game(const nn::DenseNetwork& net, std::span<const double> x,
                         std::span<const double> baseline, std::size_t cls) {
  return [&net, x, baseline, cls](const std::vector<bool>& present) {
    Vec mixed(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) mixed[j] = present[j] ? x[j] : baseline[j];
    return reference_output(net, mixed, cls, net.gradient_target());
  };
}

// Toy deterministic text embedder: character trigrams hashed into buckets.
inline Vec hash_embed(const std::string& text, std::size_t dim = 64) {
  Vec v(dim, 0.0);
  const std::string padded = "  " + text + "  ";
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = i; k < i + 3; ++k) {
      h ^= static_cast<unsigned char>(padded[k]);
      h *= 1099511628211ULL;
    }
    v[h % dim] += (h >> 63) ? 1.0 : -1.0;
  }
  return v;
}

// Logistic regression by full-batch gradient descent. Returns the training
// accuracy it reaches, which certifies linear separability when it hits 1.
inline double logistic_regression_accuracy(const nn::Samples& data, int iterations = 5000,
                                           double lr = 0.5) {
  Vec w(data.dim, 0.0);
  double b = 0.0;
  const double n = static_cast<double>(data.size());
  for (int it = 0; it < iterations; ++it) {
    Vec gw(data.dim, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto x = data.row(i);
      double z = b;
      for (std::size_t j = 0; j < data.dim; ++j) z += w[j] * x[j];
      const double err = 1.0 / (1.0 + std::exp(-z)) - static_cast<double>(data.labels[i]);
      for (std::size_t j = 0; j < data.dim; ++j) gw[j] += err * x[j] / n;
      gb += err / n;
    }
    for (std::size_t j = 0; j < data.dim; ++j) w[j] -= lr * gw[j];
    b -= lr * gb;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    double z = b;
    for (std::size_t j = 0; j < data.dim; ++j) z += w[j] * x[j];
    correct += static_cast<std::size_t>(z > 0.0) == data.labels[i];
  }
  return static_cast<double>(correct) / n;
}

// Two Gaussian blobs on either side of the line x0 + x1 = 0, with a margin.
inline nn::Samples separable_blobs(std::uint64_t seed, std::size_t n = 200) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.5);
  nn::Samples s{2, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t label = i % 2;
    const double centre = label == 1 ? 2.0 : -2.0;
    Vec x{centre + noise(gen), centre + noise(gen)};
    const double side = x[0] + x[1];
    if (label == 1 ? side < 0.5 : side > -0.5) x = {centre, centre};
    s.push_back(x, label);
  }
  return s;
}

// Piecewise-linear function and its exact integral on [0, upto].
struct Polyline {
  std::vector<double> xs;
  std::vector<double> ys;
  double integral(double upto) const {
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size() && xs[i] < upto; ++i) {
      const double x1 = std::min(xs[i + 1], upto);
      const double y1 = ys[i] + (ys[i + 1] - ys[i]) * (x1 - xs[i]) / (xs[i + 1] - xs[i]);
      area += (x1 - xs[i]) * (ys[i] + y1) / 2.0;
    }
    return area;
  }
};

}  // namespace fadx::testing

#endif  // FADX_TESTS_SUPPORT_ORACLES_HPP_
