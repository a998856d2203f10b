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

#include "fadx/nncore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "fadx/error.hpp"
#include "fadx/rng.hpp"
#include "json.hpp"

namespace fadx::nn {
namespace {

constexpr int kFormatVersion = 1;

double gelu_unchecked(double x) {
  return x * 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(fmt::format("{} contains a non-finite value", what));
  }
}

void check_input(const DenseNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw ShapeError(fmt::format("input has {} features, network expects {}",
                                 x.size(), net.input_dim()));
  }
  check_finite(x, "input");
}

void check_class(const DenseNetwork& net, std::size_t target_class) {
  if (target_class >= net.class_count()) {
    throw IndexError(fmt::format("class index {} out of range for {} classes",
                                 target_class, net.class_count()));
  }
}

// Pre- and post-activation values of every layer for one sample.
struct Trace {
  std::vector<Vector> pre;
  std::vector<Vector> post;  // post[l] is the input to layer l
};

Vector scaled_input(const DenseNetwork& net, std::span<const double> x) {
  Vector out(x.begin(), x.end());
  const InputScaler& s = net.scaler();
  if (!s.is_identity()) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (out[i] - s.offset[i]) / s.scale[i];
  }
  return out;
}

Trace run_forward(const DenseNetwork& net, std::span<const double> x) {
  const auto& layers = net.layers();
  Trace t;
  t.pre.resize(layers.size());
  t.post.resize(layers.size());
  t.post[0] = scaled_input(net, x);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const DenseLayer& layer = layers[l];
    Vector z(layer.bias);
    const Vector& in = t.post[l];
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double* w = layer.weights.data() + o * layer.in_dim;
      double acc = 0.0;
      for (std::size_t i = 0; i < layer.in_dim; ++i) acc += w[i] * in[i];
      z[o] += acc;
    }
    if (l + 1 < layers.size()) {
      Vector a(z.size());
      std::transform(z.begin(), z.end(), a.begin(), gelu_unchecked);
      t.post[l + 1] = std::move(a);
    }
    t.pre[l] = std::move(z);
  }
  return t;
}

Vector softmax(const Vector& z) {
  const double top = *std::max_element(z.begin(), z.end());
  Vector p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = std::exp(z[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

// Backpropagates dL/dlogits through the trace. Accumulates parameter
// gradients when `params` is non-null and returns dL/d(scaled input).
Vector backward(const DenseNetwork& net, const Trace& t, Vector delta,
                Gradients* params) {
  const auto& layers = net.layers();
  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const Vector& in = t.post[l];
    if (params != nullptr) {
      DenseLayer& g = params->layers[l];
      for (std::size_t o = 0; o < layer.out_dim; ++o) {
        g.bias[o] += delta[o];
        double* gw = g.weights.data() + o * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) gw[i] += delta[o] * in[i];
      }
    }
    Vector upstream(layer.in_dim, 0.0);
    for (std::size_t o = 0; o < layer.out_dim; ++o) {
      const double* w = layer.weights.data() + o * layer.in_dim;
      for (std::size_t i = 0; i < layer.in_dim; ++i) upstream[i] += w[i] * delta[o];
    }
    if (l > 0) {
      const Vector& z = t.pre[l - 1];
      for (std::size_t i = 0; i < upstream.size(); ++i) upstream[i] *= gelu_derivative(z[i]);
    }
    delta = std::move(upstream);
  }
  return delta;
}

}  // namespace

double gelu(double x) {
  if (!std::isfinite(x)) throw DomainError("gelu: non-finite input");
  return gelu_unchecked(x);
}

double gelu_derivative(double x) {
  const double cdf = 0.5 * std::erfc(-x / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

std::string_view to_string(GradientTarget target) {
  return target == GradientTarget::kLogit ? "logit" : "probability";
}

GradientTarget parse_gradient_target(std::string_view text) {
  if (text == "probability") return GradientTarget::kProbability;
  if (text == "logit") return GradientTarget::kLogit;
  throw ConfigError(fmt::format("unknown gradient target '{}'", text));
}

DenseLayer DenseLayer::zeros(std::size_t in_dim, std::size_t out_dim) {
  return DenseLayer{in_dim, out_dim, Vector(in_dim * out_dim, 0.0), Vector(out_dim, 0.0)};
}

DenseNetwork::DenseNetwork(std::vector<DenseLayer> layers, InputScaler scaler,
                           GradientTarget target)
    : layers_(std::move(layers)), target_(target) {
  if (layers_.empty()) throw ShapeError("network needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.in_dim == 0 || layer.out_dim == 0) throw ShapeError("layer with zero dimension");
    if (layer.weights.size() != layer.in_dim * layer.out_dim || layer.bias.size() != layer.out_dim) {
      throw ShapeError(fmt::format("layer {} parameter sizes do not match its dimensions", l));
    }
    if (l > 0 && layers_[l - 1].out_dim != layer.in_dim) {
      throw ShapeError(fmt::format("layer {} input dim {} does not chain with previous output dim {}",
                                   l, layer.in_dim, layers_[l - 1].out_dim));
    }
    check_finite(layer.weights, "weights");
    check_finite(layer.bias, "bias");
  }
  set_scaler(std::move(scaler));
}

DenseNetwork DenseNetwork::initialize(const NetworkSpec& spec, std::uint64_t seed) {
  if (spec.input_dim == 0 || spec.class_count == 0) {
    throw ConfigError("network needs positive input dim and class count");
  }
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  std::size_t in = spec.input_dim;
  auto add = [&](std::size_t out) {
    if (out == 0) throw ConfigError("hidden layer width must be positive");
    DenseLayer layer = DenseLayer::zeros(in, out);
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : layer.weights) w = rng.uniform(-limit, limit);
    layers.push_back(std::move(layer));
    in = out;
  };
  for (std::size_t width : spec.hidden) add(width);
  add(spec.class_count);
  return DenseNetwork(std::move(layers));
}

std::size_t DenseNetwork::input_dim() const {
  return layers_.empty() ? 0 : layers_.front().in_dim;
}

std::size_t DenseNetwork::class_count() const {
  return layers_.empty() ? 0 : layers_.back().out_dim;
}

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.weights.size() + layer.bias.size();
  return n;
}

void DenseNetwork::set_scaler(InputScaler scaler) {
  if (!scaler.is_identity()) {
    if (scaler.offset.size() != input_dim() || scaler.scale.size() != input_dim()) {
      throw ShapeError("input scaler size does not match network input dim");
    }
    check_finite(scaler.offset, "scaler offset");
    for (double s : scaler.scale) {
      if (!std::isfinite(s) || s <= 0.0) throw DomainError("scaler scale must be positive and finite");
    }
  }
  scaler_ = std::move(scaler);
}

Vector logits(const DenseNetwork& net, std::span<const double> x) {
  check_input(net, x);
  return run_forward(net, x).pre.back();
}

Vector forward(const DenseNetwork& net, std::span<const double> x) {
  return softmax(logits(net, x));
}

std::size_t predict(const DenseNetwork& net, std::span<const double> x) {
  const Vector z = logits(net, x);
  return static_cast<std::size_t>(std::max_element(z.begin(), z.end()) - z.begin());
}

double target_output(const DenseNetwork& net, std::span<const double> x,
                     std::size_t target_class, GradientTarget target) {
  check_class(net, target_class);
  const Vector z = logits(net, x);
  return target == GradientTarget::kLogit ? z[target_class] : softmax(z)[target_class];
}

InputGradient input_gradient(const DenseNetwork& net, std::span<const double> x,
                             std::size_t target_class) {
  return input_gradient(net, x, target_class, net.gradient_target());
}

InputGradient input_gradient(const DenseNetwork& net, std::span<const double> x,
                             std::size_t target_class, GradientTarget target) {
  check_input(net, x);
  check_class(net, target_class);
  const Trace t = run_forward(net, x);
  Vector delta(net.class_count(), 0.0);
  if (target == GradientTarget::kLogit) {
    delta[target_class] = 1.0;
  } else {
    // dp_t/dz_j = p_t (1[j == t] - p_j)
    const Vector p = softmax(t.pre.back());
    for (std::size_t j = 0; j < p.size(); ++j) delta[j] = -p[target_class] * p[j];
    delta[target_class] += p[target_class];
  }
  Vector grad = backward(net, t, std::move(delta), nullptr);
  const InputScaler& s = net.scaler();
  if (!s.is_identity()) {
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] /= s.scale[i];
  }
  return InputGradient{std::move(grad), target_class, target};
}

Gradients Gradients::zeros_like(const DenseNetwork& net) {
  Gradients g;
  for (const auto& layer : net.layers()) g.layers.push_back(DenseLayer::zeros(layer.in_dim, layer.out_dim));
  return g;
}

void Gradients::scale(double factor) {
  for (auto& layer : layers) {
    for (double& w : layer.weights) w *= factor;
    for (double& b : layer.bias) b *= factor;
  }
}

double cross_entropy(const DenseNetwork& net, std::span<const double> x, std::size_t label) {
  check_class(net, label);
  const Vector z = logits(net, x);
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - top);
  return top + std::log(total) - z[label];
}

double accumulate_cross_entropy_gradient(const DenseNetwork& net, std::span<const double> x,
                                         std::size_t label, Gradients& into) {
  check_input(net, x);
  check_class(net, label);
  const Trace t = run_forward(net, x);
  const Vector& z = t.pre.back();
  Vector p = softmax(z);
  const double loss = -std::log(std::max(p[label], 1e-300));
  p[label] -= 1.0;
  backward(net, t, std::move(p), &into);
  return loss;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
}

AdamState AdamState::for_network(const DenseNetwork& net) {
  AdamState s;
  s.first_moment = Gradients::zeros_like(net).layers;
  s.second_moment = s.first_moment;
  return s;
}

void adam_step(DenseNetwork& net, AdamState& state, const Gradients& gradients,
               const TrainConfig& config) {
  auto& layers = net.mutable_layers();
  const auto shapes_match = [&](const std::vector<DenseLayer>& other) {
    if (other.size() != layers.size()) return false;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      if (other[l].weights.size() != layers[l].weights.size() ||
          other[l].bias.size() != layers[l].bias.size()) {
        return false;
      }
    }
    return true;
  };
  if (!shapes_match(gradients.layers) || !shapes_match(state.first_moment) ||
      !shapes_match(state.second_moment)) {
    throw ShapeError("gradient or optimizer state shape does not match network parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  auto update = [&](Vector& param, const Vector& grad, Vector& m, Vector& v) {
    for (std::size_t i = 0; i < param.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      param[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  };
  for (std::size_t l = 0; l < layers.size(); ++l) {
    update(layers[l].weights, gradients.layers[l].weights, state.first_moment[l].weights,
           state.second_moment[l].weights);
    update(layers[l].bias, gradients.layers[l].bias, state.first_moment[l].bias,
           state.second_moment[l].bias);
  }
}

void Samples::push_back(std::span<const double> x, std::size_t label) {
  if (dim == 0 && labels.empty()) dim = x.size();
  if (x.size() != dim) throw ShapeError("sample dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(label);
}

double mean_cross_entropy(const DenseNetwork& net, const Samples& data) {
  if (data.size() == 0) throw DegenerateInputError("mean_cross_entropy on empty data");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) total += cross_entropy(net, data.row(i), data.labels[i]);
  return total / static_cast<double>(data.size());
}

double accuracy(const DenseNetwork& net, const Samples& data) {
  if (data.size() == 0) throw DegenerateInputError("accuracy on empty data");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < data.size(); ++i) hits += predict(net, data.row(i)) == data.labels[i];
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

TrainResult train(const Samples& data, const Samples* validation, const NetworkSpec& spec,
                  const TrainConfig& config) {
  config.validate();
  return train(data, validation, DenseNetwork::initialize(spec, mix_seed(config.seed, 0)), config);
}

TrainResult train(const Samples& data, const Samples* validation, DenseNetwork initial,
                  const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw ConfigError("training set is empty");
  if (data.dim != initial.input_dim()) {
    throw ShapeError(fmt::format("training data has {} features, network expects {}", data.dim,
                                 initial.input_dim()));
  }
  for (std::size_t label : data.labels) check_class(initial, label);
  if (validation != nullptr && validation->size() == 0) validation = nullptr;

  TrainResult result;
  result.network = std::move(initial);
  DenseNetwork& net = result.network;
  AdamState state = AdamState::for_network(net);
  Rng order_rng(mix_seed(config.seed, 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best_validation = std::numeric_limits<double>::infinity();
  DenseNetwork best = net;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      Gradients grads = Gradients::zeros_like(net);
      try {
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          epoch_loss += accumulate_cross_entropy_gradient(net, data.row(i), data.labels[i], grads);
        }
      } catch (const DomainError&) {
        throw NumericDivergenceError(
            fmt::format("activations became non-finite at epoch {}", epoch), epoch);
      }
      grads.scale(1.0 / static_cast<double>(end - start));
      adam_step(net, state, grads, config);
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      throw NumericDivergenceError(fmt::format("training loss became non-finite at epoch {}", epoch),
                                   epoch);
    }
    result.train_loss.push_back(epoch_loss);
    if (validation != nullptr) {
      double val_loss;
      try {
        val_loss = mean_cross_entropy(net, *validation);
      } catch (const DomainError&) {
        val_loss = std::numeric_limits<double>::quiet_NaN();
      }
      if (!std::isfinite(val_loss)) {
        throw NumericDivergenceError(
            fmt::format("validation loss became non-finite at epoch {}", epoch), epoch);
      }
      result.validation_loss.push_back(val_loss);
      if (val_loss < best_validation) {
        best_validation = val_loss;
        best = net;
        result.best_epoch = epoch;
      }
    } else {
      result.best_epoch = epoch;
    }
  }
  if (validation != nullptr && result.best_epoch > 0) result.network = std::move(best);
  return result;
}

std::string serialize_network(const DenseNetwork& net) {
  nlohmann::ordered_json doc;
  doc["format"] = "fadx-dense-network";
  doc["version"] = kFormatVersion;
  doc["input_dim"] = net.input_dim();
  doc["class_count"] = net.class_count();
  doc["hidden_activation"] = "gelu";
  doc["output"] = "softmax";
  doc["gradient_target"] = std::string(to_string(net.gradient_target()));
  if (!net.scaler().is_identity()) {
    doc["input_scaler"] = {{"offset", net.scaler().offset}, {"scale", net.scaler().scale}};
  }
  if (!net.feature_names.empty()) doc["feature_names"] = net.feature_names;
  if (!net.class_names.empty()) doc["class_names"] = net.class_names;
  auto layers = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers()) {
    layers.push_back({{"in_dim", layer.in_dim},
                      {"out_dim", layer.out_dim},
                      {"weights", layer.weights},
                      {"bias", layer.bias}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

DenseNetwork parse_network(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model JSON: {}", e.what()));
  }
  try {
    if (doc.at("format").get<std::string>() != "fadx-dense-network") {
      throw ParseError("model JSON: unexpected format tag");
    }
    const int version = doc.at("version").get<int>();
    if (version != kFormatVersion) throw ParseError(fmt::format("model JSON: unsupported version {}", version));
    if (doc.value("hidden_activation", "gelu") != "gelu" || doc.value("output", "softmax") != "softmax") {
      throw ParseError("model JSON: only gelu hidden layers with softmax output are supported");
    }
    std::vector<DenseLayer> layers;
    for (const auto& l : doc.at("layers")) {
      layers.push_back(DenseLayer{l.at("in_dim").get<std::size_t>(), l.at("out_dim").get<std::size_t>(),
                                  l.at("weights").get<Vector>(), l.at("bias").get<Vector>()});
    }
    InputScaler scaler;
    if (doc.contains("input_scaler")) {
      scaler.offset = doc["input_scaler"].at("offset").get<Vector>();
      scaler.scale = doc["input_scaler"].at("scale").get<Vector>();
    }
    DenseNetwork net(std::move(layers), std::move(scaler),
                     parse_gradient_target(doc.value("gradient_target", "probability")));
    if (doc.at("input_dim").get<std::size_t>() != net.input_dim() ||
        doc.at("class_count").get<std::size_t>() != net.class_count()) {
      throw ShapeError("model JSON: declared dims disagree with layers");
    }
    net.feature_names = doc.value("feature_names", std::vector<std::string>{});
    net.class_names = doc.value("class_names", std::vector<std::string>{});
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("model JSON: {}", e.what()));
  }
}

}  // namespace fadx::nn
