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

#ifndef FADX_NNCORE_HPP_
#define FADX_NNCORE_HPP_

// Dense feedforward classifier: GELU hidden layers, softmax output, exact
// backpropagation for parameters and inputs, and the Adam optimizer.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fadx::nn {

using Vector = std::vector<double>;

/// x * Phi(x) with Phi the standard normal CDF computed from erfc (not the
/// tanh approximation). Throws DomainError for non-finite x.
double gelu(double x);

/// d/dx gelu(x) = Phi(x) + x * phi(x).
double gelu_derivative(double x);

/// Which scalar of the output an input gradient (and every attribution built
/// on it) differentiates.
enum class GradientTarget { kProbability, kLogit };

std::string_view to_string(GradientTarget target);
GradientTarget parse_gradient_target(std::string_view text);

/// One affine layer. `weights` is row-major with shape out_dim x in_dim.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Vector weights;
  Vector bias;

  static DenseLayer zeros(std::size_t in_dim, std::size_t out_dim);

  double& weight(std::size_t out, std::size_t in) {
    return weights[out * in_dim + in];
  }
  double weight(std::size_t out, std::size_t in) const {
    return weights[out * in_dim + in];
  }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

/// Fixed affine preprocessing applied before the first layer:
/// x_model[i] = (x[i] - offset[i]) / scale[i]. Empty means identity.
struct InputScaler {
  Vector offset;
  Vector scale;

  bool is_identity() const { return offset.empty(); }
  friend bool operator==(const InputScaler&, const InputScaler&) = default;
};

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t class_count = 0;
};

class DenseNetwork {
 public:
  DenseNetwork() = default;

  /// Validates that layer dimensions chain and every parameter is finite.
  explicit DenseNetwork(std::vector<DenseLayer> layers, InputScaler scaler = {},
                        GradientTarget target = GradientTarget::kProbability);

  /// He-style uniform initialization, limit sqrt(6 / fan_in), zero biases.
  static DenseNetwork initialize(const NetworkSpec& spec, std::uint64_t seed);

  std::size_t input_dim() const;
  std::size_t class_count() const;
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  const InputScaler& scaler() const { return scaler_; }
  void set_scaler(InputScaler scaler);

  GradientTarget gradient_target() const { return target_; }
  void set_gradient_target(GradientTarget target) { target_ = target; }

  // Optional descriptive metadata carried through serialization.
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;

  friend bool operator==(const DenseNetwork&, const DenseNetwork&) = default;

 private:
  std::vector<DenseLayer> layers_;
  InputScaler scaler_;
  GradientTarget target_ = GradientTarget::kProbability;
};

Vector logits(const DenseNetwork& net, std::span<const double> x);

/// Class probabilities. Throws ShapeError on dimension mismatch.
Vector forward(const DenseNetwork& net, std::span<const double> x);

std::size_t predict(const DenseNetwork& net, std::span<const double> x);

/// The scalar F_target(x) that attributions explain: the target-class
/// probability or logit depending on `target`.
double target_output(const DenseNetwork& net, std::span<const double> x,
                     std::size_t target_class, GradientTarget target);

struct InputGradient {
  Vector values;
  std::size_t target_class = 0;
  GradientTarget target = GradientTarget::kProbability;
};

/// dF_target/dx for each raw input feature (chains through the scaler).
/// Uses the network's configured gradient target unless one is given.
InputGradient input_gradient(const DenseNetwork& net, std::span<const double> x,
                             std::size_t target_class);
InputGradient input_gradient(const DenseNetwork& net, std::span<const double> x,
                             std::size_t target_class, GradientTarget target);

/// Parameter-shaped accumulator (dW, db per layer).
struct Gradients {
  std::vector<DenseLayer> layers;

  static Gradients zeros_like(const DenseNetwork& net);
  void scale(double factor);
};

double cross_entropy(const DenseNetwork& net, std::span<const double> x,
                     std::size_t label);

/// Adds d(cross-entropy)/d(parameters) for one sample into `into` and
/// returns the sample loss.
double accumulate_cross_entropy_gradient(const DenseNetwork& net,
                                         std::span<const double> x,
                                         std::size_t label, Gradients& into);

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  int epochs = 100;
  std::uint64_t seed = 0;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

struct AdamState {
  std::vector<DenseLayer> first_moment;
  std::vector<DenseLayer> second_moment;
  std::uint64_t step = 0;

  static AdamState for_network(const DenseNetwork& net);
};

/// One bias-corrected Adam update in place; increments state.step.
void adam_step(DenseNetwork& net, AdamState& state, const Gradients& gradients,
               const TrainConfig& config);

/// Row-major feature matrix with one label per row.
struct Samples {
  std::size_t dim = 0;
  Vector features;
  std::vector<std::size_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
  void push_back(std::span<const double> x, std::size_t label);
};

struct TrainResult {
  DenseNetwork network;
  std::vector<double> train_loss;       // mean cross-entropy per epoch
  std::vector<double> validation_loss;  // empty without a validation split
  int best_epoch = -1;                  // 1-based; -1 when epochs == 0
};

/// Mini-batch Adam on cross-entropy. Batches come from a seeded shuffle each
/// epoch and the short tail batch is kept. With a validation split the
/// lowest-validation-loss snapshot is returned, otherwise the final one.
/// Throws ConfigError on an empty dataset and NumericDivergenceError when a
/// loss turns non-finite.
TrainResult train(const Samples& data, const Samples* validation,
                  DenseNetwork initial, const TrainConfig& config);
TrainResult train(const Samples& data, const Samples* validation,
                  const NetworkSpec& spec, const TrainConfig& config);

double mean_cross_entropy(const DenseNetwork& net, const Samples& data);
double accuracy(const DenseNetwork& net, const Samples& data);

/// Versioned JSON document: layer dims, row-major weights, biases,
/// activation tag, gradient-target tag, optional scaler and names.
std::string serialize_network(const DenseNetwork& net);
DenseNetwork parse_network(std::string_view json_text);

}  // namespace fadx::nn

#endif  // FADX_NNCORE_HPP_
