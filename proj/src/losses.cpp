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

#include "fadx/losses.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fadx/error.hpp"

namespace fadx::loss {
namespace {

void validate(const IntentPrediction& pred) {
  if (pred.probs.empty()) throw ShapeError("intent prediction has no classes");
  if (pred.label >= pred.probs.size()) {
    throw IndexError(fmt::format("intent label {} out of range for {} classes", pred.label,
                                 pred.probs.size()));
  }
}

void validate(const SequencePrediction& pred) {
  const std::size_t n = pred.token_log_probs.size();
  if (pred.token_labels.size() != n || pred.mask.size() != n) {
    throw ShapeError("sequence log-probs, labels and mask differ in length");
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (pred.mask[j] && pred.token_labels[j] >= pred.token_log_probs[j].size()) {
      throw IndexError(fmt::format("token {} label out of range", j));
    }
  }
  if (pred.effective_length() == 0) {
    throw DegenerateInputError("every token is masked; sequence loss is undefined");
  }
}

}  // namespace

std::size_t SequencePrediction::effective_length() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

LossValue intent_ce_loss(const IntentPrediction& pred) {
  validate(pred);
  const double p = pred.probs[pred.label];
  if (p < kProbabilityFloor) return {-std::log(kProbabilityFloor), true};
  return {-std::log(p), false};
}

double masked_ner_nll(const SequencePrediction& pred) {
  validate(pred);
  double total = 0.0;
  for (std::size_t j = 0; j < pred.token_log_probs.size(); ++j) {
    if (!pred.mask[j]) continue;
    total += std::max(pred.token_log_probs[j][pred.token_labels[j]], std::log(kProbabilityFloor));
  }
  return -total / static_cast<double>(pred.effective_length());
}

double joint_loss(double intent, double ner, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ConfigError(fmt::format("alpha must lie in [0, 1], got {}", alpha));
  }
  return alpha * intent + (1.0 - alpha) * ner;
}

std::vector<double> intent_ce_gradient(const IntentPrediction& pred) {
  validate(pred);
  std::vector<double> grad(pred.probs.size(), 0.0);
  grad[pred.label] = -1.0 / std::max(pred.probs[pred.label], kProbabilityFloor);
  return grad;
}

std::vector<std::vector<double>> masked_ner_nll_gradient(const SequencePrediction& pred) {
  validate(pred);
  const double weight = -1.0 / static_cast<double>(pred.effective_length());
  std::vector<std::vector<double>> grad;
  grad.reserve(pred.token_log_probs.size());
  for (std::size_t j = 0; j < pred.token_log_probs.size(); ++j) {
    grad.emplace_back(pred.token_log_probs[j].size(), 0.0);
    if (pred.mask[j]) grad.back()[pred.token_labels[j]] = weight;
  }
  return grad;
}

}  // namespace fadx::loss
