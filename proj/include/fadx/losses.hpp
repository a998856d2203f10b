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

#ifndef FADX_LOSSES_HPP_
#define FADX_LOSSES_HPP_

// Intent cross-entropy, masked average sequence NLL, and their convex
// combination. All functions are pure.

#include <cstddef>
#include <span>
#include <vector>

namespace fadx::loss {

inline constexpr double kProbabilityFloor = 1e-12;
inline constexpr double kDefaultAlpha = 0.5;

struct IntentPrediction {
  std::vector<double> probs;  // softmax over intent classes
  std::size_t label = 0;      // index of the one-hot entry
};

/// Per-token log-probabilities over entity classes, target indices, and a
/// mask where true means the token counts toward the loss (pads are false).
struct SequencePrediction {
  std::vector<std::vector<double>> token_log_probs;
  std::vector<std::size_t> token_labels;
  std::vector<bool> mask;

  std::size_t effective_length() const;
};

struct LossValue {
  double value = 0.0;
  bool floored = false;  // a probability was raised to kProbabilityFloor
};

/// -log(probs[label]), probability floored at 1e-12 (flagged).
LossValue intent_ce_loss(const IntentPrediction& pred);

/// -(sum over unmasked tokens of log p(target)) / (number of unmasked tokens).
/// Throws DegenerateInputError when every token is masked.
double masked_ner_nll(const SequencePrediction& pred);

/// alpha * intent + (1 - alpha) * ner. Throws ConfigError unless alpha in [0, 1].
double joint_loss(double intent, double ner, double alpha = kDefaultAlpha);

/// d(intent_ce_loss)/d(probs); nonzero only at the label.
std::vector<double> intent_ce_gradient(const IntentPrediction& pred);

/// d(masked_ner_nll)/d(token_log_probs), same shape as the input.
std::vector<std::vector<double>> masked_ner_nll_gradient(const SequencePrediction& pred);

}  // namespace fadx::loss

#endif  // FADX_LOSSES_HPP_
