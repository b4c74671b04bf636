/* Copyright 2026 The binorm Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "binorm/model.hpp"

namespace binorm {

struct ScheduleDrop {
  int epoch;
  double factor;

  friend bool operator==(const ScheduleDrop&, const ScheduleDrop&) = default;
};

struct TrainConfig {
  int epochs = 80;
  double learning_rate = 1e-3;
  std::vector<ScheduleDrop> drops{{11, 0.1}, {71, 0.1}};
  double weight_decay = 1e-4;
  double max_norm = 10.0;
  int batch_size = 256;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;
  double regression_weight = 1.0;
  bool standardize_horizon = false;
  bool decay_normalizer = false;
  /// Per-tensor learning-rate multipliers keyed by tensor name (see tensors()).
  std::map<std::string, double> lr_multipliers;
  int threads = 1;

  /// Throws ValidationError on epochs < 1, lr <= 0, factors outside (0, 1],
  /// max_norm <= 0 or batch_size < 1.
  void validate() const;
};

/// Initial rate times every drop whose epoch is <= `epoch` (1-based).
double lr_at(const TrainConfig& cfg, int epoch);

/// Scales every row whose Euclidean norm exceeds `cap` back onto the cap.
Matrix max_norm_project(Matrix weights, double cap);

struct AdamState {
  ModelParams first;
  ModelParams second;
  std::int64_t step = 0;
};

AdamState adam_init(const ModelParams& params);

/// One bias-corrected Adam update on every trainable tensor, then decoupled
/// weight decay on backbone weights, then the constraints: max-norm on weight
/// rows/columns, BiN branch weights clamped at zero, TABL attention diagonal
/// and mix restored. Throws DivergenceError on a non-finite gradient.
void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr,
               const TrainConfig& cfg);

/// Applies only the post-step constraints.
void enforce_constraints(ModelParams& params, const TrainConfig& cfg);

}  // namespace binorm
