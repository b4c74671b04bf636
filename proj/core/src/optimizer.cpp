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

#include "binorm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
  for (const auto& d : drops) {
    if (d.epoch < 1) throw ValidationError("schedule drop epochs must be >= 1");
    if (!(d.factor > 0.0 && d.factor <= 1.0)) {
      throw ValidationError("schedule drop factors must lie in (0, 1]");
    }
  }
  if (!(max_norm > 0.0)) throw ValidationError("max_norm must be > 0");
  if (weight_decay < 0.0) throw ValidationError("weight_decay must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ValidationError("adam_epsilon must be > 0");
  if (regression_weight < 0.0) throw ValidationError("regression_weight must be >= 0");
  if (threads < 1) throw ValidationError("threads must be >= 1");
  for (const auto& [name, mult] : lr_multipliers) {
    if (!(mult > 0.0)) throw ValidationError("learning-rate multiplier for " + name + " must be > 0");
  }
}

double lr_at(const TrainConfig& cfg, int epoch) {
  if (epoch < 1 || epoch > cfg.epochs) {
    throw ValidationError("epoch " + std::to_string(epoch) + " outside [1, " +
                          std::to_string(cfg.epochs) + "]");
  }
  double lr = cfg.learning_rate;
  for (const auto& d : cfg.drops) {
    if (d.epoch <= epoch) lr *= d.factor;
  }
  return lr;
}

Matrix max_norm_project(Matrix weights, double cap) {
  if (!(cap > 0.0)) throw ValidationError("max-norm cap must be > 0");
  for (Eigen::Index r = 0; r < weights.rows(); ++r) {
    const double norm = weights.row(r).norm();
    if (norm > cap) weights.row(r) *= cap / norm;
  }
  return weights;
}

AdamState adam_init(const ModelParams& params) {
  AdamState s;
  s.first = zeros_like(params);
  s.second = zeros_like(params);
  s.step = 0;
  return s;
}

void enforce_constraints(ModelParams& params, const TrainConfig& cfg) {
  for (auto& t : tensors(params)) {
    switch (t.role) {
      case TensorRole::kWeightRows:
        t.value = max_norm_project(t.value, cfg.max_norm);
        break;
      case TensorRole::kWeightCols:
        t.value = max_norm_project(t.value.transpose(), cfg.max_norm).transpose();
        break;
      case TensorRole::kAttention:
        t.value.diagonal().setConstant(1.0 / static_cast<double>(t.value.rows()));
        break;
      case TensorRole::kNonNegative:
        t.value = t.value.cwiseMax(0.0);
        break;
      case TensorRole::kUnitInterval:
        t.value = t.value.cwiseMax(0.0).cwiseMin(1.0);
        break;
      case TensorRole::kBias:
      case TensorRole::kNormalizer:
      case TensorRole::kBuffer:
        break;
    }
  }
}

void adam_step(ModelParams& params, const ModelParams& grads, AdamState& state, double lr,
               const TrainConfig& cfg) {
  auto p = tensors(params);
  const auto g = tensors(grads);
  auto m = tensors(state.first);
  auto v = tensors(state.second);
  if (g.size() != p.size() || m.size() != p.size() || v.size() != p.size()) {
    throw ShapeError("gradient or optimizer state does not mirror the parameters");
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (g[i].value.rows() != p[i].value.rows() || g[i].value.cols() != p[i].value.cols() ||
        m[i].value.size() != p[i].value.size() || v[i].value.size() != p[i].value.size()) {
      throw ShapeError("shape mismatch in tensor " + p[i].name);
    }
    if (p[i].role != TensorRole::kBuffer && !g[i].value.allFinite()) {
      throw DivergenceError("non-finite gradient in " + p[i].name);
    }
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(cfg.beta1, t);
  const double bias2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const TensorRole role = p[i].role;
    if (role == TensorRole::kBuffer) continue;
    double step_lr = lr;
    if (const auto it = cfg.lr_multipliers.find(p[i].name); it != cfg.lr_multipliers.end()) {
      step_lr *= it->second;
    }
    m[i].value = cfg.beta1 * m[i].value + (1.0 - cfg.beta1) * g[i].value;
    v[i].value = cfg.beta2 * v[i].value + (1.0 - cfg.beta2) * g[i].value.cwiseAbs2();

    const bool decay = role == TensorRole::kWeightRows || role == TensorRole::kWeightCols ||
                       role == TensorRole::kAttention ||
                       (cfg.decay_normalizer && role == TensorRole::kNormalizer);
    const Matrix before = p[i].value;
    p[i].value -= (step_lr * (m[i].value / bias1).array() /
                   ((v[i].value / bias2).array().sqrt() + cfg.adam_epsilon))
                      .matrix();
    if (decay && cfg.weight_decay > 0.0) {
      p[i].value -= (step_lr * cfg.weight_decay) * before;
    }
  }
  enforce_constraints(params, cfg);
}

}  // namespace binorm
