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

#include "binorm/types.hpp"

namespace binorm {

/// Guard added to every per-sample standard deviation before division.
inline constexpr double kNormEpsilon = 1e-8;

/// Learnable state of the bilinear input normalization layer.
///
/// The temporal branch standardizes each feature row over time and applies
/// per-feature scale/shift (`temporal_scale`, `temporal_shift`, length D). The
/// feature branch standardizes each time column over features and applies
/// per-step scale/shift (`feature_scale`, `feature_shift`, length H). The
/// branches are blended by `weight_temporal` and `weight_feature`, which are
/// kept non-negative by bin_project().
struct BinParams {
  Vector temporal_scale;
  Vector temporal_shift;
  Vector feature_scale;
  Vector feature_shift;
  double weight_temporal = 0.5;
  double weight_feature = 0.5;

  /// Scales 1, shifts 0, both branch weights 0.5.
  static BinParams initial(Eigen::Index features, Eigen::Index steps);

  [[nodiscard]] Eigen::Index features() const noexcept { return temporal_scale.size(); }
  [[nodiscard]] Eigen::Index steps() const noexcept { return feature_scale.size(); }
};

/// Per-sample intermediates retained for the backward pass.
struct BinCache {
  Matrix input;
  Vector row_mean;        // mean over time, per feature
  Vector row_std;         // population std over time, per feature
  RowVector col_mean;     // mean over features, per time step
  RowVector col_std;      // population std over features, per time step
  Matrix row_standardized;
  Matrix col_standardized;
  Matrix temporal_out;    // A
  Matrix feature_out;     // B
};

struct BinGrads {
  BinParams params;
  Matrix input;
};

struct BinForward {
  Matrix output;
  BinCache cache;
};

BinForward bin_forward(const Matrix& x, const BinParams& p);

/// Exact reverse-mode gradients of <upstream, output> w.r.t. input and every
/// parameter. The epsilon guard is treated as a constant.
BinGrads bin_backward(const BinCache& cache, const BinParams& p, const Matrix& upstream);

/// Clamps both branch weights at zero; leaves everything else untouched.
BinParams bin_project(BinParams p);

}  // namespace binorm
