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

/// Adaptive shift / scale / gate input normalization along the temporal mode.
struct DainParams {
  Matrix shift;  // D x D, applied to the temporal mean
  Matrix scale;  // D x D, applied to the temporal std of the shifted series
  Matrix gate;   // D x D, applied to the mean of the scaled series
  Vector gate_bias;

  /// shift = scale = identity, gate = 0, gate_bias = 0.
  static DainParams initial(Eigen::Index features);

  [[nodiscard]] Eigen::Index features() const noexcept { return shift.rows(); }
};

struct DainCache {
  Matrix input;
  Vector mean;          // temporal mean of the input
  Matrix shifted;       // y_h stacked as columns
  Vector shifted_std;   // sigma
  Vector denom;         // scale * sigma + eps
  Matrix scaled;        // z_h stacked as columns
  Vector scaled_mean;
  Vector gate;          // sigmoid output
};

struct DainGrads {
  DainParams params;
  Matrix input;
};

struct DainForward {
  Matrix output;
  DainCache cache;
};

DainForward dain_forward(const Matrix& x, const DainParams& p);
DainGrads dain_backward(const DainCache& cache, const DainParams& p, const Matrix& upstream);

}  // namespace binorm
