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

#include <span>
#include <vector>

#include "binorm/types.hpp"

namespace binorm {

/// Variance guard of the batch normalizer.
inline constexpr double kBatchNormEpsilon = 1e-5;

enum class BnMode { kTrain, kEval };

/// Batch normalization applied directly to the input window. Every one of the
/// D*H positions is treated as an independent feature.
struct BnInputParams {
  Matrix scale;
  Matrix shift;
  Matrix running_mean;
  Matrix running_var;
  double momentum = 0.9;

  /// scale 1, shift 0, running mean 0, running variance 1.
  static BnInputParams initial(Eigen::Index features, Eigen::Index steps, double momentum = 0.9);
};

struct BnInputCache {
  BnMode mode = BnMode::kEval;
  std::vector<Matrix> normalized;  // pre scale/shift
  Matrix mean;
  Matrix var;
  Matrix inv_std;
};

struct BnInputGrads {
  Matrix scale;
  Matrix shift;
  std::vector<Matrix> inputs;
};

struct BnInputForward {
  std::vector<Matrix> outputs;
  BnInputCache cache;
};

/// Train mode normalizes by batch statistics (batch size >= 2) and leaves the
/// running statistics alone; call bn_commit_running() with the returned cache
/// to fold the batch statistics in. Eval mode uses running statistics only.
BnInputForward bn_input_forward(std::span<const Matrix> batch, const BnInputParams& p, BnMode mode);

/// running <- momentum * running + (1 - momentum) * batch statistic.
void bn_commit_running(BnInputParams& p, const BnInputCache& cache);

BnInputGrads bn_input_backward(const BnInputCache& cache, const BnInputParams& p,
                               std::span<const Matrix> upstream);

}  // namespace binorm
