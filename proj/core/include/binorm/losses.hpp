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

/// Floor applied to the target probability inside the log.
inline constexpr double kProbabilityFloor = 1e-12;

struct ClassLoss {
  double loss = 0.0;
  Vector dlogits;  // probs - onehot
};

/// Cross-entropy on softmax probabilities for any class count.
ClassLoss loss_setting1(const Vector& probs, int label);

struct JointLoss {
  double loss = 0.0;
  Vector dlogits;
  double dhorizon = 0.0;
};

/// Cross-entropy on the direction plus weight * (predicted - target)^2.
JointLoss loss_setting2(const Vector& probs, int direction, double predicted, double target,
                        double weight);

}  // namespace binorm
