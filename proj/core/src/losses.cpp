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

#include "binorm/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {

ClassLoss loss_setting1(const Vector& probs, int label) {
  if (label < 0 || label >= probs.size()) {
    throw ValidationError("label " + std::to_string(label) + " outside [0, " +
                          std::to_string(probs.size()) + ")");
  }
  ClassLoss out;
  out.loss = -std::log(std::max(probs(label), kProbabilityFloor));
  out.dlogits = probs;
  out.dlogits(label) -= 1.0;
  return out;
}

JointLoss loss_setting2(const Vector& probs, int direction, double predicted, double target,
                        double weight) {
  const ClassLoss ce = loss_setting1(probs, direction);
  JointLoss out;
  const double residual = predicted - target;
  out.loss = ce.loss + weight * residual * residual;
  out.dlogits = ce.dlogits;
  out.dhorizon = 2.0 * weight * residual;
  return out;
}

}  // namespace binorm
