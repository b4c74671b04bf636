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

#include "binorm/labeling.hpp"

#include <algorithm>
#include <cmath>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

// Relative band around the threshold treated as |l| == alpha. Decimal prices
// such as 100 -> 100.2 with alpha = 0.002 land a few ulps off the exact tie.
constexpr double kTieBand = 1e-9;

int classify(double change, double threshold) {
  const double bound = threshold * (1.0 + kTieBand);
  if (change > bound) return 1;
  if (change < -bound) return -1;
  return 0;
}

double mean_of(std::span<const double> v, std::size_t first, std::size_t last_inclusive) {
  double sum = 0.0;
  for (std::size_t i = first; i <= last_inclusive; ++i) sum += v[i];
  return sum / static_cast<double>(last_inclusive - first + 1);
}

}  // namespace

void LabelConfig::validate() const {
  if (horizon < 1) throw ValidationError("label horizon must be >= 1");
  if (!(threshold > 0.0)) throw ValidationError("label threshold must be > 0");
  if (smoothing < 1) throw ValidationError("label smoothing must be >= 1");
  if (max_horizon < 1) throw ValidationError("max_horizon must be >= 1");
}

std::optional<Movement> label_movement(std::span<const double> mids, std::size_t t,
                                       const LabelConfig& cfg) {
  const auto k = static_cast<std::size_t>(cfg.horizon);
  if (t >= mids.size() || t + k >= mids.size()) return std::nullopt;
  double reference = mids[t];
  if (cfg.rule == LabelRule::kPastMean) {
    if (t + 1 < k) return std::nullopt;
    reference = mean_of(mids, t + 1 - k, t);
  }
  const double future = mean_of(mids, t + 1, t + k);
  switch (classify((future - reference) / reference, cfg.threshold)) {
    case 1: return Movement::kUp;
    case -1: return Movement::kDown;
    default: return Movement::kStationary;
  }
}

std::optional<NextMove> label_next_move(std::span<const double> mids, std::size_t t,
                                        const LabelConfig& cfg) {
  if (t >= mids.size()) return std::nullopt;
  const double p = mids[t];
  const auto s = static_cast<std::size_t>(cfg.smoothing);
  for (std::size_t j = 1; j <= static_cast<std::size_t>(cfg.max_horizon); ++j) {
    if (t + j >= mids.size()) break;
    const std::size_t first = t + (j >= s ? j - s + 1 : 1);
    const int move = classify((mean_of(mids, first, t + j) - p) / p, cfg.threshold);
    if (move == 1) return NextMove{Direction::kUp, static_cast<int>(j)};
    if (move == -1) return NextMove{Direction::kDown, static_cast<int>(j)};
  }
  return std::nullopt;
}

}  // namespace binorm
