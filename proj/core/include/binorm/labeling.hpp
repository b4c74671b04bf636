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

#include <cstddef>
#include <optional>
#include <span>

namespace binorm {

enum class Movement { kUp = 0, kStationary = 1, kDown = 2 };
enum class Direction { kUp = 0, kDown = 1 };

/// Reference price the smoothed future mean is compared against.
enum class LabelRule {
  kCurrentPrice,  // (m+ - p_t) / p_t
  kPastMean,      // (m+ - m-) / m-, m- = mean(p_{t-k+1..t})
};

struct LabelConfig {
  int horizon = 10;          // k
  double threshold = 1e-5;   // alpha
  int smoothing = 1;         // window of the next-move scan
  int max_horizon = 1000;
  LabelRule rule = LabelRule::kCurrentPrice;

  /// Throws ValidationError when k < 1, alpha <= 0, smoothing < 1 or
  /// max_horizon < 1.
  void validate() const;
};

/// Fixed-horizon movement at index t. Returns nullopt when fewer than k future
/// prices (or, under kPastMean, fewer than k past prices) exist. Thresholds are
/// strict: a return of exactly +-alpha is stationary.
std::optional<Movement> label_movement(std::span<const double> mids, std::size_t t,
                                       const LabelConfig& cfg);

struct NextMove {
  Direction direction;
  int horizon;

  friend bool operator==(const NextMove&, const NextMove&) = default;
};

/// First j in [1, max_horizon] whose smoothed return
///   (mean(p_{t+max(1, j-s+1)} .. p_{t+j}) - p_t) / p_t
/// exceeds alpha in magnitude. nullopt if no crossing within range or data.
std::optional<NextMove> label_next_move(std::span<const double> mids, std::size_t t,
                                        const LabelConfig& cfg);

}  // namespace binorm
