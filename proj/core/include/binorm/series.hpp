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
#include <vector>

#include "binorm/types.hpp"

namespace binorm {

/// One D x H multivariate window: rows are features, columns are time steps.
/// Column h is the temporal slice at step h; the most recent event sits in the
/// last column.
class TimeSeriesSample {
 public:
  TimeSeriesSample() = default;

  /// Throws ValidationError on empty shape or non-finite entries.
  explicit TimeSeriesSample(Matrix values);

  [[nodiscard]] const Matrix& values() const noexcept { return values_; }
  [[nodiscard]] Eigen::Index features() const noexcept { return values_.rows(); }
  [[nodiscard]] Eigen::Index steps() const noexcept { return values_.cols(); }

  friend bool operator==(const TimeSeriesSample& a, const TimeSeriesSample& b) {
    return a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  Matrix values_;
};

/// Event stream: T rows (events) by D columns (features). Optional per-event
/// day index drives chronological day-based splitting.
struct SampleStream {
  Matrix events;
  std::optional<std::vector<double>> timestamps;
  std::optional<std::vector<int>> days;

  [[nodiscard]] Eigen::Index length() const noexcept { return events.rows(); }
  [[nodiscard]] Eigen::Index features() const noexcept { return events.cols(); }
};

/// Checks finiteness, timestamp monotonicity and side-vector lengths.
void validate_stream(const SampleStream& stream);

/// Windows of `window` consecutive events taken every `stride` events,
/// transposed to features x time. Yields floor((T - H) / stride) + 1 samples.
std::vector<TimeSeriesSample> sliding_windows(const SampleStream& stream, Eigen::Index window,
                                              Eigen::Index stride);

enum class StaticKind { kNone, kZScore, kMinMax };

inline constexpr double kStaticEpsilon = 1e-8;

/// Frozen per-feature statistics fitted on training windows.
struct StaticNormalizer {
  StaticKind kind = StaticKind::kNone;
  Vector first;   // mean (zscore) or min (minmax)
  Vector second;  // population std (zscore) or max (minmax)
  bool fitted = false;

  [[nodiscard]] Eigen::Index features() const noexcept { return first.size(); }
};

/// Statistics per feature across every time step of every training sample.
StaticNormalizer fit_static(StaticKind kind, std::span<const TimeSeriesSample> train);

/// zscore: (x - mean) / (std + eps); minmax: (x - min) / (max - min + eps);
/// none: identity.
TimeSeriesSample apply_static(const StaticNormalizer& norm, const TimeSeriesSample& sample);

/// Same transform on a raw matrix; used inside model forward passes.
Matrix apply_static(const StaticNormalizer& norm, const Matrix& values);

const char* to_string(StaticKind kind) noexcept;

}  // namespace binorm
