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

#include "binorm/series.hpp"

#include <cmath>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {

TimeSeriesSample::TimeSeriesSample(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw ValidationError("sample must have at least one feature and one time step");
  }
  if (!values_.allFinite()) {
    throw ValidationError("sample contains non-finite values");
  }
}

void validate_stream(const SampleStream& stream) {
  if (!stream.events.allFinite()) {
    throw ValidationError("stream contains non-finite values");
  }
  const auto n = static_cast<std::size_t>(stream.length());
  if (stream.timestamps) {
    if (stream.timestamps->size() != n) {
      throw ValidationError("timestamp count does not match event count");
    }
    for (std::size_t i = 1; i < n; ++i) {
      if ((*stream.timestamps)[i] < (*stream.timestamps)[i - 1]) {
        throw ValidationError("timestamps decrease at event " + std::to_string(i));
      }
    }
  }
  if (stream.days && stream.days->size() != n) {
    throw ValidationError("day marker count does not match event count");
  }
}

std::vector<TimeSeriesSample> sliding_windows(const SampleStream& stream, Eigen::Index window,
                                              Eigen::Index stride) {
  if (window < 1 || stride < 1) {
    throw ValidationError("window and stride must be positive");
  }
  if (stream.length() < window) {
    throw ValidationError("stream has " + std::to_string(stream.length()) +
                          " events, fewer than the window length " + std::to_string(window));
  }
  if (!stream.events.allFinite()) {
    throw ValidationError("stream contains non-finite values");
  }
  const Eigen::Index count = (stream.length() - window) / stride + 1;
  std::vector<TimeSeriesSample> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    out.emplace_back(stream.events.middleRows(i * stride, window).transpose());
  }
  return out;
}

StaticNormalizer fit_static(StaticKind kind, std::span<const TimeSeriesSample> train) {
  if (train.empty()) {
    throw ValidationError("fit_static needs at least one training sample");
  }
  StaticNormalizer norm;
  norm.kind = kind;
  norm.fitted = true;
  if (kind == StaticKind::kNone) {
    return norm;
  }
  const Eigen::Index d = train.front().features();
  for (const auto& s : train) {
    if (s.features() != d) {
      throw ShapeError("training samples disagree on the feature count");
    }
  }

  if (kind == StaticKind::kZScore) {
    Vector sum = Vector::Zero(d);
    double count = 0.0;
    for (const auto& s : train) {
      sum += s.values().rowwise().sum();
      count += static_cast<double>(s.steps());
    }
    Vector mean = sum / count;
    Vector sq = Vector::Zero(d);
    for (const auto& s : train) {
      sq += (s.values().colwise() - mean).array().square().matrix().rowwise().sum();
    }
    norm.first = mean;
    norm.second = (sq / count).cwiseSqrt();
  } else {
    Vector lo = train.front().values().rowwise().minCoeff();
    Vector hi = train.front().values().rowwise().maxCoeff();
    for (const auto& s : train) {
      lo = lo.cwiseMin(s.values().rowwise().minCoeff());
      hi = hi.cwiseMax(s.values().rowwise().maxCoeff());
    }
    norm.first = lo;
    norm.second = hi;
  }
  return norm;
}

Matrix apply_static(const StaticNormalizer& norm, const Matrix& values) {
  if (!norm.fitted) {
    throw ValidationError("static normalizer used before fitting");
  }
  switch (norm.kind) {
    case StaticKind::kNone:
      return values;
    case StaticKind::kZScore:
    case StaticKind::kMinMax: {
      if (values.rows() != norm.features()) {
        throw ShapeError("sample has " + std::to_string(values.rows()) +
                         " features, normalizer was fitted on " +
                         std::to_string(norm.features()));
      }
      const Vector denom = norm.kind == StaticKind::kZScore
                               ? Vector(norm.second.array() + kStaticEpsilon)
                               : Vector((norm.second - norm.first).array() + kStaticEpsilon);
      return (values.colwise() - norm.first).array().colwise() / denom.array();
    }
  }
  return values;
}

TimeSeriesSample apply_static(const StaticNormalizer& norm, const TimeSeriesSample& sample) {
  return TimeSeriesSample(apply_static(norm, sample.values()));
}

const char* to_string(StaticKind kind) noexcept {
  switch (kind) {
    case StaticKind::kNone: return "none";
    case StaticKind::kZScore: return "zscore";
    case StaticKind::kMinMax: return "minmax";
  }
  return "?";
}

}  // namespace binorm
