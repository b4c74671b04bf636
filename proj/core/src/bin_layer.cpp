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

#include "binorm/bin_layer.hpp"

#include <algorithm>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

void check_shapes(const Matrix& x, const BinParams& p) {
  if (x.rows() != p.features() || x.cols() != p.steps() || p.temporal_shift.size() != x.rows() ||
      p.feature_shift.size() != x.cols()) {
    throw ShapeError("BiN expects " + std::to_string(p.features()) + "x" +
                     std::to_string(p.steps()) + " input, got " + std::to_string(x.rows()) +
                     "x" + std::to_string(x.cols()));
  }
}

// Backward of x_hat = (x - mean(x)) / (std(x) + eps) along a vector of n values,
// with std the population standard deviation.
template <typename Upstream, typename Centered>
Eigen::ArrayXd standardize_backward(const Upstream& d_hat, const Centered& centered, double std) {
  const double n = static_cast<double>(d_hat.size());
  const double denom = std + kNormEpsilon;
  Eigen::ArrayXd dx = (d_hat - d_hat.mean()) / denom;
  if (std > 0.0) {
    const double d_std = -(d_hat * centered).sum() / (denom * denom);
    dx += d_std * centered / (n * std);
  }
  return dx;
}

}  // namespace

BinParams BinParams::initial(Eigen::Index features, Eigen::Index steps) {
  BinParams p;
  p.temporal_scale = Vector::Ones(features);
  p.temporal_shift = Vector::Zero(features);
  p.feature_scale = Vector::Ones(steps);
  p.feature_shift = Vector::Zero(steps);
  p.weight_temporal = 0.5;
  p.weight_feature = 0.5;
  return p;
}

BinForward bin_forward(const Matrix& x, const BinParams& p) {
  check_shapes(x, p);
  if (!x.allFinite()) {
    throw ValidationError("BiN input contains non-finite values");
  }
  const double h = static_cast<double>(x.cols());
  const double d = static_cast<double>(x.rows());

  BinForward out;
  BinCache& c = out.cache;
  c.input = x;

  // Temporal mode: each feature row standardized over its H steps.
  c.row_mean = x.rowwise().mean();
  const Matrix row_centered = x.colwise() - c.row_mean;
  c.row_std = (row_centered.array().square().rowwise().sum() / h).sqrt();
  c.row_standardized = row_centered.array().colwise() / (c.row_std.array() + kNormEpsilon);
  c.temporal_out = (c.row_standardized.array().colwise() * p.temporal_scale.array()).colwise() +
                   p.temporal_shift.array();

  // Feature mode: each time column standardized over its D features.
  c.col_mean = x.colwise().mean();
  const Matrix col_centered = x.rowwise() - c.col_mean;
  c.col_std = (col_centered.array().square().colwise().sum() / d).sqrt();
  c.col_standardized = col_centered.array().rowwise() / (c.col_std.array() + kNormEpsilon);
  c.feature_out =
      (c.col_standardized.array().rowwise() * p.feature_scale.transpose().array()).rowwise() +
      p.feature_shift.transpose().array();

  out.output = p.weight_temporal * c.temporal_out + p.weight_feature * c.feature_out;
  return out;
}

BinGrads bin_backward(const BinCache& cache, const BinParams& p, const Matrix& upstream) {
  check_shapes(cache.input, p);
  if (upstream.rows() != cache.input.rows() || upstream.cols() != cache.input.cols()) {
    throw ShapeError("BiN upstream gradient shape does not match the cached input");
  }
  const Matrix& x = cache.input;
  BinGrads g;
  g.params.weight_temporal = upstream.cwiseProduct(cache.temporal_out).sum();
  g.params.weight_feature = upstream.cwiseProduct(cache.feature_out).sum();

  const Matrix d_temporal = p.weight_temporal * upstream;
  const Matrix d_feature = p.weight_feature * upstream;

  g.params.temporal_scale = d_temporal.cwiseProduct(cache.row_standardized).rowwise().sum();
  g.params.temporal_shift = d_temporal.rowwise().sum();
  g.params.feature_scale =
      d_feature.cwiseProduct(cache.col_standardized).colwise().sum().transpose();
  g.params.feature_shift = d_feature.colwise().sum().transpose();

  g.input = Matrix::Zero(x.rows(), x.cols());

  const Matrix d_row_hat = d_temporal.array().colwise() * p.temporal_scale.array();
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::ArrayXd centered = (x.row(r).array() - cache.row_mean(r)).transpose();
    g.input.row(r) += standardize_backward(d_row_hat.row(r).transpose().array(), centered,
                                           cache.row_std(r))
                          .matrix()
                          .transpose();
  }

  const Matrix d_col_hat = d_feature.array().rowwise() * p.feature_scale.transpose().array();
  for (Eigen::Index col = 0; col < x.cols(); ++col) {
    const Eigen::ArrayXd centered = x.col(col).array() - cache.col_mean(col);
    g.input.col(col) +=
        standardize_backward(d_col_hat.col(col).array(), centered, cache.col_std(col)).matrix();
  }
  return g;
}

BinParams bin_project(BinParams p) {
  p.weight_temporal = std::max(p.weight_temporal, 0.0);
  p.weight_feature = std::max(p.weight_feature, 0.0);
  return p;
}

}  // namespace binorm
