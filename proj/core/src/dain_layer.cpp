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

#include "binorm/dain_layer.hpp"

#include <string>

#include "binorm/backbone.hpp"
#include "binorm/bin_layer.hpp"
#include "binorm/errors.hpp"

namespace binorm {
namespace {

void check_shapes(const Matrix& x, const DainParams& p) {
  const Eigen::Index d = p.features();
  if (p.shift.cols() != d || p.scale.rows() != d || p.scale.cols() != d || p.gate.rows() != d ||
      p.gate.cols() != d || p.gate_bias.size() != d) {
    throw ShapeError("DAIN parameter shapes are inconsistent");
  }
  if (x.rows() != d) {
    throw ShapeError("DAIN expects " + std::to_string(d) + " features, got " +
                     std::to_string(x.rows()));
  }
}

}  // namespace

DainParams DainParams::initial(Eigen::Index features) {
  DainParams p;
  p.shift = Matrix::Identity(features, features);
  p.scale = Matrix::Identity(features, features);
  p.gate = Matrix::Zero(features, features);
  p.gate_bias = Vector::Zero(features);
  return p;
}

DainForward dain_forward(const Matrix& x, const DainParams& p) {
  check_shapes(x, p);
  if (!x.allFinite()) {
    throw ValidationError("DAIN input contains non-finite values");
  }
  const double h = static_cast<double>(x.cols());
  DainForward out;
  DainCache& c = out.cache;
  c.input = x;
  c.mean = x.rowwise().mean();
  c.shifted = x.colwise() - p.shift * c.mean;
  c.shifted_std = (c.shifted.array().square().rowwise().sum() / h).sqrt();
  c.denom = (p.scale * c.shifted_std).array() + kNormEpsilon;
  c.scaled = c.shifted.array().colwise() / c.denom.array();
  c.scaled_mean = c.scaled.rowwise().mean();
  const Vector pre = p.gate * c.scaled_mean + p.gate_bias;
  c.gate = pre.unaryExpr([](double v) { return sigmoid(v); });
  out.output = c.scaled.array().colwise() * c.gate.array();
  return out;
}

DainGrads dain_backward(const DainCache& cache, const DainParams& p, const Matrix& upstream) {
  check_shapes(cache.input, p);
  if (upstream.rows() != cache.input.rows() || upstream.cols() != cache.input.cols()) {
    throw ShapeError("DAIN upstream gradient shape does not match the cached input");
  }
  const double h = static_cast<double>(cache.input.cols());
  DainGrads g;

  // Gating.
  Matrix d_scaled = upstream.array().colwise() * cache.gate.array();
  const Vector d_gate = upstream.cwiseProduct(cache.scaled).rowwise().sum();
  const Vector d_pre = d_gate.array() * cache.gate.array() * (1.0 - cache.gate.array());
  g.params.gate_bias = d_pre;
  g.params.gate = d_pre * cache.scaled_mean.transpose();
  const Vector d_scaled_mean = p.gate.transpose() * d_pre;
  d_scaled.colwise() += d_scaled_mean / h;

  // Scaling.
  Matrix d_shifted = d_scaled.array().colwise() / cache.denom.array();
  const Vector d_denom = -(d_scaled.cwiseProduct(cache.shifted).rowwise().sum().array() /
                           cache.denom.array().square())
                              .matrix();
  g.params.scale = d_denom * cache.shifted_std.transpose();
  const Vector d_std = p.scale.transpose() * d_denom;
  for (Eigen::Index r = 0; r < d_shifted.rows(); ++r) {
    if (cache.shifted_std(r) > 0.0) {
      d_shifted.row(r) += (d_std(r) / (h * cache.shifted_std(r))) * cache.shifted.row(r);
    }
  }

  // Shifting.
  const Vector d_shift_out = d_shifted.rowwise().sum();
  g.params.shift = -d_shift_out * cache.mean.transpose();
  const Vector d_mean = -(p.shift.transpose() * d_shift_out);
  g.input = d_shifted;
  g.input.colwise() += d_mean / h;
  return g;
}

}  // namespace binorm
