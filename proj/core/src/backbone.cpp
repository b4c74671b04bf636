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

#include "binorm/backbone.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

Matrix activate(const Matrix& z, Activation act) {
  return act == Activation::kRelu ? Matrix(z.cwiseMax(0.0)) : z;
}

Matrix activation_backward(const Matrix& z, const Matrix& upstream, Activation act) {
  if (act == Activation::kIdentity) return upstream;
  return (z.array() > 0.0).select(upstream, 0.0);
}

// Shared tail of both bilinear-style layers: m * W2 + bias.
Matrix right_affine(const Matrix& m, const Matrix& right, const Matrix& bias) {
  Matrix z = m * right;
  z += bias;
  return z;
}

void check_chain(const Matrix& x, const Matrix& left, const Matrix& right, const Matrix& bias,
                 const char* layer) {
  if (left.cols() != x.rows() || right.rows() != x.cols() || bias.rows() != left.rows() ||
      bias.cols() != right.cols()) {
    throw ShapeError(std::string(layer) + ": input " + std::to_string(x.rows()) + "x" +
                     std::to_string(x.cols()) + " does not chain with W1 " +
                     std::to_string(left.rows()) + "x" + std::to_string(left.cols()) +
                     " and W2 " + std::to_string(right.rows()) + "x" +
                     std::to_string(right.cols()));
  }
}

Matrix row_softmax(const Matrix& e) {
  Matrix out = e.colwise() - e.rowwise().maxCoeff();
  out = out.array().exp();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

}  // namespace

const char* to_string(Activation act) noexcept {
  return act == Activation::kRelu ? "relu" : "identity";
}

Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                      Eigen::Index fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = dist(rng);
  return m;
}

BilinearParams BilinearParams::initial(Eigen::Index in_rows, Eigen::Index in_cols,
                                       Eigen::Index out_rows, Eigen::Index out_cols,
                                       Activation act, std::mt19937_64& rng) {
  BilinearParams p;
  p.left = glorot_uniform(out_rows, in_rows, in_rows, out_rows, rng);
  p.right = glorot_uniform(in_cols, out_cols, in_cols, out_cols, rng);
  p.bias = Matrix::Zero(out_rows, out_cols);
  p.activation = act;
  return p;
}

BilinearForward bilinear_forward(const Matrix& x, const BilinearParams& p) {
  check_chain(x, p.left, p.right, p.bias, "bilinear");
  BilinearForward out;
  out.cache.input = x;
  out.cache.left_product = p.left * x;
  out.cache.pre_activation = right_affine(out.cache.left_product, p.right, p.bias);
  out.output = activate(out.cache.pre_activation, p.activation);
  return out;
}

BilinearGrads bilinear_backward(const BilinearCache& cache, const BilinearParams& p,
                                const Matrix& upstream) {
  if (upstream.rows() != cache.pre_activation.rows() ||
      upstream.cols() != cache.pre_activation.cols()) {
    throw ShapeError("bilinear upstream gradient shape mismatch");
  }
  const Matrix dz = activation_backward(cache.pre_activation, upstream, p.activation);
  BilinearGrads g;
  g.params.activation = p.activation;
  g.params.bias = dz;
  g.params.right = cache.left_product.transpose() * dz;
  const Matrix d_left_product = dz * p.right.transpose();
  g.params.left = d_left_product * cache.input.transpose();
  g.input = p.left.transpose() * d_left_product;
  return g;
}

TablParams TablParams::initial(Eigen::Index in_rows, Eigen::Index in_cols, Eigen::Index out_rows,
                               Eigen::Index out_cols, Activation act, std::mt19937_64& rng) {
  TablParams p;
  p.left = glorot_uniform(out_rows, in_rows, in_rows, out_rows, rng);
  p.attention = glorot_uniform(in_cols, in_cols, in_cols, in_cols, rng);
  p.mix = 0.5;
  p.right = glorot_uniform(in_cols, out_cols, in_cols, out_cols, rng);
  p.bias = Matrix::Zero(out_rows, out_cols);
  p.activation = act;
  tabl_restore_constraints(p);
  return p;
}

void tabl_restore_constraints(TablParams& p) {
  p.attention.diagonal().setConstant(1.0 / static_cast<double>(p.attention.rows()));
  p.mix = std::clamp(p.mix, 0.0, 1.0);
}

TablForward tabl_forward(const Matrix& x, const TablParams& p) {
  check_chain(x, p.left, p.right, p.bias, "tabl");
  if (p.attention.rows() != x.cols() || p.attention.cols() != x.cols()) {
    throw ShapeError("tabl: attention matrix must be " + std::to_string(x.cols()) + "x" +
                     std::to_string(x.cols()));
  }
  TablForward out;
  TablCache& c = out.cache;
  c.input = x;
  c.left_product = p.left * x;
  c.attention = row_softmax(c.left_product * p.attention);
  c.mixed = p.mix * c.left_product.cwiseProduct(c.attention) + (1.0 - p.mix) * c.left_product;
  c.pre_activation = right_affine(c.mixed, p.right, p.bias);
  out.output = activate(c.pre_activation, p.activation);
  return out;
}

TablGrads tabl_backward(const TablCache& cache, const TablParams& p, const Matrix& upstream) {
  if (upstream.rows() != cache.pre_activation.rows() ||
      upstream.cols() != cache.pre_activation.cols()) {
    throw ShapeError("tabl upstream gradient shape mismatch");
  }
  const Matrix dz = activation_backward(cache.pre_activation, upstream, p.activation);
  TablGrads g;
  g.params.activation = p.activation;
  g.params.bias = dz;
  g.params.right = cache.mixed.transpose() * dz;
  const Matrix d_mixed = dz * p.right.transpose();

  const Matrix& xbar = cache.left_product;
  const Matrix& alpha = cache.attention;
  g.params.mix = d_mixed.cwiseProduct(xbar.cwiseProduct(alpha) - xbar).sum();

  Matrix d_xbar = d_mixed.cwiseProduct((p.mix * alpha.array() + (1.0 - p.mix)).matrix());
  const Matrix d_alpha = p.mix * d_mixed.cwiseProduct(xbar);
  const Vector row_dot = d_alpha.cwiseProduct(alpha).rowwise().sum();
  const Matrix d_energy = alpha.cwiseProduct(d_alpha.colwise() - row_dot);

  g.params.attention = xbar.transpose() * d_energy;
  g.params.attention.diagonal().setZero();
  d_xbar += d_energy * p.attention.transpose();

  g.params.left = d_xbar * cache.input.transpose();
  g.input = p.left.transpose() * d_xbar;
  return g;
}

DenseParams DenseParams::initial(Eigen::Index inputs, Eigen::Index outputs, std::mt19937_64& rng) {
  DenseParams p;
  p.weight = glorot_uniform(outputs, inputs, inputs, outputs, rng);
  p.bias = Vector::Zero(outputs);
  return p;
}

Vector dense_forward(const Vector& x, const DenseParams& p) {
  if (p.weight.cols() != x.size() || p.bias.size() != p.weight.rows()) {
    throw ShapeError("dense head expects " + std::to_string(p.weight.cols()) + " inputs, got " +
                     std::to_string(x.size()));
  }
  Vector y = p.weight * x;
  y += p.bias;
  return y;
}

DenseGrads dense_backward(const Vector& x, const DenseParams& p, const Vector& upstream) {
  if (upstream.size() != p.weight.rows()) {
    throw ShapeError("dense upstream gradient shape mismatch");
  }
  DenseGrads g;
  g.params.weight = upstream * x.transpose();
  g.params.bias = upstream;
  g.input = p.weight.transpose() * upstream;
  return g;
}

Vector softmax(const Vector& logits) {
  Vector e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace binorm
