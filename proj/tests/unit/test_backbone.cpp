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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <functional>
#include <random>

#include "binorm/backbone.hpp"
#include "binorm/errors.hpp"
#include "binorm/model.hpp"

namespace binorm {
namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

TEST(Bilinear, IdentityConfigurationReturnsInput) {
  std::mt19937_64 rng(1);
  BilinearParams p;
  p.left = Matrix::Identity(3, 3);
  p.right = Matrix::Identity(4, 4);
  p.bias = Matrix::Zero(3, 4);
  p.activation = Activation::kIdentity;
  const Matrix x = random_matrix(3, 4, rng);
  EXPECT_EQ(bilinear_forward(x, p).output, x);
}

TEST(Bilinear, WorkedProduct) {
  BilinearParams p;
  p.left = Matrix::Ones(1, 2);
  p.right = Matrix::Ones(2, 1);
  p.bias = Matrix::Zero(1, 1);
  p.activation = Activation::kIdentity;
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  EXPECT_EQ(bilinear_forward(x, p).output(0, 0), 10.0);
}

TEST(Bilinear, ReluSaturates) {
  std::mt19937_64 rng(2);
  BilinearParams p = BilinearParams::initial(3, 4, 2, 2, Activation::kRelu, rng);
  p.bias.setConstant(-100.0);
  Matrix x = random_matrix(3, 4, rng).cwiseMax(-1.0).cwiseMin(1.0);
  EXPECT_TRUE(bilinear_forward(x, p).output.isZero(0));
}

TEST(Bilinear, ShapeError) {
  std::mt19937_64 rng(3);
  const BilinearParams p = BilinearParams::initial(3, 4, 2, 2, Activation::kRelu, rng);
  EXPECT_THROW(bilinear_forward(Matrix::Ones(4, 4), p), ShapeError);
}

TEST(Tabl, ZeroMixIsBitIdenticalToBilinear) {
  std::mt19937_64 rng(4);
  for (auto act : {Activation::kRelu, Activation::kIdentity}) {
    TablParams t = TablParams::initial(5, 8, 3, 4, act, rng);
    t.mix = 0.0;
    t.bias = random_matrix(3, 4, rng);
    BilinearParams b{t.left, t.right, t.bias, act};
    const Matrix x = random_matrix(5, 8, rng);
    EXPECT_TRUE(bit_equal(tabl_forward(x, t).output, bilinear_forward(x, b).output));
  }
}

TEST(Tabl, AttentionRowsSumToOne) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    TablParams t = TablParams::initial(5, 8, 3, 4, Activation::kRelu, rng);
    t.attention = random_matrix(8, 8, rng, 2.0);
    const auto f = tabl_forward(random_matrix(5, 8, rng, 3.0), t);
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_NEAR(f.cache.attention.row(r).sum(), 1.0, 1e-12);
  }
}

TEST(Tabl, UniformAttentionClosedForm) {
  std::mt19937_64 rng(6);
  TablParams t = TablParams::initial(4, 5, 3, 2, Activation::kIdentity, rng);
  t.attention = Matrix::Constant(5, 5, 1.0 / 5.0);
  t.mix = 1.0;
  const Matrix x = random_matrix(4, 5, rng);
  const auto f = tabl_forward(x, t);
  const Matrix xbar = t.left * x;
  // Rows of Xbar W are constant, so softmax is uniform.
  EXPECT_LT((f.cache.attention.array() - 0.2).abs().maxCoeff(), 1e-15);
  EXPECT_LT((f.cache.mixed - xbar / 5.0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Tabl, ZeroMixAttentionGradientVanishes) {
  std::mt19937_64 rng(7);
  TablParams t = TablParams::initial(5, 8, 3, 4, Activation::kIdentity, rng);
  t.mix = 0.0;
  const auto f = tabl_forward(random_matrix(5, 8, rng), t);
  const auto g = tabl_backward(f.cache, t, random_matrix(3, 4, rng));
  EXPECT_TRUE(g.params.attention.isZero(0));
}

TEST(Tabl, DiagonalGradientExcludedAndConstraintRestored) {
  std::mt19937_64 rng(8);
  TablParams t = TablParams::initial(5, 8, 3, 4, Activation::kIdentity, rng);
  EXPECT_TRUE((t.attention.diagonal().array() == 1.0 / 8.0).all());
  const auto f = tabl_forward(random_matrix(5, 8, rng), t);
  const auto g = tabl_backward(f.cache, t, random_matrix(3, 4, rng));
  EXPECT_TRUE(g.params.attention.diagonal().isZero(0));
  t.attention.diagonal().setConstant(3.0);
  t.mix = 1.7;
  tabl_restore_constraints(t);
  EXPECT_TRUE((t.attention.diagonal().array() == 1.0 / 8.0).all());
  EXPECT_EQ(t.mix, 1.0);
  t.mix = -0.2;
  tabl_restore_constraints(t);
  EXPECT_EQ(t.mix, 0.0);
}

TEST(BackboneBackward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(9);
  const TablParams t = TablParams::initial(5, 8, 3, 4, Activation::kRelu, rng);
  const auto g = tabl_backward(tabl_forward(random_matrix(5, 8, rng), t).cache, t, Matrix::Zero(3, 4));
  EXPECT_TRUE(g.input.isZero(0));
  EXPECT_TRUE(g.params.left.isZero(0));
  EXPECT_TRUE(g.params.right.isZero(0));
  EXPECT_EQ(g.params.mix, 0.0);
  const BilinearParams b = BilinearParams::initial(5, 8, 3, 4, Activation::kRelu, rng);
  const auto gb = bilinear_backward(bilinear_forward(random_matrix(5, 8, rng), b).cache, b, Matrix::Zero(3, 4));
  EXPECT_TRUE(gb.input.isZero(0));
  EXPECT_TRUE(gb.params.bias.isZero(0));
}

double central(const std::function<double()>& f, double& x) {
  const double s = x;
  x = s + 1e-5;
  const double up = f();
  x = s - 1e-5;
  const double down = f();
  x = s;
  return (up - down) / 2e-5;
}

double rel_err(const Matrix& a, const Matrix& n) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), n.cwiseAbs().maxCoeff(), 1e-6});
  return (a - n).cwiseAbs().maxCoeff() / scale;
}

TEST(BackboneBackward, MatchesFiniteDifferencesForShape5x8To3x4) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 5; ++trial) {
    Matrix x = random_matrix(5, 8, rng);
    TablParams t = TablParams::initial(5, 8, 3, 4, Activation::kIdentity, rng);
    t.attention = random_matrix(8, 8, rng);
    t.attention.diagonal().setConstant(1.0 / 8.0);
    const Matrix up = random_matrix(3, 4, rng);
    const auto g = tabl_backward(tabl_forward(x, t).cache, t, up);
    auto loss = [&] { return tabl_forward(x, t).output.cwiseProduct(up).sum(); };
    Matrix nx(5, 8);
    for (Eigen::Index i = 0; i < x.size(); ++i) nx.data()[i] = central(loss, x.data()[i]);
    EXPECT_LT(rel_err(g.input, nx), 1e-5);
    Matrix nw(8, 8);
    for (Eigen::Index i = 0; i < 64; ++i) nw.data()[i] = central(loss, t.attention.data()[i]);
    nw.diagonal().setZero();
    EXPECT_LT(rel_err(g.params.attention, nw), 1e-5);
    Matrix nl(3, 5);
    for (Eigen::Index i = 0; i < nl.size(); ++i) nl.data()[i] = central(loss, t.left.data()[i]);
    EXPECT_LT(rel_err(g.params.left, nl), 1e-5);
  }
}

TEST(Heads, SoftmaxIsTranslationInvariantAndNormalized) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 50; ++i) {
    const Vector z = random_matrix(3, 1, rng, 5.0);
    const Vector p = softmax(z);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    const Vector q = softmax((z.array() + 123.0).matrix());
    EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Heads, SoftplusIsNonNegativeAndStable) {
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_EQ(softplus(800.0), 800.0);
  EXPECT_GE(softplus(-800.0), 0.0);
  EXPECT_NEAR(sigmoid(0.0), 0.5, 0.0);
}

TEST(Init, GlorotBoundsAndZeroBiases) {
  std::mt19937_64 rng(12);
  const BilinearParams b = BilinearParams::initial(40, 10, 60, 10, Activation::kRelu, rng);
  const double bound1 = std::sqrt(6.0 / (40 + 60));
  EXPECT_LE(b.left.cwiseAbs().maxCoeff(), bound1);
  EXPECT_TRUE(b.bias.isZero(0));
  const TablParams t = TablParams::initial(60, 10, 120, 5, Activation::kRelu, rng);
  EXPECT_EQ(t.mix, 0.5);
}

}  // namespace
}  // namespace binorm
