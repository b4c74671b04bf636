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

#include <random>

#include "binorm/types.hpp"

namespace binorm {

enum class Activation { kIdentity, kRelu };

const char* to_string(Activation act) noexcept;

/// Y = act(W1 * X * W2 + bias), mapping D x H to D' x H'.
struct BilinearParams {
  Matrix left;   // W1, D' x D
  Matrix right;  // W2, H x H'
  Matrix bias;   // D' x H'
  Activation activation = Activation::kRelu;

  /// Glorot-uniform weights, zero bias.
  static BilinearParams initial(Eigen::Index in_rows, Eigen::Index in_cols, Eigen::Index out_rows,
                                Eigen::Index out_cols, Activation act, std::mt19937_64& rng);
};

struct BilinearCache {
  Matrix input;
  Matrix left_product;  // W1 * X
  Matrix pre_activation;
};

struct BilinearGrads {
  BilinearParams params;
  Matrix input;
};

struct BilinearForward {
  Matrix output;
  BilinearCache cache;
};

BilinearForward bilinear_forward(const Matrix& x, const BilinearParams& p);
BilinearGrads bilinear_backward(const BilinearCache& cache, const BilinearParams& p,
                                const Matrix& upstream);

/// Temporal-attention bilinear layer.
///
///   Xbar = W1 * X
///   alpha = row-wise softmax(Xbar * attention)
///   Xtilde = mix * (Xbar .* alpha) + (1 - mix) * Xbar
///   Y = act(Xtilde * W2 + bias)
///
/// The diagonal of `attention` stays at 1/H and `mix` stays in [0, 1]; the
/// optimizer restores both after every step.
struct TablParams {
  Matrix left;       // D' x D
  Matrix attention;  // H x H
  double mix = 0.5;
  Matrix right;      // H x H'
  Matrix bias;       // D' x H'
  Activation activation = Activation::kRelu;

  static TablParams initial(Eigen::Index in_rows, Eigen::Index in_cols, Eigen::Index out_rows,
                            Eigen::Index out_cols, Activation act, std::mt19937_64& rng);
};

struct TablCache {
  Matrix input;
  Matrix left_product;  // Xbar
  Matrix attention;     // alpha
  Matrix mixed;         // Xtilde
  Matrix pre_activation;
};

struct TablGrads {
  TablParams params;
  Matrix input;
};

struct TablForward {
  Matrix output;
  TablCache cache;
};

TablForward tabl_forward(const Matrix& x, const TablParams& p);

/// Gradient w.r.t. the attention diagonal is reported as zero.
TablGrads tabl_backward(const TablCache& cache, const TablParams& p, const Matrix& upstream);

/// Resets the attention diagonal to 1/H and clamps `mix` into [0, 1].
void tabl_restore_constraints(TablParams& p);

/// Fully connected head on the column-major flattening of the trunk output.
struct DenseParams {
  Matrix weight;  // outputs x inputs
  Vector bias;

  static DenseParams initial(Eigen::Index inputs, Eigen::Index outputs, std::mt19937_64& rng);
};

Vector dense_forward(const Vector& x, const DenseParams& p);

struct DenseGrads {
  DenseParams params;
  Vector input;
};

DenseGrads dense_backward(const Vector& x, const DenseParams& p, const Vector& upstream);

Vector softmax(const Vector& logits);

/// Numerically stable log(1 + exp(x)).
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in,
                      Eigen::Index fan_out, std::mt19937_64& rng);

}  // namespace binorm
