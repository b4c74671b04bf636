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

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "binorm/backbone.hpp"
#include "binorm/bin_layer.hpp"
#include "binorm/bn_input.hpp"
#include "binorm/dain_layer.hpp"
#include "binorm/series.hpp"
#include "binorm/types.hpp"

namespace binorm {

enum class NormalizerKind { kNone, kZScore, kMinMax, kBatchNorm, kDain, kBin };
enum class HeadKind { kSoftmax3, kSoftmax2Regression };
enum class LayerType { kBilinear, kTabl };

const char* to_string(NormalizerKind kind) noexcept;
const char* to_string(HeadKind kind) noexcept;
const char* to_string(LayerType type) noexcept;
NormalizerKind parse_normalizer(const std::string& name);
HeadKind parse_head(const std::string& name);
LayerType parse_layer_type(const std::string& name);
Activation parse_activation(const std::string& name);

struct LayerSpec {
  LayerType type = LayerType::kBilinear;
  Eigen::Index out_rows = 0;
  Eigen::Index out_cols = 0;
  Activation activation = Activation::kRelu;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Normalizer -> backbone layers -> head. The normalizer always comes first
/// and there is exactly one (possibly `none`).
struct ModelSpec {
  Eigen::Index in_features = 40;
  Eigen::Index in_steps = 10;
  NormalizerKind normalizer = NormalizerKind::kBin;
  std::vector<LayerSpec> layers;
  HeadKind head = HeadKind::kSoftmax3;
  double bn_momentum = 0.9;

  /// Bilinear 60x10 (relu) -> TABL 120x5 (relu) -> head.
  static ModelSpec c_shape(NormalizerKind norm, HeadKind head, Eigen::Index features = 40,
                           Eigen::Index steps = 10);
  /// TABL 120x5 (relu) -> head.
  static ModelSpec b_shape(NormalizerKind norm, HeadKind head, Eigen::Index features = 40,
                           Eigen::Index steps = 10);

  /// Throws ShapeError when dimensions are non-positive.
  void validate() const;

  [[nodiscard]] Eigen::Index classes() const noexcept {
    return head == HeadKind::kSoftmax3 ? 3 : 2;
  }
  [[nodiscard]] Eigen::Index trunk_rows() const noexcept;
  [[nodiscard]] Eigen::Index trunk_cols() const noexcept;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

using NormalizerParams =
    std::variant<std::monostate, StaticNormalizer, BnInputParams, DainParams, BinParams>;
using LayerParams = std::variant<BilinearParams, TablParams>;

/// Every tensor of a model. The same type doubles as the gradient container
/// and as Adam moment storage, so tensors() enumerates all of them in lockstep.
struct ModelParams {
  NormalizerParams normalizer;
  std::vector<LayerParams> layers;
  DenseParams classifier;
  DenseParams regressor;  // empty unless the head is softmax2_regression

  /// Seeded initialization of every trainable tensor.
  static ModelParams initial(const ModelSpec& spec, std::uint64_t seed);
};

/// How the optimizer treats a tensor.
enum class TensorRole {
  kWeightRows,   // weight matrix, one output unit per row: decay + max-norm
  kWeightCols,   // weight matrix, one output unit per column: decay + max-norm
  kAttention,    // TABL attention mixing: decay, diagonal pinned at 1/H
  kBias,
  kNormalizer,   // learnable normalizer scale/shift/weights
  kNonNegative,  // BiN branch weights: projected onto [0, inf)
  kUnitInterval, // TABL mix: clamped into [0, 1]
  kBuffer,       // non-trainable state (running stats, static statistics)
};

struct TensorRef {
  std::string name;
  Eigen::Map<Matrix> value;
  TensorRole role;
};

struct ConstTensorRef {
  std::string name;
  Eigen::Map<const Matrix> value;
  TensorRole role;
};

/// Enumerates tensors in a fixed order. Two ModelParams of identical structure
/// produce parallel lists.
std::vector<TensorRef> tensors(ModelParams& params);
std::vector<ConstTensorRef> tensors(const ModelParams& params);

/// Same structure, all tensors zero (normalizer kind and activations kept).
ModelParams zeros_like(const ModelParams& params);

/// Trainable scalar count; buffers and the pinned attention diagonal excluded.
std::int64_t parameter_count(const ModelSpec& spec);

/// Fits the static normalizer (zscore/minmax); no-op for every other kind.
void fit_normalizer(const ModelSpec& spec, ModelParams& params,
                    std::span<const TimeSeriesSample> train);

struct Prediction {
  Vector logits;
  Vector probs;
  double horizon_pre = 0.0;  // regression pre-activation
  double horizon = 0.0;      // softplus(horizon_pre) >= 0
};

using NormalizerCache = std::variant<std::monostate, BinCache, DainCache>;
using LayerCache = std::variant<BilinearCache, TablCache>;

struct SampleCache {
  NormalizerCache normalizer;
  std::vector<LayerCache> layers;
  Vector flat;
};

struct BatchForward {
  std::vector<Prediction> predictions;
  std::vector<SampleCache> caches;
  BnInputCache bn;
};

/// Upstream gradient at the head outputs for one sample.
struct HeadUpstream {
  Vector logits;
  double horizon = 0.0;  // d loss / d horizon (post softplus)
};

/// Runs the batch through the model. Pure: BN running statistics are not
/// modified (see commit_batch_statistics). `threads` > 1 splits per-sample work.
BatchForward model_forward(const ModelSpec& spec, const ModelParams& params,
                           std::span<const Matrix> inputs, BnMode mode, int threads = 1);

/// Accumulates parameter gradients into `grads` (shaped like `params`).
void model_backward(const ModelSpec& spec, const ModelParams& params, const BatchForward& fwd,
                    std::span<const HeadUpstream> upstream, ModelParams& grads, int threads = 1);

/// Folds the batch statistics of a train-mode forward into BN running stats.
void commit_batch_statistics(ModelParams& params, const BatchForward& fwd);

/// Eval-mode prediction for a single window.
Prediction predict(const ModelSpec& spec, const ModelParams& params, const Matrix& input);

}  // namespace binorm
