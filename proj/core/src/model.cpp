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

#include "binorm/model.hpp"

#include <algorithm>
#include <string>
#include <thread>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

template <typename Fn>
void parallel_chunks(std::size_t n, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, n);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  const std::size_t per = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * per;
    const std::size_t end = std::min(n, begin + per);
    if (begin >= end) break;
    pool.emplace_back([&fn, w, begin, end] { fn(w, begin, end); });
  }
}

// Calls fn(name, data, rows, cols, role) for every tensor in a fixed order.
template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
  auto vec = [&](const std::string& name, auto& v, TensorRole role) {
    fn(name, v.data(), v.size(), Eigen::Index{1}, role);
  };
  auto mat = [&](const std::string& name, auto& m, TensorRole role) {
    fn(name, m.data(), m.rows(), m.cols(), role);
  };
  auto scalar = [&](const std::string& name, auto& s, TensorRole role) {
    fn(name, &s, Eigen::Index{1}, Eigen::Index{1}, role);
  };

  std::visit(
      [&](auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, StaticNormalizer>) {
          vec("static.first", n.first, TensorRole::kBuffer);
          vec("static.second", n.second, TensorRole::kBuffer);
        } else if constexpr (std::is_same_v<T, BnInputParams>) {
          mat("bn.scale", n.scale, TensorRole::kNormalizer);
          mat("bn.shift", n.shift, TensorRole::kNormalizer);
          mat("bn.running_mean", n.running_mean, TensorRole::kBuffer);
          mat("bn.running_var", n.running_var, TensorRole::kBuffer);
        } else if constexpr (std::is_same_v<T, DainParams>) {
          mat("dain.shift", n.shift, TensorRole::kNormalizer);
          mat("dain.scale", n.scale, TensorRole::kNormalizer);
          mat("dain.gate", n.gate, TensorRole::kNormalizer);
          vec("dain.gate_bias", n.gate_bias, TensorRole::kNormalizer);
        } else if constexpr (std::is_same_v<T, BinParams>) {
          vec("bin.temporal_scale", n.temporal_scale, TensorRole::kNormalizer);
          vec("bin.temporal_shift", n.temporal_shift, TensorRole::kNormalizer);
          vec("bin.feature_scale", n.feature_scale, TensorRole::kNormalizer);
          vec("bin.feature_shift", n.feature_shift, TensorRole::kNormalizer);
          scalar("bin.weight_temporal", n.weight_temporal, TensorRole::kNonNegative);
          scalar("bin.weight_feature", n.weight_feature, TensorRole::kNonNegative);
        }
      },
      p.normalizer);

  for (std::size_t i = 0; i < p.layers.size(); ++i) {
    const std::string prefix = "layer" + std::to_string(i);
    std::visit(
        [&](auto& l) {
          using T = std::decay_t<decltype(l)>;
          mat(prefix + ".left", l.left, TensorRole::kWeightRows);
          if constexpr (std::is_same_v<T, TablParams>) {
            mat(prefix + ".attention", l.attention, TensorRole::kAttention);
            scalar(prefix + ".mix", l.mix, TensorRole::kUnitInterval);
          }
          mat(prefix + ".right", l.right, TensorRole::kWeightCols);
          mat(prefix + ".bias", l.bias, TensorRole::kBias);
        },
        p.layers[i]);
  }

  mat("head.class.weight", p.classifier.weight, TensorRole::kWeightRows);
  vec("head.class.bias", p.classifier.bias, TensorRole::kBias);
  if (p.regressor.weight.size() > 0) {
    mat("head.reg.weight", p.regressor.weight, TensorRole::kWeightRows);
    vec("head.reg.bias", p.regressor.bias, TensorRole::kBias);
  }
}

void add_into(BilinearParams& acc, const BilinearParams& g) {
  acc.left += g.left;
  acc.right += g.right;
  acc.bias += g.bias;
}

void add_into(TablParams& acc, const TablParams& g) {
  acc.left += g.left;
  acc.attention += g.attention;
  acc.mix += g.mix;
  acc.right += g.right;
  acc.bias += g.bias;
}

void add_into(BinParams& acc, const BinParams& g) {
  acc.temporal_scale += g.temporal_scale;
  acc.temporal_shift += g.temporal_shift;
  acc.feature_scale += g.feature_scale;
  acc.feature_shift += g.feature_shift;
  acc.weight_temporal += g.weight_temporal;
  acc.weight_feature += g.weight_feature;
}

void add_into(DainParams& acc, const DainParams& g) {
  acc.shift += g.shift;
  acc.scale += g.scale;
  acc.gate += g.gate;
  acc.gate_bias += g.gate_bias;
}

void add_into(DenseParams& acc, const DenseParams& g) {
  acc.weight += g.weight;
  acc.bias += g.bias;
}

void add_all(ModelParams& acc, const ModelParams& g) {
  auto dst = tensors(acc);
  auto src = tensors(g);
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i].value += src[i].value;
}

void check_structure(const ModelSpec& spec, const ModelParams& params) {
  if (params.layers.size() != spec.layers.size()) {
    throw ShapeError("parameters hold " + std::to_string(params.layers.size()) +
                     " layers, spec declares " + std::to_string(spec.layers.size()));
  }
  const bool want_static =
      spec.normalizer == NormalizerKind::kZScore || spec.normalizer == NormalizerKind::kMinMax;
  const bool ok =
      (spec.normalizer == NormalizerKind::kNone &&
       std::holds_alternative<std::monostate>(params.normalizer)) ||
      (want_static && std::holds_alternative<StaticNormalizer>(params.normalizer)) ||
      (spec.normalizer == NormalizerKind::kBatchNorm &&
       std::holds_alternative<BnInputParams>(params.normalizer)) ||
      (spec.normalizer == NormalizerKind::kDain &&
       std::holds_alternative<DainParams>(params.normalizer)) ||
      (spec.normalizer == NormalizerKind::kBin &&
       std::holds_alternative<BinParams>(params.normalizer));
  if (!ok) {
    throw ShapeError(std::string("parameters do not hold a ") + to_string(spec.normalizer) +
                     " normalizer");
  }
}

// Trunk and head for one already-normalized sample.
Prediction forward_trunk(const ModelSpec& spec, const ModelParams& params, const Matrix& normalized,
                         SampleCache& cache) {
  cache.layers.clear();
  cache.layers.reserve(params.layers.size());
  Matrix h = normalized;
  for (const auto& layer : params.layers) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, BilinearParams>) {
            auto f = bilinear_forward(h, l);
            cache.layers.emplace_back(std::move(f.cache));
            h = std::move(f.output);
          } else {
            auto f = tabl_forward(h, l);
            cache.layers.emplace_back(std::move(f.cache));
            h = std::move(f.output);
          }
        },
        layer);
  }
  cache.flat = Eigen::Map<const Vector>(h.data(), h.size());

  Prediction pred;
  pred.logits = dense_forward(cache.flat, params.classifier);
  pred.probs = softmax(pred.logits);
  if (spec.head == HeadKind::kSoftmax2Regression) {
    pred.horizon_pre = dense_forward(cache.flat, params.regressor)(0);
    pred.horizon = softplus(pred.horizon_pre);
  }
  return pred;
}

// Head and trunk backward for one sample; returns d loss / d normalized input.
Matrix backward_trunk(const ModelSpec& spec, const ModelParams& params, const SampleCache& cache,
                      const Prediction& pred, const HeadUpstream& up, ModelParams& grads) {
  auto cls = dense_backward(cache.flat, params.classifier, up.logits);
  add_into(grads.classifier, cls.params);
  Vector d_flat = std::move(cls.input);
  if (spec.head == HeadKind::kSoftmax2Regression) {
    Vector d_pre(1);
    d_pre(0) = up.horizon * sigmoid(pred.horizon_pre);
    auto reg = dense_backward(cache.flat, params.regressor, d_pre);
    add_into(grads.regressor, reg.params);
    d_flat += reg.input;
  }

  Matrix d = Eigen::Map<const Matrix>(d_flat.data(), spec.trunk_rows(), spec.trunk_cols());
  for (std::size_t k = params.layers.size(); k-- > 0;) {
    std::visit(
        [&](const auto& l) {
          using T = std::decay_t<decltype(l)>;
          if constexpr (std::is_same_v<T, BilinearParams>) {
            auto g = bilinear_backward(std::get<BilinearCache>(cache.layers[k]), l, d);
            add_into(std::get<BilinearParams>(grads.layers[k]), g.params);
            d = std::move(g.input);
          } else {
            auto g = tabl_backward(std::get<TablCache>(cache.layers[k]), l, d);
            add_into(std::get<TablParams>(grads.layers[k]), g.params);
            d = std::move(g.input);
          }
        },
        params.layers[k]);
  }
  return d;
}

}  // namespace

const char* to_string(NormalizerKind kind) noexcept {
  switch (kind) {
    case NormalizerKind::kNone: return "none";
    case NormalizerKind::kZScore: return "zscore";
    case NormalizerKind::kMinMax: return "minmax";
    case NormalizerKind::kBatchNorm: return "bn";
    case NormalizerKind::kDain: return "dain";
    case NormalizerKind::kBin: return "bin";
  }
  return "?";
}

const char* to_string(HeadKind kind) noexcept {
  return kind == HeadKind::kSoftmax3 ? "softmax3" : "softmax2_regression";
}

const char* to_string(LayerType type) noexcept {
  return type == LayerType::kBilinear ? "bilinear" : "tabl";
}

NormalizerKind parse_normalizer(const std::string& name) {
  for (auto k : {NormalizerKind::kNone, NormalizerKind::kZScore, NormalizerKind::kMinMax,
                 NormalizerKind::kBatchNorm, NormalizerKind::kDain, NormalizerKind::kBin}) {
    if (name == to_string(k)) return k;
  }
  throw ValidationError("unknown normalizer '" + name +
                        "' (expected bin, dain, bn, zscore, minmax or none)");
}

HeadKind parse_head(const std::string& name) {
  if (name == "softmax3") return HeadKind::kSoftmax3;
  if (name == "softmax2_regression") return HeadKind::kSoftmax2Regression;
  throw ValidationError("unknown head '" + name + "' (expected softmax3 or softmax2_regression)");
}

LayerType parse_layer_type(const std::string& name) {
  if (name == "bilinear") return LayerType::kBilinear;
  if (name == "tabl") return LayerType::kTabl;
  throw ValidationError("unknown layer type '" + name + "' (expected bilinear or tabl)");
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "identity") return Activation::kIdentity;
  throw ValidationError("unknown activation '" + name + "' (expected relu or identity)");
}

ModelSpec ModelSpec::c_shape(NormalizerKind norm, HeadKind head, Eigen::Index features,
                             Eigen::Index steps) {
  ModelSpec s;
  s.in_features = features;
  s.in_steps = steps;
  s.normalizer = norm;
  s.head = head;
  s.layers = {{LayerType::kBilinear, 60, 10, Activation::kRelu},
              {LayerType::kTabl, 120, 5, Activation::kRelu}};
  return s;
}

ModelSpec ModelSpec::b_shape(NormalizerKind norm, HeadKind head, Eigen::Index features,
                             Eigen::Index steps) {
  ModelSpec s;
  s.in_features = features;
  s.in_steps = steps;
  s.normalizer = norm;
  s.head = head;
  s.layers = {{LayerType::kTabl, 120, 5, Activation::kRelu}};
  return s;
}

void ModelSpec::validate() const {
  if (in_features < 1 || in_steps < 1) {
    throw ShapeError("model input must be at least 1x1");
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].out_rows < 1 || layers[i].out_cols < 1) {
      throw ShapeError("layer " + std::to_string(i) + " has a non-positive output shape");
    }
  }
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) {
    throw ValidationError("bn_momentum must lie in (0, 1)");
  }
}

Eigen::Index ModelSpec::trunk_rows() const noexcept {
  return layers.empty() ? in_features : layers.back().out_rows;
}

Eigen::Index ModelSpec::trunk_cols() const noexcept {
  return layers.empty() ? in_steps : layers.back().out_cols;
}

ModelParams ModelParams::initial(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  ModelParams p;
  const auto d = spec.in_features;
  const auto h = spec.in_steps;
  switch (spec.normalizer) {
    case NormalizerKind::kNone:
      p.normalizer = std::monostate{};
      break;
    case NormalizerKind::kZScore:
    case NormalizerKind::kMinMax: {
      StaticNormalizer n;
      n.kind = spec.normalizer == NormalizerKind::kZScore ? StaticKind::kZScore
                                                          : StaticKind::kMinMax;
      n.first = Vector::Zero(d);
      n.second = Vector::Zero(d);
      n.fitted = false;
      p.normalizer = n;
      break;
    }
    case NormalizerKind::kBatchNorm:
      p.normalizer = BnInputParams::initial(d, h, spec.bn_momentum);
      break;
    case NormalizerKind::kDain:
      p.normalizer = DainParams::initial(d);
      break;
    case NormalizerKind::kBin:
      p.normalizer = BinParams::initial(d, h);
      break;
  }

  Eigen::Index rows = d;
  Eigen::Index cols = h;
  for (const auto& l : spec.layers) {
    if (l.type == LayerType::kBilinear) {
      p.layers.emplace_back(
          BilinearParams::initial(rows, cols, l.out_rows, l.out_cols, l.activation, rng));
    } else {
      p.layers.emplace_back(
          TablParams::initial(rows, cols, l.out_rows, l.out_cols, l.activation, rng));
    }
    rows = l.out_rows;
    cols = l.out_cols;
  }
  p.classifier = DenseParams::initial(rows * cols, spec.classes(), rng);
  if (spec.head == HeadKind::kSoftmax2Regression) {
    p.regressor = DenseParams::initial(rows * cols, 1, rng);
  }
  return p;
}

std::vector<TensorRef> tensors(ModelParams& params) {
  std::vector<TensorRef> out;
  visit_tensors(params, [&](const std::string& name, double* data, Eigen::Index r, Eigen::Index c,
                            TensorRole role) {
    out.push_back({name, Eigen::Map<Matrix>(data, r, c), role});
  });
  return out;
}

std::vector<ConstTensorRef> tensors(const ModelParams& params) {
  std::vector<ConstTensorRef> out;
  visit_tensors(params, [&](const std::string& name, const double* data, Eigen::Index r,
                            Eigen::Index c, TensorRole role) {
    out.push_back({name, Eigen::Map<const Matrix>(data, r, c), role});
  });
  return out;
}

ModelParams zeros_like(const ModelParams& params) {
  ModelParams z = params;
  for (auto& t : tensors(z)) t.value.setZero();
  return z;
}

std::int64_t parameter_count(const ModelSpec& spec) {
  const ModelParams p = ModelParams::initial(spec, 0);
  std::int64_t count = 0;
  for (const auto& t : tensors(p)) {
    if (t.role == TensorRole::kBuffer) continue;
    count += t.value.size();
    if (t.role == TensorRole::kAttention) count -= t.value.rows();
  }
  return count;
}

void fit_normalizer(const ModelSpec& spec, ModelParams& params,
                    std::span<const TimeSeriesSample> train) {
  if (auto* s = std::get_if<StaticNormalizer>(&params.normalizer)) {
    const StaticKind kind =
        spec.normalizer == NormalizerKind::kZScore ? StaticKind::kZScore : StaticKind::kMinMax;
    *s = fit_static(kind, train);
  }
}

BatchForward model_forward(const ModelSpec& spec, const ModelParams& params,
                           std::span<const Matrix> inputs, BnMode mode, int threads) {
  check_structure(spec, params);
  for (const auto& x : inputs) {
    if (x.rows() != spec.in_features || x.cols() != spec.in_steps) {
      throw ShapeError("model expects " + std::to_string(spec.in_features) + "x" +
                       std::to_string(spec.in_steps) + " input, got " +
                       std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
    }
  }
  const std::size_t n = inputs.size();
  BatchForward fwd;
  fwd.predictions.resize(n);
  fwd.caches.resize(n);

  std::vector<Matrix> bn_out;
  if (const auto* bn = std::get_if<BnInputParams>(&params.normalizer)) {
    auto f = bn_input_forward(inputs, *bn, mode);
    bn_out = std::move(f.outputs);
    fwd.bn = std::move(f.cache);
  }

  parallel_chunks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      SampleCache& cache = fwd.caches[i];
      Matrix normalized = std::visit(
          [&](const auto& norm) -> Matrix {
            using T = std::decay_t<decltype(norm)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              return inputs[i];
            } else if constexpr (std::is_same_v<T, StaticNormalizer>) {
              return apply_static(norm, inputs[i]);
            } else if constexpr (std::is_same_v<T, BnInputParams>) {
              return bn_out[i];
            } else if constexpr (std::is_same_v<T, DainParams>) {
              auto f = dain_forward(inputs[i], norm);
              cache.normalizer = std::move(f.cache);
              return std::move(f.output);
            } else {
              auto f = bin_forward(inputs[i], norm);
              cache.normalizer = std::move(f.cache);
              return std::move(f.output);
            }
          },
          params.normalizer);
      fwd.predictions[i] = forward_trunk(spec, params, normalized, cache);
    }
  });
  return fwd;
}

void model_backward(const ModelSpec& spec, const ModelParams& params, const BatchForward& fwd,
                    std::span<const HeadUpstream> upstream, ModelParams& grads, int threads) {
  check_structure(spec, params);
  const std::size_t n = fwd.predictions.size();
  if (upstream.size() != n) {
    throw ShapeError("upstream gradient count does not match the batch");
  }
  std::vector<Matrix> d_normalized(n);

  auto run = [&](ModelParams& acc, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Matrix d = backward_trunk(spec, params, fwd.caches[i], fwd.predictions[i], upstream[i], acc);
      if (const auto* bin = std::get_if<BinParams>(&params.normalizer)) {
        auto g = bin_backward(std::get<BinCache>(fwd.caches[i].normalizer), *bin, d);
        add_into(std::get<BinParams>(acc.normalizer), g.params);
      } else if (const auto* dain = std::get_if<DainParams>(&params.normalizer)) {
        auto g = dain_backward(std::get<DainCache>(fwd.caches[i].normalizer), *dain, d);
        add_into(std::get<DainParams>(acc.normalizer), g.params);
      }
      d_normalized[i] = std::move(d);
    }
  };

  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers <= 1) {
    run(grads, 0, n);
  } else {
    std::vector<ModelParams> partial(static_cast<std::size_t>(workers), zeros_like(grads));
    parallel_chunks(n, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
      run(partial[w], begin, end);
    });
    for (const auto& part : partial) add_all(grads, part);
  }

  if (const auto* bn = std::get_if<BnInputParams>(&params.normalizer)) {
    auto g = bn_input_backward(fwd.bn, *bn, d_normalized);
    auto& acc = std::get<BnInputParams>(grads.normalizer);
    acc.scale += g.scale;
    acc.shift += g.shift;
  }
}

void commit_batch_statistics(ModelParams& params, const BatchForward& fwd) {
  if (auto* bn = std::get_if<BnInputParams>(&params.normalizer)) {
    bn_commit_running(*bn, fwd.bn);
  }
}

Prediction predict(const ModelSpec& spec, const ModelParams& params, const Matrix& input) {
  const Matrix batch[1] = {input};
  return model_forward(spec, params, batch, BnMode::kEval, 1).predictions.front();
}

}  // namespace binorm
