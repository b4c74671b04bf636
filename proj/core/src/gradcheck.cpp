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

#include "binorm/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <utility>

#include "binorm/backbone.hpp"
#include "binorm/bin_layer.hpp"
#include "binorm/bn_input.hpp"
#include "binorm/dain_layer.hpp"
#include "binorm/errors.hpp"
#include "binorm/losses.hpp"
#include "binorm/model.hpp"

namespace binorm {
namespace {

constexpr double kKinkMargin = 1e-3;
constexpr int kMaxRedraws = 1000;

using Loss = std::function<double()>;

class Recorder {
 public:
  explicit Recorder(const GradcheckOptions& opt) : opt_(opt) {}

  // Compares `analytic` against central differences of `loss` over `data`.
  // Entries listed in `skip` are excluded from the comparison.
  void check(const std::string& component, const std::string& tensor, double* data,
             Eigen::Index n, std::vector<double> analytic, const Loss& loss, double tolerance,
             const std::vector<Eigen::Index>& skip = {}) {
    if (static_cast<Eigen::Index>(analytic.size()) != n) {
      throw ShapeError("gradcheck: analytic gradient size mismatch for " + component + "/" +
                       tensor);
    }
    std::vector<double> numeric(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double saved = data[i];
      data[i] = saved + opt_.step;
      const double up = loss();
      data[i] = saved - opt_.step;
      const double down = loss();
      data[i] = saved;
      numeric[static_cast<std::size_t>(i)] = (up - down) / (2.0 * opt_.step);
    }
    for (Eigen::Index i : skip) {
      analytic[static_cast<std::size_t>(i)] = 0.0;
      numeric[static_cast<std::size_t>(i)] = 0.0;
    }
    if (opt_.perturb_analytic && !analytic.empty()) {
      double scale = 1.0;
      for (double a : analytic) scale = std::max(scale, std::abs(a));
      analytic.front() += 1e-3 * scale;
    }
    const double err = relative_error(analytic, numeric);

    const auto key = std::make_pair(component, tensor);
    auto it = index_.find(key);
    if (it == index_.end()) {
      it = index_.emplace(key, rows_.size()).first;
      rows_.push_back({component, tensor, 0.0, tolerance, 0, true});
    }
    GradcheckRow& row = rows_[it->second];
    row.worst_relative_error = std::max(row.worst_relative_error, err);
    row.instances += 1;
    row.passed = row.passed && err <= tolerance;
  }

  void check(const std::string& component, const std::string& tensor, Matrix& data,
             const Matrix& analytic, const Loss& loss, double tolerance,
             const std::vector<Eigen::Index>& skip = {}) {
    check(component, tensor, data.data(), data.size(),
          std::vector<double>(analytic.data(), analytic.data() + analytic.size()), loss,
          tolerance, skip);
  }

  void check(const std::string& component, const std::string& tensor, Vector& data,
             const Vector& analytic, const Loss& loss, double tolerance) {
    check(component, tensor, data.data(), data.size(),
          std::vector<double>(analytic.data(), analytic.data() + analytic.size()), loss,
          tolerance);
  }

  void check(const std::string& component, const std::string& tensor, double& data,
             double analytic, const Loss& loss, double tolerance) {
    check(component, tensor, &data, 1, {analytic}, loss, tolerance);
  }

  std::vector<GradcheckRow> take() { return std::move(rows_); }

 private:
  const GradcheckOptions& opt_;
  std::vector<GradcheckRow> rows_;
  std::map<std::pair<std::string, std::string>, std::size_t> index_;
};

Matrix gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng, double sd = 1.0) {
  std::normal_distribution<double> dist(0.0, sd);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Vector gaussian_vec(Eigen::Index n, std::mt19937_64& rng, double sd = 1.0) {
  return gaussian(n, 1, rng, sd);
}

double weighted_sum(const Matrix& out, const Matrix& upstream) {
  return out.cwiseProduct(upstream).sum();
}

bool near_kink(const Matrix& pre, Activation act) {
  return act == Activation::kRelu && (pre.array().abs() < kKinkMargin).any();
}

std::vector<Eigen::Index> diagonal_indices(Eigen::Index n) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < n; ++i) out.push_back(i * n + i);
  return out;
}

bool ill_conditioned(const DainCache& cache) {
  return (cache.denom.array().abs() < 0.1).any();
}

void check_bin(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const Eigen::Index d = 4;
  const Eigen::Index h = 5;
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    Matrix x = gaussian(d, h, rng);
    BinParams p = BinParams::initial(d, h);
    p.temporal_scale = gaussian_vec(d, rng);
    p.temporal_shift = gaussian_vec(d, rng);
    p.feature_scale = gaussian_vec(h, rng);
    p.feature_shift = gaussian_vec(h, rng);
    p.weight_temporal = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    p.weight_feature = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const Matrix up = gaussian(d, h, rng);

    const auto fwd = bin_forward(x, p);
    const auto g = bin_backward(fwd.cache, p, up);
    const Loss loss = [&] { return weighted_sum(bin_forward(x, p).output, up); };
    rec.check("bin", "temporal_scale", p.temporal_scale, g.params.temporal_scale, loss, tol);
    rec.check("bin", "temporal_shift", p.temporal_shift, g.params.temporal_shift, loss, tol);
    rec.check("bin", "feature_scale", p.feature_scale, g.params.feature_scale, loss, tol);
    rec.check("bin", "feature_shift", p.feature_shift, g.params.feature_shift, loss, tol);
    rec.check("bin", "weight_temporal", p.weight_temporal, g.params.weight_temporal, loss, tol);
    rec.check("bin", "weight_feature", p.weight_feature, g.params.weight_feature, loss, tol);
    rec.check("bin", "input", x, g.input, loss, tol);
  }
}

void check_dain(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const Eigen::Index d = 4;
  const Eigen::Index h = 5;
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    Matrix x = gaussian(d, h, rng);
    DainParams p = DainParams::initial(d);
    p.shift = Matrix::Identity(d, d) + gaussian(d, d, rng, 0.2);
    // Keep the scale map close to identity so the denominator stays away from zero.
    p.scale = Matrix::Identity(d, d) + gaussian(d, d, rng, 0.05);
    p.gate = gaussian(d, d, rng, 0.5);
    p.gate_bias = gaussian_vec(d, rng, 0.5);
    const Matrix up = gaussian(d, h, rng);

    const auto fwd = dain_forward(x, p);
    if (ill_conditioned(fwd.cache)) {
      --k;
      continue;
    }
    const auto g = dain_backward(fwd.cache, p, up);
    const Loss loss = [&] { return weighted_sum(dain_forward(x, p).output, up); };
    rec.check("dain", "shift", p.shift, g.params.shift, loss, tol);
    rec.check("dain", "scale", p.scale, g.params.scale, loss, tol);
    rec.check("dain", "gate", p.gate, g.params.gate, loss, tol);
    rec.check("dain", "gate_bias", p.gate_bias, g.params.gate_bias, loss, tol);
    rec.check("dain", "input", x, g.input, loss, tol);
  }
}

void check_bn(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const Eigen::Index d = 3;
  const Eigen::Index h = 4;
  const std::size_t n = 5;
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    std::vector<Matrix> batch;
    std::vector<Matrix> up;
    for (std::size_t i = 0; i < n; ++i) {
      batch.push_back(gaussian(d, h, rng));
      up.push_back(gaussian(d, h, rng));
    }
    BnInputParams p = BnInputParams::initial(d, h);
    p.scale = gaussian(d, h, rng);
    p.shift = gaussian(d, h, rng);

    const auto fwd = bn_input_forward(batch, p, BnMode::kTrain);
    const auto g = bn_input_backward(fwd.cache, p, up);
    const Loss loss = [&] {
      const auto f = bn_input_forward(batch, p, BnMode::kTrain);
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += weighted_sum(f.outputs[i], up[i]);
      return s;
    };
    rec.check("bn_input", "scale", p.scale, g.scale, loss, tol);
    rec.check("bn_input", "shift", p.shift, g.shift, loss, tol);
    for (std::size_t i = 0; i < n; ++i) rec.check("bn_input", "input", batch[i], g.inputs[i], loss, tol);
  }
}

void check_bilinear(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    const Activation act = k % 2 == 0 ? Activation::kRelu : Activation::kIdentity;
    Matrix x;
    BilinearParams p;
    int redraws = 0;
    do {
      if (++redraws > kMaxRedraws) throw Error("gradcheck: could not draw a kink-free bilinear case");
      x = gaussian(4, 5, rng);
      p = BilinearParams::initial(4, 5, 3, 2, act, rng);
      p.bias = gaussian(3, 2, rng, 0.5);
    } while (near_kink(bilinear_forward(x, p).cache.pre_activation, act));
    const Matrix up = gaussian(3, 2, rng);

    const auto fwd = bilinear_forward(x, p);
    const auto g = bilinear_backward(fwd.cache, p, up);
    const Loss loss = [&] { return weighted_sum(bilinear_forward(x, p).output, up); };
    rec.check("bilinear", "left", p.left, g.params.left, loss, tol);
    rec.check("bilinear", "right", p.right, g.params.right, loss, tol);
    rec.check("bilinear", "bias", p.bias, g.params.bias, loss, tol);
    rec.check("bilinear", "input", x, g.input, loss, tol);
  }
}

void check_tabl(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    const Activation act = k % 2 == 0 ? Activation::kRelu : Activation::kIdentity;
    Matrix x;
    TablParams p;
    int redraws = 0;
    do {
      if (++redraws > kMaxRedraws) throw Error("gradcheck: could not draw a kink-free tabl case");
      x = gaussian(4, 5, rng);
      p = TablParams::initial(4, 5, 3, 2, act, rng);
      p.attention = gaussian(5, 5, rng);
      p.attention.diagonal().setConstant(1.0 / 5.0);
      p.mix = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      p.bias = gaussian(3, 2, rng, 0.5);
    } while (near_kink(tabl_forward(x, p).cache.pre_activation, act));
    const Matrix up = gaussian(3, 2, rng);

    const auto fwd = tabl_forward(x, p);
    const auto g = tabl_backward(fwd.cache, p, up);
    const Loss loss = [&] { return weighted_sum(tabl_forward(x, p).output, up); };
    rec.check("tabl", "left", p.left, g.params.left, loss, tol);
    rec.check("tabl", "attention", p.attention, g.params.attention, loss, tol,
              diagonal_indices(5));
    rec.check("tabl", "mix", p.mix, g.params.mix, loss, tol);
    rec.check("tabl", "right", p.right, g.params.right, loss, tol);
    rec.check("tabl", "bias", p.bias, g.params.bias, loss, tol);
    rec.check("tabl", "input", x, g.input, loss, tol);
  }
}

void check_heads(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const double tol = opt.layer_tolerance;
  const Eigen::Index inputs = 6;
  for (int k = 0; k < opt.instances; ++k) {
    // Classification head: dense, softmax, cross-entropy.
    {
      Vector x = gaussian_vec(inputs, rng);
      DenseParams p = DenseParams::initial(inputs, 3, rng);
      p.bias = gaussian_vec(3, rng, 0.5);
      const int label = static_cast<int>(rng() % 3);
      const Loss loss = [&] { return loss_setting1(softmax(dense_forward(x, p)), label).loss; };
      const auto ce = loss_setting1(softmax(dense_forward(x, p)), label);
      const auto g = dense_backward(x, p, ce.dlogits);
      rec.check("head_softmax3", "weight", p.weight, g.params.weight, loss, tol);
      rec.check("head_softmax3", "bias", p.bias, g.params.bias, loss, tol);
      rec.check("head_softmax3", "input", x, g.input, loss, tol);
    }
    // Regression head: dense to one unit, softplus, squared error.
    {
      Vector x = gaussian_vec(inputs, rng);
      DenseParams p = DenseParams::initial(inputs, 1, rng);
      p.bias = gaussian_vec(1, rng, 0.5);
      const double target = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      const Loss loss = [&] {
        const double r = softplus(dense_forward(x, p)(0)) - target;
        return r * r;
      };
      const double pre = dense_forward(x, p)(0);
      Vector up(1);
      up(0) = 2.0 * (softplus(pre) - target) * sigmoid(pre);
      const auto g = dense_backward(x, p, up);
      rec.check("head_regression", "weight", p.weight, g.params.weight, loss, tol);
      rec.check("head_regression", "bias", p.bias, g.params.bias, loss, tol);
      rec.check("head_regression", "input", x, g.input, loss, tol);
    }
  }
}

void check_losses(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng) {
  const double tol = opt.layer_tolerance;
  for (int k = 0; k < opt.instances; ++k) {
    {
      Vector logits = gaussian_vec(3, rng, 2.0);
      const int label = static_cast<int>(rng() % 3);
      const Loss loss = [&] { return loss_setting1(softmax(logits), label).loss; };
      rec.check("loss_setting1", "logits", logits, loss_setting1(softmax(logits), label).dlogits,
                loss, tol);
    }
    {
      Vector logits = gaussian_vec(2, rng, 2.0);
      const int dir = static_cast<int>(rng() % 2);
      double predicted = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      const double target = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      const double weight = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
      const Loss loss = [&] {
        return loss_setting2(softmax(logits), dir, predicted, target, weight).loss;
      };
      const auto j = loss_setting2(softmax(logits), dir, predicted, target, weight);
      rec.check("loss_setting2", "logits", logits, j.dlogits, loss, tol);
      rec.check("loss_setting2", "horizon", predicted, j.dhorizon, loss, tol);
    }
  }
}

bool model_needs_redraw(const ModelSpec& spec, const BatchForward& fwd) {
  for (const auto& cache : fwd.caches) {
    for (std::size_t i = 0; i < cache.layers.size(); ++i) {
      const Matrix& pre = std::visit([](const auto& c) -> const Matrix& { return c.pre_activation; },
                                     cache.layers[i]);
      if (near_kink(pre, spec.layers[i].activation)) return true;
    }
    if (const auto* dain = std::get_if<DainCache>(&cache.normalizer)) {
      if (ill_conditioned(*dain)) return true;
    }
  }
  return false;
}

void randomize_trainables(ModelParams& params, std::mt19937_64& rng) {
  std::normal_distribution<double> jitter(0.0, 0.1);
  for (auto& t : tensors(params)) {
    if (t.role == TensorRole::kBuffer) continue;
    for (Eigen::Index i = 0; i < t.value.size(); ++i) t.value.data()[i] += jitter(rng);
    if (t.role == TensorRole::kNonNegative) t.value = t.value.cwiseAbs();
  }
  for (auto& l : params.layers) {
    if (auto* tabl = std::get_if<TablParams>(&l)) {
      tabl->mix = std::clamp(tabl->mix, 0.05, 0.95);
      tabl_restore_constraints(*tabl);
    }
  }
}

void check_model(Recorder& rec, const GradcheckOptions& opt, std::mt19937_64& rng,
                 NormalizerKind norm, HeadKind head) {
  const Eigen::Index d = 4;
  const Eigen::Index h = 5;
  ModelSpec spec;
  spec.in_features = d;
  spec.in_steps = h;
  spec.normalizer = norm;
  spec.head = head;
  spec.layers = {{LayerType::kBilinear, 3, 4, Activation::kRelu},
                 {LayerType::kTabl, 3, 2, Activation::kRelu}};
  const std::string component = std::string("model[") + to_string(norm) + "," + to_string(head) + "]";
  const std::size_t n = 3;
  const double tol = opt.end_to_end_tolerance;

  for (int k = 0; k < opt.instances; ++k) {
    std::vector<Matrix> batch;
    ModelParams params;
    int redraws = 0;
    while (true) {
      if (++redraws > kMaxRedraws) throw Error("gradcheck: could not draw a kink-free model case");
      batch.clear();
      std::vector<TimeSeriesSample> samples;
      for (std::size_t i = 0; i < n; ++i) {
        batch.push_back(gaussian(d, h, rng));
        samples.emplace_back(batch.back());
      }
      params = ModelParams::initial(spec, rng());
      randomize_trainables(params, rng);
      fit_normalizer(spec, params, samples);
      if (!model_needs_redraw(spec, model_forward(spec, params, batch, BnMode::kTrain))) break;
    }

    std::vector<int> labels;
    std::vector<double> targets;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(spec.classes())));
      targets.push_back(std::uniform_real_distribution<double>(0.0, 3.0)(rng));
    }
    auto evaluate = [&](std::vector<HeadUpstream>* upstream) {
      const auto fwd = model_forward(spec, params, batch, BnMode::kTrain);
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const Prediction& pr = fwd.predictions[i];
        HeadUpstream up;
        if (head == HeadKind::kSoftmax3) {
          const auto l = loss_setting1(pr.probs, labels[i]);
          total += l.loss;
          up.logits = l.dlogits;
        } else {
          const auto l = loss_setting2(pr.probs, labels[i], pr.horizon, targets[i], 1.0);
          total += l.loss;
          up.logits = l.dlogits;
          up.horizon = l.dhorizon;
        }
        if (upstream) upstream->push_back(up);
      }
      return std::make_pair(total, fwd);
    };

    std::vector<HeadUpstream> upstream;
    const auto [_, fwd] = evaluate(&upstream);
    ModelParams grads = zeros_like(params);
    model_backward(spec, params, fwd, upstream, grads);

    const Loss loss = [&] { return evaluate(nullptr).first; };
    auto p_list = tensors(params);
    const auto g_list = tensors(std::as_const(grads));
    for (std::size_t t = 0; t < p_list.size(); ++t) {
      if (p_list[t].role == TensorRole::kBuffer) continue;
      std::vector<Eigen::Index> skip;
      if (p_list[t].role == TensorRole::kAttention) skip = diagonal_indices(p_list[t].value.rows());
      const auto& g = g_list[t].value;
      rec.check(component, p_list[t].name, p_list[t].value.data(), p_list[t].value.size(),
                std::vector<double>(g.data(), g.data() + g.size()), loss, tol, skip);
    }
  }
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  if (analytic.size() != numeric.size()) throw ShapeError("relative_error: size mismatch");
  double diff = 0.0;
  double a_max = 0.0;
  double n_max = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    a_max = std::max(a_max, std::abs(analytic[i]));
    n_max = std::max(n_max, std::abs(numeric[i]));
  }
  return diff / std::max({a_max, n_max, 1e-6});
}

bool GradcheckReport::passed() const noexcept {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const GradcheckRow& r) { return r.passed; });
}

std::string GradcheckReport::to_text() const {
  std::ostringstream out;
  out << "component\ttensor\tinstances\tworst_relative_error\ttolerance\tstatus\n";
  for (const auto& r : rows) {
    out << r.component << '\t' << r.tensor << '\t' << r.instances << '\t'
        << format_double(r.worst_relative_error) << '\t' << format_double(r.tolerance) << '\t'
        << (r.passed ? "PASS" : "FAIL") << '\n';
  }
  out << (passed() ? "gradcheck: PASS\n" : "gradcheck: FAIL\n");
  return out.str();
}

GradcheckReport run_gradcheck(const GradcheckOptions& options) {
  if (options.instances < 1) throw ValidationError("gradcheck: instances must be >= 1");
  if (!(options.step > 0.0)) throw ValidationError("gradcheck: step must be positive");
  Recorder rec(options);
  std::mt19937_64 rng(options.seed);
  check_bin(rec, options, rng);
  check_dain(rec, options, rng);
  check_bn(rec, options, rng);
  check_bilinear(rec, options, rng);
  check_tabl(rec, options, rng);
  check_heads(rec, options, rng);
  check_losses(rec, options, rng);
  for (auto norm : {NormalizerKind::kNone, NormalizerKind::kZScore, NormalizerKind::kMinMax,
                    NormalizerKind::kBatchNorm, NormalizerKind::kDain, NormalizerKind::kBin}) {
    for (auto head : {HeadKind::kSoftmax3, HeadKind::kSoftmax2Regression}) {
      check_model(rec, options, rng, norm, head);
    }
  }
  GradcheckReport report;
  report.rows = rec.take();
  return report;
}

}  // namespace binorm
