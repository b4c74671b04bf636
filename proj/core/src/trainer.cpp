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

#include "binorm/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "binorm/errors.hpp"
#include "binorm/losses.hpp"

namespace binorm {
namespace {

void check_compatible(const ModelSpec& spec, const LabeledDataset& data) {
  if (data.features != spec.in_features || data.steps != spec.in_steps) {
    throw ShapeError("dataset windows are " + std::to_string(data.features) + "x" +
                     std::to_string(data.steps) + ", model expects " +
                     std::to_string(spec.in_features) + "x" + std::to_string(spec.in_steps));
  }
  const bool next_move = data.setting == Setting::kNextMove;
  if (next_move != (spec.head == HeadKind::kSoftmax2Regression)) {
    throw ValidationError(std::string("setting ") + (next_move ? "2" : "1") +
                          " data needs the " + (next_move ? "softmax2_regression" : "softmax3") +
                          " head");
  }
}

int argmax(const Vector& v) {
  Eigen::Index best = 0;
  v.maxCoeff(&best);
  return static_cast<int>(best);
}

std::string num(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

Evaluation evaluate(const ModelSpec& spec, const ModelParams& params, const LabeledDataset& data,
                    const TrainConfig& cfg, double horizon_scale) {
  if (data.size() == 0) throw ValidationError("cannot evaluate on an empty dataset");
  check_compatible(spec, data);
  const bool next_move = data.setting == Setting::kNextMove;
  Evaluation ev;
  ev.predictions.reserve(data.size());
  double loss_sum = 0.0;
  const std::size_t chunk = static_cast<std::size_t>(std::max(cfg.batch_size, 1));
  std::vector<Matrix> inputs;
  for (std::size_t begin = 0; begin < data.size(); begin += chunk) {
    const std::size_t end = std::min(data.size(), begin + chunk);
    inputs.clear();
    for (std::size_t i = begin; i < end; ++i) inputs.push_back(data.samples[i].values());
    const auto fwd = model_forward(spec, params, inputs, BnMode::kEval, cfg.threads);
    for (std::size_t i = begin; i < end; ++i) {
      const Prediction& p = fwd.predictions[i - begin];
      ev.predictions.push_back(argmax(p.probs));
      if (next_move) {
        ev.horizons.push_back(p.horizon * horizon_scale);
        loss_sum += loss_setting2(p.probs, data.labels[i], p.horizon,
                                  data.horizons[i] / horizon_scale, cfg.regression_weight)
                        .loss;
      } else {
        loss_sum += loss_setting1(p.probs, data.labels[i]).loss;
      }
    }
  }
  ev.loss = loss_sum / static_cast<double>(data.size());
  ev.report = classification_report(ev.predictions, data.labels, data.classes());
  if (next_move) ev.rmse = rmse(ev.horizons, data.horizons);
  return ev;
}

TrainResult train(const ModelSpec& spec, const LabeledDataset& train_set,
                  const LabeledDataset* test_set, const TrainConfig& cfg) {
  cfg.validate();
  spec.validate();
  train_set.validate();
  if (train_set.size() == 0) throw ValidationError("training set is empty");
  check_compatible(spec, train_set);
  if (test_set) check_compatible(spec, *test_set);

  const bool next_move = train_set.setting == Setting::kNextMove;
  const bool batch_norm = spec.normalizer == NormalizerKind::kBatchNorm;

  TrainResult result;
  result.params = ModelParams::initial(spec, cfg.seed);
  fit_normalizer(spec, result.params, train_set.samples);
  if (next_move && cfg.standardize_horizon) {
    const double mean = std::accumulate(train_set.horizons.begin(), train_set.horizons.end(), 0.0) /
                        static_cast<double>(train_set.size());
    result.horizon_scale = mean > 0.0 ? mean : 1.0;
  }
  result.optimizer = adam_init(result.params);

  ModelParams params = result.params;
  AdamState state = result.optimizer;
  std::mt19937_64 shuffle_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  std::vector<Matrix> inputs;
  std::vector<HeadUpstream> upstream;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    const double lr = lr_at(cfg, epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t loss_batches = 0;
    try {
      for (std::size_t begin = 0; begin < order.size(); begin += batch) {
        const std::size_t end = std::min(order.size(), begin + batch);
        // A single leftover sample carries no batch statistics.
        if (batch_norm && end - begin < 2) continue;
        inputs.clear();
        for (std::size_t k = begin; k < end; ++k) inputs.push_back(train_set.samples[order[k]].values());
        const auto fwd = model_forward(spec, params, inputs, BnMode::kTrain, cfg.threads);

        const double n = static_cast<double>(end - begin);
        upstream.assign(end - begin, {});
        double batch_loss = 0.0;
        for (std::size_t k = begin; k < end; ++k) {
          const std::size_t idx = order[k];
          const Prediction& p = fwd.predictions[k - begin];
          HeadUpstream& up = upstream[k - begin];
          if (next_move) {
            const auto l = loss_setting2(p.probs, train_set.labels[idx], p.horizon,
                                         train_set.horizons[idx] / result.horizon_scale,
                                         cfg.regression_weight);
            batch_loss += l.loss;
            up.logits = l.dlogits / n;
            up.horizon = l.dhorizon / n;
          } else {
            const auto l = loss_setting1(p.probs, train_set.labels[idx]);
            batch_loss += l.loss;
            up.logits = l.dlogits / n;
          }
        }
        batch_loss /= n;
        if (!std::isfinite(batch_loss)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch));
        }
        ModelParams grads = zeros_like(params);
        model_backward(spec, params, fwd, upstream, grads, cfg.threads);
        adam_step(params, grads, state, lr, cfg);
        commit_batch_statistics(params, fwd);
        loss_sum += batch_loss;
        ++loss_batches;
        ++result.optimizer_steps;
      }
    } catch (const DivergenceError& e) {
      result.diverged = true;
      result.diagnostic = e.what();
      return result;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    rec.train_loss = loss_batches > 0 ? loss_sum / static_cast<double>(loss_batches) : 0.0;
    const Evaluation tr = evaluate(spec, params, train_set, cfg, result.horizon_scale);
    rec.train_accuracy = tr.report.accuracy;
    rec.train_f1 = tr.report.f1;
    rec.train_rmse = tr.rmse;
    if (test_set && test_set->size() > 0) {
      const Evaluation te = evaluate(spec, params, *test_set, cfg, result.horizon_scale);
      rec.test_accuracy = te.report.accuracy;
      rec.test_f1 = te.report.f1;
      rec.test_rmse = te.rmse;
    }
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    result.history.epochs.push_back(rec);

    result.params = params;
    result.optimizer = state;
  }
  return result;
}

std::string history_csv(const TrainHistory& history, const std::string& config_hash) {
  std::ostringstream out;
  out << "# binorm-history v1 config=" << (config_hash.empty() ? "-" : config_hash) << "\n";
  out << "epoch,learning_rate,train_loss,train_accuracy,train_f1,train_rmse,test_accuracy,"
         "test_f1,test_rmse\n";
  for (const auto& e : history.epochs) {
    out << e.epoch << ',' << num(e.learning_rate) << ',' << num(e.train_loss) << ','
        << num(e.train_accuracy) << ',' << num(e.train_f1) << ',' << opt(e.train_rmse) << ','
        << opt(e.test_accuracy) << ',' << opt(e.test_f1) << ',' << opt(e.test_rmse) << '\n';
  }
  return out.str();
}

}  // namespace binorm
