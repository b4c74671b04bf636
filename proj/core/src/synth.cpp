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

#include "binorm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

constexpr double kMaxAmplitude = 1.5;
constexpr double kNoiseClip = 4.0;

}  // namespace

double synth_template(int label, Eigen::Index h, Eigen::Index steps) noexcept {
  if (steps < 2 || label == 2) return 0.0;
  const double ramp = -1.0 + 2.0 * static_cast<double>(h) / static_cast<double>(steps - 1);
  return label == 0 ? ramp : -ramp;
}

SynthData synth_regime_data(const SynthConfig& cfg) {
  if (cfg.regimes < 1 || cfg.samples_per_regime < 1 || cfg.features < 1 || cfg.steps < 1) {
    throw ValidationError("synthetic data needs positive regime, sample, feature and step counts");
  }
  if (!(cfg.min_scale > 0.0 && cfg.max_scale >= cfg.min_scale) || cfg.noise < 0.0) {
    throw ValidationError("synthetic scales must satisfy 0 < min_scale <= max_scale, noise >= 0");
  }
  // Largest excursion of a sample around its regime offset.
  const double margin = cfg.max_scale * (kMaxAmplitude + kNoiseClip * cfg.noise);
  if (2.0 * margin >= cfg.spacing) {
    throw ValidationError("regime spacing " + std::to_string(cfg.spacing) +
                          " is too small for the configured scale and noise");
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, 2);

  const Eigen::Index d = cfg.features;
  const Eigen::Index h = cfg.steps;
  Vector amplitude(d);
  for (Eigen::Index j = 0; j < d; ++j) amplitude(j) = 0.5 + unit(rng);

  const auto total_samples = static_cast<Eigen::Index>(cfg.regimes) * cfg.samples_per_regime;
  SynthData out;
  out.stream.events.resize(total_samples * h, d);
  std::vector<int> days(static_cast<std::size_t>(total_samples * h));
  out.labels.reserve(static_cast<std::size_t>(total_samples));
  out.regime.reserve(static_cast<std::size_t>(total_samples));

  const double log_lo = std::log(cfg.min_scale);
  const double log_hi = std::log(cfg.max_scale);
  Eigen::Index row = 0;
  for (int r = 0; r < cfg.regimes; ++r) {
    Vector offset(d);
    Vector scale(d);
    const double lo = r * cfg.spacing + margin;
    const double hi = (r + 1) * cfg.spacing - margin;
    for (Eigen::Index j = 0; j < d; ++j) {
      offset(j) = lo + (hi - lo) * unit(rng);
      scale(j) = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
    }
    for (int s = 0; s < cfg.samples_per_regime; ++s) {
      const int label = pick(rng);
      out.labels.push_back(label);
      out.regime.push_back(r);
      for (Eigen::Index step = 0; step < h; ++step, ++row) {
        days[static_cast<std::size_t>(row)] = r;
        const double base = synth_template(label, step, h);
        for (Eigen::Index j = 0; j < d; ++j) {
          const double z = std::clamp(gauss(rng), -kNoiseClip, kNoiseClip);
          out.stream.events(row, j) = offset(j) + scale(j) * (amplitude(j) * base + cfg.noise * z);
        }
      }
    }
  }
  out.stream.days = std::move(days);
  return out;
}

DatasetPair synth_dataset(const SynthData& data, Eigen::Index steps, std::size_t train_count) {
  const std::size_t total = data.labels.size();
  if (steps < 1 || data.stream.length() != static_cast<Eigen::Index>(total) * steps) {
    throw ShapeError("synthetic stream length does not match labels x steps");
  }
  if (train_count == 0 || train_count >= total) {
    throw ValidationError("train count " + std::to_string(train_count) + " must lie in [1, " +
                          std::to_string(total) + ")");
  }
  DatasetPair out;
  for (LabeledDataset* d : {&out.train, &out.test}) {
    d->setting = Setting::kFixedHorizon;
    d->features = data.stream.features();
    d->steps = steps;
  }
  out.train.split = Split::kTrain;
  out.test.split = Split::kTest;
  for (std::size_t i = 0; i < total; ++i) {
    LabeledDataset& target = i < train_count ? out.train : out.test;
    const auto first = static_cast<Eigen::Index>(i) * steps;
    target.samples.emplace_back(data.stream.events.middleRows(first, steps).transpose());
    target.labels.push_back(data.labels[i]);
    target.first_event.push_back(first);
    target.last_event.push_back(first + steps - 1);
  }
  return out;
}

}  // namespace binorm
