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
#include <vector>

#include "binorm/dataset.hpp"
#include "binorm/series.hpp"

namespace binorm {

/// Regime-shift generator. Every sample follows one of three temporal
/// templates (rising, falling, flat) with per-feature amplitudes shared across
/// regimes; each regime then applies its own per-feature offset and scale.
/// Offsets of regime r lie in [r * spacing + margin, (r + 1) * spacing - margin]
/// where margin bounds a sample's largest excursion (max_scale * (1.5 + 4 *
/// noise), noise being truncated at 4 sigma), so raw value ranges of different
/// regimes never overlap.
struct SynthConfig {
  std::uint64_t seed = 42;
  int regimes = 4;
  int samples_per_regime = 750;
  Eigen::Index features = 40;
  Eigen::Index steps = 10;
  double noise = 0.5;        // std of the additive noise, truncated at 4 sigma
  double spacing = 100.0;
  double min_scale = 0.25;   // regime scales are log-uniform in [min, max]
  double max_scale = 4.0;
};

struct SynthData {
  SampleStream stream;        // samples laid end to end, days = regime index
  std::vector<int> labels;    // one per H-event segment
  std::vector<int> regime;    // regime of each segment
};

SynthData synth_regime_data(const SynthConfig& cfg);

/// Cuts the stream into its H-event segments; the first `train_count` go to
/// train and the rest to test.
DatasetPair synth_dataset(const SynthData& data, Eigen::Index steps, std::size_t train_count);

/// Template value of class `label` at step h (of H): rising ramp, falling ramp
/// or zero.
double synth_template(int label, Eigen::Index h, Eigen::Index steps) noexcept;

}  // namespace binorm
