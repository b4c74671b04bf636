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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binorm/labeling.hpp"
#include "binorm/series.hpp"

namespace binorm {

enum class Setting { kFixedHorizon = 1, kNextMove = 2 };
enum class Split { kTrain, kTest };

const char* to_string(Split split) noexcept;

/// Windows with their targets. Setting 1 labels index Movement; setting 2
/// labels index Direction and `horizons` carries the event count to the move.
struct LabeledDataset {
  Setting setting = Setting::kFixedHorizon;
  Split split = Split::kTrain;
  Eigen::Index features = 0;
  Eigen::Index steps = 0;
  std::vector<TimeSeriesSample> samples;
  std::vector<int> labels;
  std::vector<double> horizons;
  std::vector<std::int64_t> first_event;
  std::vector<std::int64_t> last_event;

  [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
  [[nodiscard]] int classes() const noexcept { return setting == Setting::kFixedHorizon ? 3 : 2; }
  [[nodiscard]] std::vector<std::int64_t> class_counts() const;

  /// Throws ValidationError on inconsistent lengths or shapes.
  void validate() const;
};

struct SplitConfig {
  int train_days = 7;
  double train_fraction = 0.7;
};

struct DatasetPair {
  LabeledDataset train;
  LabeledDataset test;
};

/// Stride-1 windows labeled at each window's last event. When the stream has
/// day markers, windows ending in the first `train_days` distinct days go to
/// train and windows starting after them go to test; otherwise the boundary is
/// event floor(train_fraction * T). Windows straddling the boundary are dropped.
/// Throws ValidationError when either side ends up empty.
DatasetPair build_dataset(const SampleStream& stream, std::span<const double> mids,
                          const LabelConfig& cfg, Eigen::Index window, Setting setting,
                          const SplitConfig& split);

/// Writes the flat text format: one header line, one record per sample. Values
/// use shortest round-trip formatting, so read_dataset() restores them exactly.
void write_dataset(const std::filesystem::path& path, const LabeledDataset& data,
                   const std::string& config_hash);

struct LoadedDataset {
  LabeledDataset data;
  std::string config_hash;
};

LoadedDataset read_dataset(const std::filesystem::path& path);

}  // namespace binorm
