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

#include <optional>
#include <string>
#include <vector>

#include "binorm/dataset.hpp"
#include "binorm/metrics.hpp"
#include "binorm/model.hpp"
#include "binorm/optimizer.hpp"

namespace binorm {

struct Evaluation {
  std::vector<int> predictions;
  std::vector<double> horizons;  // setting 2, in raw event counts
  double loss = 0.0;             // mean per-sample loss
  ClassificationReport report;
  std::optional<double> rmse;
};

/// Eval-mode pass over a whole dataset. `horizon_scale` converts the model's
/// regression output back to event counts.
Evaluation evaluate(const ModelSpec& spec, const ModelParams& params, const LabeledDataset& data,
                    const TrainConfig& cfg, double horizon_scale = 1.0);

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;  // mean mini-batch loss seen during the epoch
  double train_accuracy = 0.0;
  double train_f1 = 0.0;
  std::optional<double> train_rmse;
  std::optional<double> test_accuracy;
  std::optional<double> test_f1;
  std::optional<double> test_rmse;
  double wall_seconds = 0.0;  // not serialized; see write_history
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ModelParams params;
  AdamState optimizer;
  TrainHistory history;
  double horizon_scale = 1.0;
  int optimizer_steps = 0;
  bool diverged = false;
  std::string diagnostic;
};

/// Seeded shuffled mini-batch training. Train metrics per epoch are computed in
/// eval mode after the epoch's last step, so evaluating the returned params on
/// `train` reproduces the last history row. On divergence the result carries
/// the parameters of the last completed epoch and `diverged` is set.
TrainResult train(const ModelSpec& spec, const LabeledDataset& train_set,
                  const LabeledDataset* test_set, const TrainConfig& cfg);

/// CSV without wall-clock columns, so identical runs give identical files.
std::string history_csv(const TrainHistory& history, const std::string& config_hash);

}  // namespace binorm
