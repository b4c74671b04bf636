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
#include <optional>
#include <string>
#include <vector>

#include "binorm/dataset.hpp"
#include "binorm/gradcheck.hpp"
#include "binorm/labeling.hpp"
#include "binorm/lob.hpp"
#include "binorm/model.hpp"
#include "binorm/optimizer.hpp"
#include "binorm/synth.hpp"
#include "binorm/table_io.hpp"

namespace binorm::cli {

struct DatasetPaths {
  std::optional<std::string> train;  // default: <output_dir>/train.dataset
  std::optional<std::string> test;   // default: <output_dir>/test.dataset
};

struct PrepareConfig {
  std::vector<std::string> inputs;
  TableLayout layout;
  PriceColumns prices;
  LabelConfig label;
  Eigen::Index window = 10;
  Setting setting = Setting::kFixedHorizon;
  SplitConfig split;
};

struct SynthSection {
  SynthConfig data;
  std::size_t train_count = 2000;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string output_dir = "binorm-out";
  int runs = 1;
  DatasetPaths dataset;
  PrepareConfig prepare;
  SynthSection synth;
  ModelSpec model = ModelSpec::c_shape(NormalizerKind::kBin, HeadKind::kSoftmax3);
  TrainConfig train;
  std::vector<NormalizerKind> compare = {NormalizerKind::kNone, NormalizerKind::kZScore,
                                         NormalizerKind::kBin};
  GradcheckOptions gradcheck;

  [[nodiscard]] std::filesystem::path train_path() const;
  [[nodiscard]] std::filesystem::path test_path() const;
};

// Strict parse: unknown keys and mistyped values raise ValidationError.
RunConfig parse_run_config(const std::string& text);

// Canonical JSON of every resolved field except output_dir and threads, which
// do not affect numeric results.
std::string canonical_json(const RunConfig& cfg);

std::string config_hash(const RunConfig& cfg);

}  // namespace binorm::cli
