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
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace binorm {

/// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes = 0)
      : classes_(classes), counts_(static_cast<std::size_t>(classes * classes), 0) {}

  void add(int truth, int predicted) { ++counts_[index(truth, predicted)]; }
  [[nodiscard]] std::int64_t at(int truth, int predicted) const {
    return counts_[index(truth, predicted)];
  }
  [[nodiscard]] int classes() const noexcept { return classes_; }
  [[nodiscard]] std::int64_t total() const noexcept;
  [[nodiscard]] std::int64_t trace() const noexcept;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  [[nodiscard]] std::size_t index(int truth, int predicted) const {
    return static_cast<std::size_t>(truth * classes_ + predicted);
  }

  int classes_;
  std::vector<std::int64_t> counts_;
};

struct ClassificationReport {
  double accuracy = 0.0;
  double precision = 0.0;  // macro
  double recall = 0.0;     // macro
  double f1 = 0.0;         // macro
  std::vector<double> class_precision;
  std::vector<double> class_recall;
  std::vector<double> class_f1;
  ConfusionMatrix confusion;
};

/// Macro averages over all K classes. A class whose precision or recall
/// denominator is zero scores 0 on that quantity and still counts in the mean.
/// Throws ValidationError on empty or mismatched input.
ClassificationReport classification_report(std::span<const int> predictions,
                                           std::span<const int> labels, int classes);

double rmse(std::span<const double> predictions, std::span<const double> targets);

/// What `eval` prints and writes.
struct EvalReport {
  int setting = 1;
  std::string split;
  std::int64_t samples = 0;
  ClassificationReport classification;
  std::optional<double> rmse;
  double loss = 0.0;
  std::string config_hash;
};

/// `key=value` lines, fixed key order.
std::string to_key_value(const EvalReport& report);

/// JSON object; schema documented in docs/file-formats.md.
std::string to_json(const EvalReport& report);

}  // namespace binorm
