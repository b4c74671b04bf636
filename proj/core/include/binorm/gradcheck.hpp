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
#include <string>
#include <vector>

namespace binorm {

struct GradcheckOptions {
  int instances = 100;
  double step = 1e-5;
  double layer_tolerance = 1e-5;
  double end_to_end_tolerance = 1e-4;
  std::uint64_t seed = 7;
  /// Negative control: adds a small offset to every analytic gradient.
  bool perturb_analytic = false;
};

struct GradcheckRow {
  std::string component;
  std::string tensor;
  double worst_relative_error = 0.0;
  double tolerance = 0.0;
  int instances = 0;
  bool passed = false;
};

struct GradcheckReport {
  std::vector<GradcheckRow> rows;

  [[nodiscard]] bool passed() const noexcept;
  [[nodiscard]] std::string to_text() const;
};

/// Relative error used throughout: max|a - n| / max(max|a|, max|n|, 1e-6).
double relative_error(const std::vector<double>& analytic, const std::vector<double>& numeric);

/// Central differences against every analytic backward pass: BiN, DAIN,
/// BN-input, bilinear, TABL, both heads, both losses, and the full model for
/// every normalizer and head. One row per (component, tensor).
GradcheckReport run_gradcheck(const GradcheckOptions& options);

}  // namespace binorm
