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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "binorm/cli/run_config.hpp"

namespace binorm::cli {

struct Context {
  RunConfig config;
  std::string hash;
  std::filesystem::path out_dir;
  std::ostream& out;
  std::ostream& err;
};

int cmd_prepare(const Context& ctx);
int cmd_train(const Context& ctx);
int cmd_eval(const Context& ctx, const std::filesystem::path& checkpoint, Split split);
int cmd_gradcheck(const Context& ctx, bool perturb_analytic);
int cmd_synth(const Context& ctx);
int cmd_compare(const Context& ctx);

double median(std::vector<double> values);

}  // namespace binorm::cli
