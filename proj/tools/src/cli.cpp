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

#include "binorm/cli/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "binorm/errors.hpp"
#include "commands.hpp"

namespace binorm::cli {
namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return parse_run_config("{}");
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot read config file " + path);
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"binorm: bilinear input normalization for limit order book models", "binorm"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_dir, "override the output directory");
  app.add_option("--threads", threads, "worker threads (results are deterministic only at 1)")
      ->check(CLI::Range(1, 1024));

  auto* prepare = app.add_subcommand("prepare", "label and split limit order book files");
  auto* train = app.add_subcommand("train", "train models and write checkpoints");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on a prepared dataset");
  std::string checkpoint;
  std::string split = "test";
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval->add_option("--split", split, "dataset split to score")
      ->check(CLI::IsMember({"train", "test"}));
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  bool perturb = false;
  gradcheck->add_flag("--perturb-analytic", perturb,
                      "corrupt analytic gradients to confirm failures are detected");
  auto* synth = app.add_subcommand("synth", "generate synthetic regime-shift datasets");
  auto* compare = app.add_subcommand("compare", "train one model per normalizer and tabulate");

  // CLI11 expects argv order reversed when handed a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (out_dir) cfg.output_dir = *out_dir;
    if (threads) cfg.threads = *threads;
    cfg.train.seed = cfg.seed;
    cfg.train.threads = cfg.threads;
    const Context ctx{cfg, config_hash(cfg), cfg.output_dir, out, err};

    if (*prepare) return cmd_prepare(ctx);
    if (*train) return cmd_train(ctx);
    if (*eval) return cmd_eval(ctx, checkpoint, split == "train" ? Split::kTrain : Split::kTest);
    if (*gradcheck) return cmd_gradcheck(ctx, perturb);
    if (*synth) return cmd_synth(ctx);
    if (*compare) return cmd_compare(ctx);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ShapeError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace binorm::cli
