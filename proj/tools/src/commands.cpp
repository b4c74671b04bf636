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

#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "binorm/checkpoint.hpp"
#include "binorm/cli/cli.hpp"
#include "binorm/errors.hpp"
#include "binorm/metrics.hpp"
#include "binorm/trainer.hpp"

namespace binorm::cli {
namespace {

namespace fs = std::filesystem;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write to " + path.string() + " failed");
}

nlohmann::ordered_json split_summary(const LabeledDataset& d) {
  nlohmann::ordered_json j;
  j["samples"] = d.size();
  j["class_counts"] = d.class_counts();
  if (!d.first_event.empty()) {
    j["first_event"] = *std::min_element(d.first_event.begin(), d.first_event.end());
    j["last_event"] = *std::max_element(d.last_event.begin(), d.last_event.end());
  }
  return j;
}

std::string manifest(const Context& ctx, const DatasetPair& pair, const std::string& source) {
  nlohmann::ordered_json j;
  j["schema"] = "binorm-manifest/1";
  j["config"] = ctx.hash;
  j["source"] = source;
  j["setting"] = static_cast<int>(pair.train.setting);
  j["features"] = pair.train.features;
  j["steps"] = pair.train.steps;
  j["train"] = split_summary(pair.train);
  j["test"] = split_summary(pair.test);
  if (!pair.train.last_event.empty() && !pair.test.first_event.empty()) {
    j["split_boundary"] = *std::min_element(pair.test.first_event.begin(),
                                            pair.test.first_event.end());
  }
  return j.dump(2) + "\n";
}

void write_pair(const Context& ctx, const DatasetPair& pair, const std::string& source) {
  const fs::path train = ctx.config.train_path();
  const fs::path test = ctx.config.test_path();
  fs::create_directories(ctx.out_dir);
  for (const auto& p : {train, test}) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
  }
  write_dataset(train, pair.train, ctx.hash);
  write_dataset(test, pair.test, ctx.hash);
  write_text(ctx.out_dir / "manifest.json", manifest(ctx, pair, source));
  ctx.out << "train: " << pair.train.size() << " samples -> " << train.string() << '\n'
          << "test: " << pair.test.size() << " samples -> " << test.string() << '\n';
  const auto counts = pair.train.class_counts();
  ctx.out << "train class counts:";
  for (auto c : counts) ctx.out << ' ' << c;
  ctx.out << '\n';
}

SampleStream load_inputs(const PrepareConfig& p) {
  std::vector<SampleStream> parts;
  for (const auto& path : p.inputs) {
    try {
      parts.push_back(load_table(path, p.layout));
    } catch (const ParseError& e) {
      throw ValidationError(path + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  Eigen::Index rows = 0;
  for (const auto& s : parts) {
    if (s.features() != parts.front().features()) {
      throw ValidationError("input files disagree on the number of feature columns");
    }
    rows += s.length();
  }
  SampleStream out;
  out.events.resize(rows, parts.front().features());
  const bool all_days = std::all_of(parts.begin(), parts.end(), [](const auto& s) { return s.days.has_value(); });
  const bool all_ts = std::all_of(parts.begin(), parts.end(), [](const auto& s) { return s.timestamps.has_value(); });
  // Without a day column each input file counts as one trading day.
  std::vector<int> days;
  std::vector<double> stamps;
  Eigen::Index at = 0;
  int day_offset = 0;
  for (std::size_t f = 0; f < parts.size(); ++f) {
    const auto& s = parts[f];
    out.events.middleRows(at, s.length()) = s.events;
    at += s.length();
    if (all_days) {
      int last = day_offset;
      for (int d : *s.days) {
        days.push_back(d + day_offset);
        last = std::max(last, d + day_offset);
      }
      day_offset = last + 1;
    } else if (parts.size() > 1) {
      days.insert(days.end(), static_cast<std::size_t>(s.length()), static_cast<int>(f));
    }
    if (all_ts) stamps.insert(stamps.end(), s.timestamps->begin(), s.timestamps->end());
  }
  if (!days.empty()) out.days = std::move(days);
  if (all_ts) out.timestamps = std::move(stamps);
  validate_stream(out);
  return out;
}

void check_compatible(const ModelSpec& spec, const LabeledDataset& data, const std::string& what) {
  if (spec.in_features != data.features || spec.in_steps != data.steps) {
    throw ValidationError(what + " holds " + std::to_string(data.features) + "x" +
                          std::to_string(data.steps) + " samples but the model expects " +
                          std::to_string(spec.in_features) + "x" + std::to_string(spec.in_steps));
  }
  const bool setting1 = data.setting == Setting::kFixedHorizon;
  if (setting1 != (spec.head == HeadKind::kSoftmax3)) {
    throw ValidationError(what + " is a setting-" + std::to_string(static_cast<int>(data.setting)) +
                          " dataset but the model head is " + to_string(spec.head));
  }
}

struct Datasets {
  LabeledDataset train;
  std::optional<LabeledDataset> test;
};

Datasets load_datasets(const Context& ctx, const ModelSpec& spec) {
  const fs::path train_path = ctx.config.train_path();
  if (!fs::exists(train_path)) {
    throw ValidationError("training dataset " + train_path.string() +
                          " does not exist; run prepare or synth first");
  }
  Datasets d;
  d.train = read_dataset(train_path).data;
  check_compatible(spec, d.train, train_path.string());
  const fs::path test_path = ctx.config.test_path();
  if (fs::exists(test_path)) {
    d.test = read_dataset(test_path).data;
    check_compatible(spec, *d.test, test_path.string());
  }
  return d;
}

struct RunOutcome {
  std::uint64_t seed = 0;
  Evaluation eval;
  bool diverged = false;
  std::string diagnostic;
};

const std::vector<std::string> kMetricNames = {"accuracy", "precision", "recall", "f1"};

std::vector<double> metric_values(const Evaluation& e) {
  std::vector<double> v = {e.report.accuracy, e.report.precision, e.report.recall, e.report.f1};
  if (e.rmse) v.push_back(*e.rmse);
  return v;
}

// Trains `runs` models with consecutive seeds; writes per-run artifacts under `dir`.
std::vector<RunOutcome> train_runs(const Context& ctx, const ModelSpec& spec, const Datasets& data,
                                   const fs::path& dir) {
  std::vector<RunOutcome> outcomes;
  const LabeledDataset& scored = data.test ? *data.test : data.train;
  for (int r = 0; r < ctx.config.runs; ++r) {
    TrainConfig cfg = ctx.config.train;
    cfg.seed = ctx.config.seed + static_cast<std::uint64_t>(r);
    const TrainResult result = train(spec, data.train, data.test ? &*data.test : nullptr, cfg);

    const fs::path run_dir = dir / ("run" + std::to_string(r));
    fs::create_directories(run_dir);
    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.params = result.params;
    ckpt.optimizer = result.optimizer;
    ckpt.epoch = static_cast<int>(result.history.epochs.size());
    ckpt.horizon_scale = result.horizon_scale;
    ckpt.partial = result.diverged;
    ckpt.config_hash = ctx.hash;
    save_checkpoint(run_dir / "checkpoint.bin", ckpt);
    write_text(run_dir / "history.csv", history_csv(result.history, ctx.hash));

    RunOutcome o;
    o.seed = cfg.seed;
    o.diverged = result.diverged;
    o.diagnostic = result.diagnostic;
    if (result.diverged) {
      write_text(run_dir / "PARTIAL",
                 "# binorm-partial v1 config=" + ctx.hash + "\n" + result.diagnostic + "\n");
      outcomes.push_back(std::move(o));
      break;
    }
    o.eval = evaluate(spec, result.params, scored, cfg, result.horizon_scale);
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

std::string summary_text(const Context& ctx, const std::vector<RunOutcome>& runs,
                         const std::string& scored_split) {
  std::ostringstream s;
  s << "# binorm-summary v1 config=" << ctx.hash << '\n';
  s << "split=" << scored_split << '\n';
  s << "runs=" << runs.size() << '\n';
  s << "seeds=";
  for (std::size_t i = 0; i < runs.size(); ++i) s << (i ? "," : "") << runs[i].seed;
  s << '\n';
  std::vector<std::string> names = kMetricNames;
  if (runs.front().eval.rmse) names.push_back("rmse");
  s << "metric,median";
  for (std::size_t i = 0; i < runs.size(); ++i) s << ",run" << i;
  s << '\n';
  for (std::size_t m = 0; m < names.size(); ++m) {
    std::vector<double> values;
    for (const auto& r : runs) values.push_back(metric_values(r.eval)[m]);
    s << names[m] << ',' << fixed(median(values));
    for (double v : values) s << ',' << fixed(v);
    s << '\n';
  }
  return s.str();
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int cmd_prepare(const Context& ctx) {
  const PrepareConfig& p = ctx.config.prepare;
  if (p.inputs.empty()) throw ValidationError("prepare.inputs must list at least one file");
  for (const auto& path : p.inputs) {
    if (!fs::is_regular_file(path)) throw ValidationError("input file " + path + " does not exist");
  }
  const Setting setting = p.setting;
  const bool head3 = ctx.config.model.head == HeadKind::kSoftmax3;
  if ((setting == Setting::kFixedHorizon) != head3) {
    ctx.err << "note: model head " << to_string(ctx.config.model.head)
            << " does not match setting " << static_cast<int>(setting) << '\n';
  }
  const SampleStream stream = load_inputs(p);
  const std::vector<double> mids = mid_prices(stream, p.prices);
  const DatasetPair pair = build_dataset(stream, mids, p.label, p.window, setting, p.split);
  std::string source;
  for (const auto& in : p.inputs) source += (source.empty() ? "" : ",") + in;
  write_pair(ctx, pair, source);
  return kExitOk;
}

int cmd_synth(const Context& ctx) {
  SynthConfig sc = ctx.config.synth.data;
  sc.seed = ctx.config.seed;
  const SynthData data = synth_regime_data(sc);
  const DatasetPair pair = synth_dataset(data, sc.steps, ctx.config.synth.train_count);
  write_pair(ctx, pair, "synth");
  return kExitOk;
}

int cmd_train(const Context& ctx) {
  const ModelSpec& spec = ctx.config.model;
  const Datasets data = load_datasets(ctx, spec);
  fs::create_directories(ctx.out_dir);
  const auto runs = train_runs(ctx, spec, data, ctx.out_dir);
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].diverged) {
      ctx.err << "run " << i << " (seed " << runs[i].seed << ") diverged: " << runs[i].diagnostic
              << "\npartial artifacts written to " << (ctx.out_dir / ("run" + std::to_string(i))).string()
              << '\n';
      return kExitRuntime;
    }
  }
  const std::string text = summary_text(ctx, runs, data.test ? "test" : "train");
  write_text(ctx.out_dir / "summary.csv", text);
  ctx.out << text;
  return kExitOk;
}

int cmd_eval(const Context& ctx, const fs::path& checkpoint, Split split) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  const fs::path path = split == Split::kTrain ? ctx.config.train_path() : ctx.config.test_path();
  if (!fs::exists(path)) throw ValidationError("dataset " + path.string() + " does not exist");
  const LabeledDataset data = read_dataset(path).data;
  check_compatible(ckpt.spec, data, path.string());
  TrainConfig cfg = ctx.config.train;
  const Evaluation e = evaluate(ckpt.spec, ckpt.params, data, cfg, ckpt.horizon_scale);

  EvalReport report;
  report.setting = static_cast<int>(data.setting);
  report.split = to_string(split);
  report.samples = static_cast<std::int64_t>(data.size());
  report.classification = e.report;
  report.rmse = e.rmse;
  report.loss = e.loss;
  report.config_hash = ctx.hash;
  fs::create_directories(ctx.out_dir);
  const std::string kv = to_key_value(report);
  write_text(ctx.out_dir / ("report-" + report.split + ".txt"), kv);
  write_text(ctx.out_dir / ("report-" + report.split + ".json"), to_json(report));
  ctx.out << kv;
  if (ckpt.partial) ctx.err << "warning: checkpoint is flagged partial (training diverged)\n";
  return kExitOk;
}

int cmd_gradcheck(const Context& ctx, bool perturb_analytic) {
  GradcheckOptions opt = ctx.config.gradcheck;
  opt.perturb_analytic = perturb_analytic;
  const GradcheckReport report = run_gradcheck(opt);
  const std::string text = "# binorm-gradcheck v1 config=" + ctx.hash + "\n" + report.to_text();
  fs::create_directories(ctx.out_dir);
  write_text(ctx.out_dir / "gradcheck.tsv", text);
  ctx.out << text;
  return report.passed() ? kExitOk : kExitRuntime;
}

int cmd_compare(const Context& ctx) {
  struct Row {
    NormalizerKind norm;
    std::vector<double> medians;
  };
  std::vector<Row> rows;
  std::vector<std::uint64_t> seeds;
  bool has_rmse = false;
  std::string scored = "train";

  std::vector<std::pair<ModelSpec, Datasets>> jobs;
  for (NormalizerKind norm : ctx.config.compare) {
    ModelSpec spec = ctx.config.model;
    spec.normalizer = norm;
    spec.validate();
    jobs.emplace_back(spec, load_datasets(ctx, spec));
  }
  fs::create_directories(ctx.out_dir);
  for (const auto& [spec, data] : jobs) {
    const auto runs = train_runs(ctx, spec, data, ctx.out_dir / to_string(spec.normalizer));
    if (runs.back().diverged) {
      ctx.err << to_string(spec.normalizer) << " diverged: " << runs.back().diagnostic << '\n';
      return kExitRuntime;
    }
    scored = data.test ? "test" : "train";
    seeds.clear();
    for (const auto& r : runs) seeds.push_back(r.seed);
    Row row{spec.normalizer, {}};
    const std::size_t metrics = metric_values(runs.front().eval).size();
    has_rmse = metrics > kMetricNames.size();
    for (std::size_t m = 0; m < metrics; ++m) {
      std::vector<double> v;
      for (const auto& r : runs) v.push_back(metric_values(r.eval)[m]);
      row.medians.push_back(median(v));
    }
    rows.push_back(std::move(row));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].medians[3] > rows[best].medians[3]) best = i;
  }
  std::ostringstream s;
  s << "# binorm-compare v1 config=" << ctx.hash << '\n';
  s << "normalizer\taccuracy\tprecision\trecall\tf1" << (has_rmse ? "\trmse" : "") << "\tbest_f1\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    s << to_string(rows[i].norm);
    for (double v : rows[i].medians) s << '\t' << fixed(v, 4);
    s << '\t' << (i == best ? "*" : "") << '\n';
  }
  s << "# split=" << scored << " runs=" << ctx.config.runs << " seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) s << (i ? "," : "") << seeds[i];
  s << " (identical for every row)\n";
  write_text(ctx.out_dir / "compare.tsv", s.str());
  ctx.out << s.str();
  return kExitOk;
}

}  // namespace binorm::cli
