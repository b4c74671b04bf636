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

#include "binorm/cli/run_config.hpp"

#include <limits>
#include <nlohmann/json.hpp>
#include <set>

#include "binorm/checkpoint.hpp"
#include "binorm/errors.hpp"

namespace binorm::cli {
namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + " must be an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : j_.items()) {
      if (!allowed.contains(key)) throw ValidationError("unknown key '" + key + "' in " + where());
    }
  }

  [[nodiscard]] bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  [[nodiscard]] const json& at(const char* key) const { return j_.at(key); }
  [[nodiscard]] std::string child(const char* key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  template <typename T>
  void integer(const char* key, T& out, long long lo,
               long long hi = std::numeric_limits<long long>::max()) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) throw ValidationError(child(key) + " must be an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi) {
      throw ValidationError(child(key) + " must be in [" + std::to_string(lo) + ", " +
                            std::to_string(hi) + "]");
    }
    out = static_cast<T>(x);
  }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) throw ValidationError(child(key) + " must be a number");
    out = v.get<double>();
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) throw ValidationError(child(key) + " must be true or false");
    out = v.get<bool>();
  }

  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) throw ValidationError(child(key) + " must be a string");
    out = v.get<std::string>();
  }

  [[nodiscard]] std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& j_;
  std::string path_;
};

std::uint64_t parse_seed(const json& v) {
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
    throw ValidationError("seed must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void parse_layout(const Section& s, TableLayout& layout) {
  s.allow({"delimiter", "orientation", "feature_columns", "day_column", "timestamp_column"});
  if (s.has("delimiter")) {
    std::string d;
    s.string("delimiter", d);
    if (d == ",") {
      layout.delimiter = ',';
    } else if (d == "\t" || d == "tab") {
      layout.delimiter = '\t';
    } else if (d == " " || d == "whitespace") {
      layout.delimiter = ' ';
    } else {
      throw ValidationError(s.child("delimiter") + " must be \",\", \"tab\" or \"whitespace\"");
    }
  }
  if (s.has("orientation")) {
    std::string o;
    s.string("orientation", o);
    if (o == "rows") {
      layout.orientation = Orientation::kEventsAsRows;
    } else if (o == "columns") {
      layout.orientation = Orientation::kEventsAsColumns;
    } else {
      throw ValidationError(s.child("orientation") + " must be \"rows\" or \"columns\"");
    }
  }
  if (s.has("feature_columns")) {
    const json& f = s.at("feature_columns");
    if (!f.is_array()) throw ValidationError(s.child("feature_columns") + " must be an array");
    layout.feature_columns.clear();
    for (const auto& c : f) {
      if (!c.is_number_integer() || c.get<long long>() < 0) {
        throw ValidationError(s.child("feature_columns") + " entries must be non-negative integers");
      }
      layout.feature_columns.push_back(c.get<int>());
    }
  }
  if (s.has("day_column")) {
    int c = 0;
    s.integer("day_column", c, 0);
    layout.day_column = c;
  }
  if (s.has("timestamp_column")) {
    int c = 0;
    s.integer("timestamp_column", c, 0);
    layout.timestamp_column = c;
  }
}

void parse_label(const Section& s, LabelConfig& label) {
  s.allow({"horizon", "threshold", "smoothing", "max_horizon", "rule"});
  s.integer("horizon", label.horizon, 1);
  s.number("threshold", label.threshold);
  s.integer("smoothing", label.smoothing, 1);
  s.integer("max_horizon", label.max_horizon, 1);
  if (s.has("rule")) {
    std::string r;
    s.string("rule", r);
    if (r == "current_price") {
      label.rule = LabelRule::kCurrentPrice;
    } else if (r == "past_mean") {
      label.rule = LabelRule::kPastMean;
    } else {
      throw ValidationError(s.child("rule") + " must be \"current_price\" or \"past_mean\"");
    }
  }
  label.validate();
}

void parse_prepare(const Section& s, PrepareConfig& p) {
  s.allow({"inputs", "layout", "price_columns", "label", "window", "setting", "split"});
  if (s.has("inputs")) {
    const json& in = s.at("inputs");
    if (!in.is_array()) throw ValidationError(s.child("inputs") + " must be an array of paths");
    p.inputs.clear();
    for (const auto& path : in) {
      if (!path.is_string()) throw ValidationError(s.child("inputs") + " entries must be strings");
      p.inputs.push_back(path.get<std::string>());
    }
  }
  if (s.has("layout")) parse_layout(Section(s.at("layout"), s.child("layout")), p.layout);
  if (s.has("price_columns")) {
    const Section pc(s.at("price_columns"), s.child("price_columns"));
    pc.allow({"best_ask", "best_bid", "tick_factor"});
    pc.integer("best_ask", p.prices.best_ask, 0);
    pc.integer("best_bid", p.prices.best_bid, 0);
    if (pc.has("tick_factor")) {
      double t = 0.0;
      pc.number("tick_factor", t);
      if (!(t > 0.0)) throw ValidationError(pc.child("tick_factor") + " must be positive");
      p.prices.tick_factor = t;
    }
  }
  if (s.has("label")) parse_label(Section(s.at("label"), s.child("label")), p.label);
  s.integer("window", p.window, 1);
  if (s.has("setting")) {
    int setting = 1;
    s.integer("setting", setting, 1, 2);
    p.setting = static_cast<Setting>(setting);
  }
  if (s.has("split")) {
    const Section sp(s.at("split"), s.child("split"));
    sp.allow({"train_days", "train_fraction"});
    sp.integer("train_days", p.split.train_days, 1);
    sp.number("train_fraction", p.split.train_fraction);
    if (!(p.split.train_fraction > 0.0 && p.split.train_fraction < 1.0)) {
      throw ValidationError(sp.child("train_fraction") + " must be in (0, 1)");
    }
  }
}

void parse_synth(const Section& s, SynthSection& out) {
  s.allow({"regimes", "samples_per_regime", "features", "steps", "noise", "spacing", "min_scale",
           "max_scale", "train_count"});
  SynthConfig& c = out.data;
  s.integer("regimes", c.regimes, 1);
  s.integer("samples_per_regime", c.samples_per_regime, 1);
  s.integer("features", c.features, 1);
  s.integer("steps", c.steps, 2);
  s.number("noise", c.noise);
  s.number("spacing", c.spacing);
  s.number("min_scale", c.min_scale);
  s.number("max_scale", c.max_scale);
  s.integer("train_count", out.train_count, 1);
  if (c.noise < 0.0) throw ValidationError("synth.noise must be non-negative");
  if (!(c.min_scale > 0.0 && c.max_scale >= c.min_scale)) {
    throw ValidationError("synth scales need 0 < min_scale <= max_scale");
  }
  const auto total = static_cast<std::size_t>(c.regimes) * static_cast<std::size_t>(c.samples_per_regime);
  if (out.train_count >= total) {
    throw ValidationError("synth.train_count must leave at least one test sample");
  }
}

void parse_train(const Section& s, TrainConfig& t) {
  s.allow({"epochs", "learning_rate", "drops", "weight_decay", "max_norm", "batch_size", "beta1",
           "beta2", "adam_epsilon", "regression_weight", "standardize_horizon",
           "decay_normalizer", "lr_multipliers"});
  s.integer("epochs", t.epochs, 1);
  s.number("learning_rate", t.learning_rate);
  if (s.has("drops")) {
    const json& d = s.at("drops");
    if (!d.is_array()) throw ValidationError("train.drops must be an array of [epoch, factor]");
    t.drops.clear();
    for (const auto& e : d) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number()) {
        throw ValidationError("train.drops entries must be [epoch, factor]");
      }
      t.drops.push_back({e[0].get<int>(), e[1].get<double>()});
    }
  }
  s.number("weight_decay", t.weight_decay);
  s.number("max_norm", t.max_norm);
  s.integer("batch_size", t.batch_size, 1);
  s.number("beta1", t.beta1);
  s.number("beta2", t.beta2);
  s.number("adam_epsilon", t.adam_epsilon);
  s.number("regression_weight", t.regression_weight);
  s.boolean("standardize_horizon", t.standardize_horizon);
  s.boolean("decay_normalizer", t.decay_normalizer);
  if (s.has("lr_multipliers")) {
    const json& m = s.at("lr_multipliers");
    if (!m.is_object()) throw ValidationError("train.lr_multipliers must be an object");
    t.lr_multipliers.clear();
    for (const auto& [name, v] : m.items()) {
      if (!v.is_number()) throw ValidationError("train.lr_multipliers values must be numbers");
      t.lr_multipliers[name] = v.get<double>();
    }
  }
}

void parse_gradcheck(const Section& s, GradcheckOptions& g) {
  s.allow({"instances", "step", "layer_tolerance", "end_to_end_tolerance", "seed"});
  s.integer("instances", g.instances, 1);
  s.number("step", g.step);
  s.number("layer_tolerance", g.layer_tolerance);
  s.number("end_to_end_tolerance", g.end_to_end_tolerance);
  if (s.has("seed")) g.seed = parse_seed(s.at("seed"));
  if (!(g.step > 0.0)) throw ValidationError("gradcheck.step must be positive");
}

json layout_json(const TableLayout& l) {
  json j;
  j["delimiter"] = l.delimiter == ',' ? "," : l.delimiter == '\t' ? "tab" : "whitespace";
  j["orientation"] = l.orientation == Orientation::kEventsAsRows ? "rows" : "columns";
  j["feature_columns"] = l.feature_columns;
  j["day_column"] = l.day_column ? json(*l.day_column) : json(nullptr);
  j["timestamp_column"] = l.timestamp_column ? json(*l.timestamp_column) : json(nullptr);
  return j;
}

}  // namespace

std::filesystem::path RunConfig::train_path() const {
  return dataset.train ? std::filesystem::path(*dataset.train)
                       : std::filesystem::path(output_dir) / "train.dataset";
}

std::filesystem::path RunConfig::test_path() const {
  return dataset.test ? std::filesystem::path(*dataset.test)
                      : std::filesystem::path(output_dir) / "test.dataset";
}

RunConfig parse_run_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") + e.what());
  }
  const Section s(root, "");
  s.allow({"seed", "threads", "output_dir", "runs", "dataset", "prepare", "synth", "model", "train",
           "compare", "gradcheck"});

  RunConfig cfg;
  try {
    if (s.has("seed")) cfg.seed = parse_seed(s.at("seed"));
    s.integer("threads", cfg.threads, 1, 1024);
    s.string("output_dir", cfg.output_dir);
    s.integer("runs", cfg.runs, 1, 1000);
    if (s.has("dataset")) {
      const Section d(s.at("dataset"), "dataset");
      d.allow({"train", "test"});
      std::string path;
      if (d.has("train")) {
        d.string("train", path);
        cfg.dataset.train = path;
      }
      if (d.has("test")) {
        d.string("test", path);
        cfg.dataset.test = path;
      }
    }
    if (s.has("prepare")) parse_prepare(Section(s.at("prepare"), "prepare"), cfg.prepare);
    if (s.has("synth")) parse_synth(Section(s.at("synth"), "synth"), cfg.synth);
    if (s.has("model")) cfg.model = spec_from_json(s.at("model").dump());
    if (s.has("train")) parse_train(Section(s.at("train"), "train"), cfg.train);
    if (s.has("compare")) {
      const Section c(s.at("compare"), "compare");
      c.allow({"normalizers"});
      if (c.has("normalizers")) {
        const json& n = c.at("normalizers");
        if (!n.is_array() || n.empty()) {
          throw ValidationError("compare.normalizers must be a non-empty array");
        }
        cfg.compare.clear();
        for (const auto& name : n) {
          if (!name.is_string()) throw ValidationError("compare.normalizers entries must be strings");
          cfg.compare.push_back(parse_normalizer(name.get<std::string>()));
        }
      }
    }
    if (s.has("gradcheck")) parse_gradcheck(Section(s.at("gradcheck"), "gradcheck"), cfg.gradcheck);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  cfg.train.seed = cfg.seed;
  cfg.train.threads = cfg.threads;
  cfg.train.validate();
  return cfg;
}

std::string canonical_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["runs"] = cfg.runs;
  j["dataset"]["train"] = cfg.dataset.train ? json(*cfg.dataset.train) : json(nullptr);
  j["dataset"]["test"] = cfg.dataset.test ? json(*cfg.dataset.test) : json(nullptr);

  const PrepareConfig& p = cfg.prepare;
  j["prepare"]["inputs"] = p.inputs;
  j["prepare"]["layout"] = layout_json(p.layout);
  j["prepare"]["price_columns"]["best_ask"] = p.prices.best_ask;
  j["prepare"]["price_columns"]["best_bid"] = p.prices.best_bid;
  j["prepare"]["price_columns"]["tick_factor"] =
      p.prices.tick_factor ? json(*p.prices.tick_factor) : json(nullptr);
  j["prepare"]["label"]["horizon"] = p.label.horizon;
  j["prepare"]["label"]["threshold"] = p.label.threshold;
  j["prepare"]["label"]["smoothing"] = p.label.smoothing;
  j["prepare"]["label"]["max_horizon"] = p.label.max_horizon;
  j["prepare"]["label"]["rule"] =
      p.label.rule == LabelRule::kCurrentPrice ? "current_price" : "past_mean";
  j["prepare"]["window"] = p.window;
  j["prepare"]["setting"] = static_cast<int>(p.setting);
  j["prepare"]["split"]["train_days"] = p.split.train_days;
  j["prepare"]["split"]["train_fraction"] = p.split.train_fraction;

  const SynthConfig& sc = cfg.synth.data;
  j["synth"] = {{"regimes", sc.regimes},
                {"samples_per_regime", sc.samples_per_regime},
                {"features", sc.features},
                {"steps", sc.steps},
                {"noise", sc.noise},
                {"spacing", sc.spacing},
                {"min_scale", sc.min_scale},
                {"max_scale", sc.max_scale},
                {"train_count", cfg.synth.train_count}};

  j["model"] = json::parse(spec_to_json(cfg.model));

  const TrainConfig& t = cfg.train;
  json drops = json::array();
  for (const auto& d : t.drops) drops.push_back({d.epoch, d.factor});
  j["train"] = {{"epochs", t.epochs},
                {"learning_rate", t.learning_rate},
                {"drops", drops},
                {"weight_decay", t.weight_decay},
                {"max_norm", t.max_norm},
                {"batch_size", t.batch_size},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"adam_epsilon", t.adam_epsilon},
                {"regression_weight", t.regression_weight},
                {"standardize_horizon", t.standardize_horizon},
                {"decay_normalizer", t.decay_normalizer},
                {"lr_multipliers", t.lr_multipliers}};

  json norms = json::array();
  for (auto n : cfg.compare) norms.push_back(to_string(n));
  j["compare"]["normalizers"] = norms;

  const GradcheckOptions& g = cfg.gradcheck;
  j["gradcheck"] = {{"instances", g.instances},
                    {"step", g.step},
                    {"layer_tolerance", g.layer_tolerance},
                    {"end_to_end_tolerance", g.end_to_end_tolerance},
                    {"seed", g.seed}};
  return j.dump();
}

std::string config_hash(const RunConfig& cfg) { return crc32_hex(canonical_json(cfg)); }

}  // namespace binorm::cli
