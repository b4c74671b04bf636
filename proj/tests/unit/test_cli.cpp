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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include "binorm/checkpoint.hpp"
#include "binorm/cli/cli.hpp"
#include "binorm/cli/run_config.hpp"
#include "binorm/errors.hpp"
#include "commands.hpp"

namespace binorm::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("binorm-cli-") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  fs::path write_config(const std::string& name, const std::string& json) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << json;
    return p;
  }

  // Small synthetic run: 6 features x 5 steps, two regimes.
  static std::string synth_config(int runs, int epochs) {
    return R"({
      "synth": {"regimes": 2, "samples_per_regime": 40, "features": 6, "steps": 5,
                "spacing": 100, "train_count": 50},
      "model": {"preset": "B", "input": [6, 5], "normalizer": "bin"},
      "train": {"epochs": )" + std::to_string(epochs) + R"(, "batch_size": 16},
      "runs": )" + std::to_string(runs) + "}";
  }

  fs::path write_book(const std::string& name, int events, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.02);
    std::uniform_real_distribution<double> vol(1.0, 500.0);
    const fs::path p = dir_ / name;
    std::ofstream f(p);
    f.precision(10);
    double mid = 100.0;
    for (int t = 0; t < events; ++t) {
      mid = std::round((mid + g(rng)) * 100.0) / 100.0;
      f << mid + 0.01 << ',' << vol(rng) << ',' << mid - 0.01 << ',' << vol(rng) << '\n';
    }
    return p;
  }

  fs::path dir_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(invoke({}).code, kExitValidation);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitValidation);
  EXPECT_EQ(invoke({"train", "--bogus"}).code, kExitValidation);
  EXPECT_EQ(invoke({"eval"}).code, kExitValidation);
  EXPECT_EQ(invoke({"--threads", "0", "synth"}).code, kExitValidation);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
}

TEST_F(CliTest, UnknownConfigKeyExitsTwo) {
  const auto cfg = write_config("c.json", R"({"train": {"epochs": 2, "learning_rte": 0.1}})");
  const auto r = invoke({"--config", cfg.string(), "--out", (dir_ / "o").string(), "synth"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("learning_rte"), std::string::npos);
  EXPECT_EQ(invoke({"--config", (dir_ / "missing.json").string(), "synth"}).code, kExitValidation);
}

TEST_F(CliTest, TrainWritesHistoryAndSummary) {
  const auto cfg = write_config("c.json", synth_config(5, 5));
  const std::string out = (dir_ / "o").string();
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "--seed", "3", "synth"}).code, kExitOk);
  const auto r = invoke({"--config", cfg.string(), "--out", out, "--seed", "3", "train"});
  ASSERT_EQ(r.code, kExitOk) << r.err;

  const auto hist = lines(slurp(fs::path(out) / "run0" / "history.csv"));
  ASSERT_EQ(hist.size(), 2u + 5u);
  EXPECT_EQ(hist[0].rfind("# binorm-history v1 config=", 0), 0u);

  const std::string summary = slurp(fs::path(out) / "summary.csv");
  EXPECT_EQ(summary, r.out);
  const auto rows = lines(summary);
  EXPECT_EQ(rows[1], "split=test");
  EXPECT_EQ(rows[2], "runs=5");
  EXPECT_EQ(rows[3], "seeds=3,4,5,6,7");
  // Median column is the middle of the five run values.
  std::istringstream acc(rows[5]);
  std::string name;
  std::getline(acc, name, ',');
  EXPECT_EQ(name, "accuracy");
  std::vector<double> v;
  for (std::string cell; std::getline(acc, cell, ',');) v.push_back(std::stod(cell));
  ASSERT_EQ(v.size(), 6u);
  std::vector<double> runs(v.begin() + 1, v.end());
  std::sort(runs.begin(), runs.end());
  EXPECT_DOUBLE_EQ(v[0], runs[2]);
  for (int r = 0; r < 5; ++r) EXPECT_TRUE(fs::exists(fs::path(out) / ("run" + std::to_string(r)) / "checkpoint.bin"));
}

TEST_F(CliTest, RepeatedTrainingIsByteIdentical) {
  const auto cfg = write_config("c.json", synth_config(1, 3));
  std::vector<std::string> artifacts;
  for (const char* sub : {"a", "b"}) {
    const std::string out = (dir_ / sub).string();
    ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "synth"}).code, kExitOk);
    ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "train"}).code, kExitOk);
    artifacts.push_back(slurp(fs::path(out) / "run0" / "checkpoint.bin") +
                        slurp(fs::path(out) / "run0" / "history.csv") + slurp(fs::path(out) / "summary.csv"));
  }
  EXPECT_EQ(artifacts[0], artifacts[1]);
}

TEST_F(CliTest, EvalReproducesFinalHistoryRow) {
  const auto cfg = write_config("c.json", synth_config(1, 4));
  const std::string out = (dir_ / "o").string();
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "synth"}).code, kExitOk);
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "train"}).code, kExitOk);
  const auto r = invoke({"--config", cfg.string(), "--out", out, "eval", "--checkpoint",
                         (fs::path(out) / "run0" / "checkpoint.bin").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto hist = lines(slurp(fs::path(out) / "run0" / "history.csv"));
  std::vector<std::string> cells;
  std::istringstream row(hist.back());
  for (std::string c; std::getline(row, c, ',');) cells.push_back(c);
  // test_accuracy and test_f1 columns.
  EXPECT_NE(r.out.find("accuracy=" + cells[6] + "\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("f1=" + cells[7] + "\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(fs::path(out) / "report-test.json"));
}

TEST_F(CliTest, CorruptedCheckpointFails) {
  const auto cfg = write_config("c.json", synth_config(1, 1));
  const std::string out = (dir_ / "o").string();
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "synth"}).code, kExitOk);
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "train"}).code, kExitOk);
  const fs::path ck = fs::path(out) / "run0" / "checkpoint.bin";
  std::string bytes = slurp(ck);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 1);
  std::ofstream(ck, std::ios::binary) << bytes;
  const auto r = invoke({"--config", cfg.string(), "--out", out, "eval", "--checkpoint", ck.string()});
  EXPECT_NE(r.code, kExitOk);
  EXPECT_NE(r.err.find("CRC"), std::string::npos);
}

TEST_F(CliTest, CompareMarksExactlyOneBest) {
  const auto cfg = write_config("c.json", synth_config(1, 2));
  const std::string out = (dir_ / "o").string();
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "synth"}).code, kExitOk);
  const auto r = invoke({"--config", cfg.string(), "--out", out, "compare"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto rows = lines(slurp(fs::path(out) / "compare.tsv"));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[2].rfind("none\t", 0), 0u);
  EXPECT_EQ(rows[3].rfind("zscore\t", 0), 0u);
  EXPECT_EQ(rows[4].rfind("bin\t", 0), 0u);
  int stars = 0;
  for (std::size_t i = 2; i < 5; ++i) stars += rows[i].back() == '*';
  EXPECT_EQ(stars, 1);
}

TEST_F(CliTest, PrepareIsByteStableAndSupportsNextMove) {
  const auto book = write_book("book.csv", 400, 1);
  const std::string cfg_text = R"({
    "prepare": {"inputs": [")" + book.string() + R"("],
                "label": {"threshold": 0.0002, "max_horizon": 100}, "setting": 2,
                "price_columns": {"tick_factor": 100}},
    "model": {"preset": "B", "input": [4, 10], "normalizer": "bin", "head": "softmax2_regression"},
    "train": {"epochs": 2, "batch_size": 32}
  })";
  const auto cfg = write_config("c.json", cfg_text);
  std::vector<std::string> outputs;
  for (const char* sub : {"a", "b"}) {
    const std::string out = (dir_ / sub).string();
    const auto r = invoke({"--config", cfg.string(), "--out", out, "prepare"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    outputs.push_back(slurp(fs::path(out) / "train.dataset") + slurp(fs::path(out) / "test.dataset"));
  }
  EXPECT_EQ(outputs[0], outputs[1]);
  const std::string out = (dir_ / "a").string();
  ASSERT_EQ(invoke({"--config", cfg.string(), "--out", out, "train"}).code, kExitOk);
  const auto r = invoke({"--config", cfg.string(), "--out", out, "eval", "--checkpoint",
                         (fs::path(out) / "run0" / "checkpoint.bin").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("setting=2\n"), std::string::npos);
  EXPECT_NE(r.out.find("rmse="), std::string::npos);
}

TEST_F(CliTest, PrepareRejectsUnusableInputs) {
  const auto book = write_book("short.csv", 30, 2);
  const auto cfg = write_config("c.json", R"({"prepare": {"inputs": [")" + book.string() +
                                              R"("], "label": {"horizon": 1000}}})");
  EXPECT_EQ(invoke({"--config", cfg.string(), "--out", (dir_ / "o").string(), "prepare"}).code,
            kExitValidation);
  EXPECT_EQ(invoke({"--out", (dir_ / "o").string(), "prepare"}).code, kExitValidation);
  std::ofstream(dir_ / "bad.csv") << "1,2,3,4\n1,2,x,4\n";
  const auto bad = write_config("bad.json", R"({"prepare": {"inputs": [")" + (dir_ / "bad.csv").string() + R"("]}})");
  const auto r = invoke({"--config", bad.string(), "--out", (dir_ / "o").string(), "prepare"});
  EXPECT_EQ(r.code, kExitValidation);
  EXPECT_NE(r.err.find("(2,3)"), std::string::npos) << r.err;
}

TEST_F(CliTest, GradcheckPerturbationFails) {
  const auto cfg = write_config("c.json", R"({"gradcheck": {"instances": 1}})");
  const auto r = invoke({"--config", cfg.string(), "--out", (dir_ / "o").string(), "gradcheck",
                         "--perturb-analytic"});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.out.find("gradcheck: FAIL"), std::string::npos);
}

TEST(RunConfig, HashIgnoresOutputAndThreads) {
  RunConfig a = parse_run_config("{}");
  RunConfig b = parse_run_config(R"({"output_dir": "elsewhere", "threads": 4})");
  EXPECT_EQ(config_hash(a), config_hash(b));
  RunConfig c = parse_run_config(R"({"seed": 1})");
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(config_hash(a).size(), 8u);
}

TEST(RunConfig, CanonicalFormRoundTrips) {
  const RunConfig a = parse_run_config(R"({"train": {"epochs": 7, "drops": [[3, 0.5]]},
                                            "compare": {"normalizers": ["bin", "dain"]}})");
  const RunConfig b = parse_run_config(canonical_json(a));
  EXPECT_EQ(canonical_json(a), canonical_json(b));
  EXPECT_EQ(b.train.epochs, 7);
  EXPECT_EQ(b.compare.size(), 2u);
}

TEST(RunConfig, Rejections) {
  EXPECT_THROW(parse_run_config("[1]"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"runs": 0})"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"train": {"epochs": "ten"}})"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"prepare": {"setting": 3}})"), ValidationError);
  EXPECT_THROW(parse_run_config(R"({"compare": {"normalizers": ["softmax"]}})"), ValidationError);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 3.0, 2.0}), 2.5);
  EXPECT_THROW(median({}), ValidationError);
}

}  // namespace
}  // namespace binorm::cli
