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
#include <nlohmann/json.hpp>
#include <random>

#include "binorm/errors.hpp"
#include "binorm/metrics.hpp"

namespace binorm {
namespace {

TEST(Classification, AllPredictionsOneClass) {
  const std::vector<int> labels{0, 0, 1, 1, 2, 2};
  const std::vector<int> preds(6, 0);
  const auto r = classification_report(preds, labels, 3);
  EXPECT_NEAR(r.accuracy, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.precision, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(r.recall, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(r.f1, (2.0 * (1.0 / 3.0) / (4.0 / 3.0)) / 3.0, 1e-15);
  EXPECT_EQ(r.confusion.at(2, 0), 2);
  EXPECT_EQ(r.confusion.total(), 6);
  EXPECT_EQ(r.confusion.trace(), 2);
}

TEST(Classification, TotalMissGivesZeroF1) {
  const std::vector<int> labels{0, 1, 0, 1};
  const std::vector<int> preds{1, 0, 1, 0};
  const auto r = classification_report(preds, labels, 2);
  EXPECT_EQ(r.accuracy, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(Classification, PerfectPrediction) {
  const std::vector<int> labels{2, 0, 1, 1};
  const auto r = classification_report(labels, labels, 3);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(r.recall, 1.0);
  EXPECT_EQ(r.f1, 1.0);
}

TEST(Classification, MacroAveragesMatchDefinition) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 2);
  std::vector<int> labels;
  std::vector<int> preds;
  for (int i = 0; i < 500; ++i) {
    labels.push_back(pick(rng));
    preds.push_back(pick(rng));
  }
  const auto r = classification_report(preds, labels, 3);
  double p = 0.0;
  double rec = 0.0;
  double f1 = 0.0;
  for (int c = 0; c < 3; ++c) {
    double tp = 0;
    double fp = 0;
    double fn = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      tp += preds[i] == c && labels[i] == c;
      fp += preds[i] == c && labels[i] != c;
      fn += preds[i] != c && labels[i] == c;
    }
    const double pc = tp / (tp + fp);
    const double rc = tp / (tp + fn);
    p += pc / 3;
    rec += rc / 3;
    f1 += 2 * pc * rc / (pc + rc) / 3;
  }
  EXPECT_NEAR(r.precision, p, 1e-14);
  EXPECT_NEAR(r.recall, rec, 1e-14);
  EXPECT_NEAR(r.f1, f1, 1e-14);
  for (double v : {r.accuracy, r.precision, r.recall, r.f1}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Classification, Errors) {
  EXPECT_THROW(classification_report(std::vector<int>{0}, std::vector<int>{0, 1}, 2), ValidationError);
  EXPECT_THROW(classification_report(std::vector<int>{3}, std::vector<int>{0}, 3), ValidationError);
}

TEST(Rmse, Examples) {
  EXPECT_EQ(rmse(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2, 3}), 0.0);
  EXPECT_NEAR(rmse(std::vector<double>{0, 0}, std::vector<double>{3, 4}), std::sqrt(12.5), 1e-15);
  EXPECT_NEAR(rmse(std::vector<double>{4}, std::vector<double>{1}), 3.0, 1e-15);
  EXPECT_THROW(rmse(std::vector<double>{1}, std::vector<double>{}), ValidationError);
}

TEST(EvalReport, Serializations) {
  EvalReport rep;
  rep.setting = 2;
  rep.split = "test";
  rep.samples = 4;
  rep.classification = classification_report(std::vector<int>{0, 1, 1, 0}, std::vector<int>{0, 1, 0, 0}, 2);
  rep.rmse = 1.5;
  rep.config_hash = "0badf00d";
  const std::string kv = to_key_value(rep);
  EXPECT_NE(kv.find("accuracy=0.75"), std::string::npos);
  EXPECT_NE(kv.find("rmse=1.5"), std::string::npos);
  const auto j = nlohmann::json::parse(to_json(rep));
  EXPECT_EQ(j.at("schema"), "binorm-report/1");
  EXPECT_EQ(j.at("split"), "test");
  EXPECT_DOUBLE_EQ(j.at("accuracy").get<double>(), 0.75);
  EXPECT_DOUBLE_EQ(j.at("rmse").get<double>(), 1.5);
  EXPECT_EQ(j.at("confusion").size(), 2u);
  rep.rmse.reset();
  EXPECT_EQ(to_key_value(rep).find("rmse="), std::string::npos);
}

}  // namespace
}  // namespace binorm
