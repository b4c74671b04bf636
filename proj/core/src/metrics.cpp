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

#include "binorm/metrics.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::int64_t ConfusionMatrix::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const noexcept {
  std::int64_t t = 0;
  for (int k = 0; k < classes_; ++k) t += at(k, k);
  return t;
}

ClassificationReport classification_report(std::span<const int> predictions,
                                           std::span<const int> labels, int classes) {
  if (predictions.empty()) throw ValidationError("classification report on empty input");
  if (predictions.size() != labels.size()) {
    throw ValidationError("prediction and label counts differ");
  }
  if (classes < 1) throw ValidationError("class count must be positive");

  ClassificationReport r;
  r.confusion = ConfusionMatrix(classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes || predictions[i] < 0 ||
        predictions[i] >= classes) {
      throw ValidationError("class index outside [0, " + std::to_string(classes) + ")");
    }
    r.confusion.add(labels[i], predictions[i]);
  }

  const auto& cm = r.confusion;
  r.accuracy = static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  for (int k = 0; k < classes; ++k) {
    std::int64_t predicted = 0;
    std::int64_t actual = 0;
    for (int j = 0; j < classes; ++j) {
      predicted += cm.at(j, k);
      actual += cm.at(k, j);
    }
    const double tp = static_cast<double>(cm.at(k, k));
    const double precision = predicted > 0 ? tp / static_cast<double>(predicted) : 0.0;
    const double recall = actual > 0 ? tp / static_cast<double>(actual) : 0.0;
    const double f1 =
        precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    r.class_precision.push_back(precision);
    r.class_recall.push_back(recall);
    r.class_f1.push_back(f1);
  }
  const double k = static_cast<double>(classes);
  r.precision = std::accumulate(r.class_precision.begin(), r.class_precision.end(), 0.0) / k;
  r.recall = std::accumulate(r.class_recall.begin(), r.class_recall.end(), 0.0) / k;
  r.f1 = std::accumulate(r.class_f1.begin(), r.class_f1.end(), 0.0) / k;
  return r;
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw ValidationError("rmse on empty input");
  if (predictions.size() != targets.size()) {
    throw ValidationError("prediction and target counts differ");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - targets[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(predictions.size()));
}

std::string to_key_value(const EvalReport& report) {
  std::ostringstream out;
  out << "setting=" << report.setting << "\n";
  out << "split=" << report.split << "\n";
  out << "samples=" << report.samples << "\n";
  out << "accuracy=" << fmt(report.classification.accuracy) << "\n";
  out << "precision=" << fmt(report.classification.precision) << "\n";
  out << "recall=" << fmt(report.classification.recall) << "\n";
  out << "f1=" << fmt(report.classification.f1) << "\n";
  if (report.rmse) out << "rmse=" << fmt(*report.rmse) << "\n";
  out << "loss=" << fmt(report.loss) << "\n";
  out << "config=" << report.config_hash << "\n";
  return out.str();
}

std::string to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["schema"] = "binorm-report/1";
  j["setting"] = report.setting;
  j["split"] = report.split;
  j["samples"] = report.samples;
  j["accuracy"] = report.classification.accuracy;
  j["precision"] = report.classification.precision;
  j["recall"] = report.classification.recall;
  j["f1"] = report.classification.f1;
  j["rmse"] = report.rmse ? nlohmann::ordered_json(*report.rmse) : nlohmann::ordered_json();
  j["loss"] = report.loss;
  j["class_precision"] = report.classification.class_precision;
  j["class_recall"] = report.classification.class_recall;
  j["class_f1"] = report.classification.class_f1;
  const auto& cm = report.classification.confusion;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int t = 0; t < cm.classes(); ++t) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  j["confusion"] = rows;
  j["config"] = report.config_hash;
  return j.dump(2) + "\n";
}

}  // namespace binorm
