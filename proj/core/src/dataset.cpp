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

#include "binorm/dataset.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view token, std::size_t line, std::size_t field) {
  double v = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, field, "not a number: '" + std::string(token) + "'");
  }
  return v;
}

std::string header_value(const std::string& header, const std::string& key) {
  std::istringstream in(header);
  std::string token;
  while (in >> token) {
    if (token.rfind(key + "=", 0) == 0) return token.substr(key.size() + 1);
  }
  throw ParseError(1, 0, "dataset header is missing '" + key + "'");
}

}  // namespace

const char* to_string(Split split) noexcept {
  return split == Split::kTrain ? "train" : "test";
}

std::vector<std::int64_t> LabeledDataset::class_counts() const {
  std::vector<std::int64_t> counts(static_cast<std::size_t>(classes()), 0);
  for (int l : labels) {
    if (l >= 0 && l < classes()) ++counts[static_cast<std::size_t>(l)];
  }
  return counts;
}

void LabeledDataset::validate() const {
  const auto n = samples.size();
  if (labels.size() != n || first_event.size() != n || last_event.size() != n) {
    throw ValidationError("dataset columns have inconsistent lengths");
  }
  if (setting == Setting::kNextMove && horizons.size() != n) {
    throw ValidationError("next-move dataset needs one horizon per sample");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (samples[i].features() != features || samples[i].steps() != steps) {
      throw ShapeError("sample " + std::to_string(i) + " is not " + std::to_string(features) +
                       "x" + std::to_string(steps));
    }
    if (labels[i] < 0 || labels[i] >= classes()) {
      throw ValidationError("sample " + std::to_string(i) + " has label " +
                            std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(classes()) + ")");
    }
  }
}

DatasetPair build_dataset(const SampleStream& stream, std::span<const double> mids,
                          const LabelConfig& cfg, Eigen::Index window, Setting setting,
                          const SplitConfig& split) {
  cfg.validate();
  validate_stream(stream);
  if (window < 1) throw ValidationError("window length must be positive");
  const Eigen::Index total = stream.length();
  if (static_cast<Eigen::Index>(mids.size()) != total) {
    throw ShapeError("mid-price series length does not match the stream");
  }
  const Eigen::Index lookahead = setting == Setting::kFixedHorizon ? cfg.horizon : 1;
  if (total < window + lookahead) {
    throw ValidationError("stream has " + std::to_string(total) + " events but window " +
                          std::to_string(window) + " plus label horizon " +
                          std::to_string(lookahead) + " needs at least " +
                          std::to_string(window + lookahead));
  }

  Eigen::Index boundary = 0;
  if (stream.days) {
    const auto& days = *stream.days;
    int distinct = 0;
    boundary = total;
    for (Eigen::Index t = 0; t < total; ++t) {
      const auto i = static_cast<std::size_t>(t);
      if (t > 0 && days[i] < days[i - 1]) {
        throw ValidationError("day markers must be non-decreasing");
      }
      if (t == 0 || days[i] != days[i - 1]) {
        if (++distinct == split.train_days + 1) {
          boundary = t;
          break;
        }
      }
    }
    if (boundary == total) {
      throw ValidationError("day-based split needs more than " + std::to_string(split.train_days) +
                            " distinct days");
    }
  } else {
    if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) {
      throw ValidationError("train_fraction must lie in (0, 1)");
    }
    boundary = static_cast<Eigen::Index>(split.train_fraction * static_cast<double>(total));
  }

  DatasetPair out;
  for (LabeledDataset* d : {&out.train, &out.test}) {
    d->setting = setting;
    d->features = stream.features();
    d->steps = window;
  }
  out.train.split = Split::kTrain;
  out.test.split = Split::kTest;

  for (Eigen::Index first = 0; first + window <= total; ++first) {
    const Eigen::Index last = first + window - 1;
    LabeledDataset* target = nullptr;
    if (last < boundary) {
      target = &out.train;
    } else if (first >= boundary) {
      target = &out.test;
    } else {
      continue;
    }
    int label = 0;
    double horizon = 0.0;
    if (setting == Setting::kFixedHorizon) {
      const auto m = label_movement(mids, static_cast<std::size_t>(last), cfg);
      if (!m) continue;
      label = static_cast<int>(*m);
    } else {
      const auto m = label_next_move(mids, static_cast<std::size_t>(last), cfg);
      if (!m) continue;
      label = static_cast<int>(m->direction);
      horizon = m->horizon;
      target->horizons.push_back(horizon);
    }
    target->samples.emplace_back(stream.events.middleRows(first, window).transpose());
    target->labels.push_back(label);
    target->first_event.push_back(first);
    target->last_event.push_back(last);
  }

  if (out.train.size() == 0 || out.test.size() == 0) {
    throw ValidationError("labeling left " + std::to_string(out.train.size()) + " train and " +
                          std::to_string(out.test.size()) + " test samples; both must be non-empty");
  }
  return out;
}

void write_dataset(const std::filesystem::path& path, const LabeledDataset& data,
                   const std::string& config_hash) {
  data.validate();
  std::string out;
  out += "binorm-dataset v1 features=" + std::to_string(data.features) +
         " steps=" + std::to_string(data.steps) +
         " setting=" + std::to_string(static_cast<int>(data.setting)) +
         " split=" + to_string(data.split) + " count=" + std::to_string(data.size()) +
         " config=" + (config_hash.empty() ? std::string("-") : config_hash) + "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    out += std::to_string(data.labels[i]);
    out += ' ';
    append_double(out, data.setting == Setting::kNextMove ? data.horizons[i] : 0.0);
    out += ' ' + std::to_string(data.first_event[i]) + ' ' + std::to_string(data.last_event[i]);
    const Matrix& v = data.samples[i].values();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      for (Eigen::Index c = 0; c < v.cols(); ++c) {
        out += ' ';
        append_double(out, v(r, c));
      }
    }
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write to " + path.string() + " failed");
}

LoadedDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset " + path.string());
  std::string header;
  if (!std::getline(f, header) || header.rfind("binorm-dataset v1 ", 0) != 0) {
    throw ParseError(1, 1, path.string() + " is not a binorm dataset file");
  }
  LoadedDataset out;
  LabeledDataset& d = out.data;
  d.features = std::stol(header_value(header, "features"));
  d.steps = std::stol(header_value(header, "steps"));
  const int setting = std::stoi(header_value(header, "setting"));
  if (setting != 1 && setting != 2) throw ParseError(1, 0, "setting must be 1 or 2");
  d.setting = static_cast<Setting>(setting);
  const std::string split = header_value(header, "split");
  d.split = split == "test" ? Split::kTest : Split::kTrain;
  const auto count = static_cast<std::size_t>(std::stoull(header_value(header, "count")));
  out.config_hash = header_value(header, "config");
  if (out.config_hash == "-") out.config_hash.clear();

  const std::size_t values = static_cast<std::size_t>(d.features * d.steps);
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (!rest.empty()) {
      const auto pos = rest.find(' ');
      fields.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (fields.size() != values + 4) {
      throw ParseError(line_no, fields.size(),
                       "expected " + std::to_string(values + 4) + " fields");
    }
    d.labels.push_back(static_cast<int>(parse_double(fields[0], line_no, 1)));
    const double horizon = parse_double(fields[1], line_no, 2);
    if (d.setting == Setting::kNextMove) d.horizons.push_back(horizon);
    d.first_event.push_back(static_cast<std::int64_t>(parse_double(fields[2], line_no, 3)));
    d.last_event.push_back(static_cast<std::int64_t>(parse_double(fields[3], line_no, 4)));
    Matrix m(d.features, d.steps);
    std::size_t k = 4;
    for (Eigen::Index r = 0; r < d.features; ++r) {
      for (Eigen::Index c = 0; c < d.steps; ++c, ++k) {
        m(r, c) = parse_double(fields[k], line_no, k + 1);
      }
    }
    d.samples.emplace_back(std::move(m));
  }
  if (d.size() != count) {
    throw ParseError(line_no, 0,
                     "header declares " + std::to_string(count) + " samples, file holds " +
                         std::to_string(d.size()));
  }
  d.validate();
  return out;
}

}  // namespace binorm
