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

#include "binorm/table_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <system_error>

#include "binorm/errors.hpp"

namespace binorm {
namespace {

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  if (delimiter == ' ') {
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      if (i == line.size()) break;
      const std::size_t start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
      out.push_back(line.substr(start, i - start));
    }
    return out;
  }
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw ParseError(row, col, "non-numeric cell '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) {
    throw ParseError(row, col, "non-finite cell '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace

SampleStream load_table(const std::filesystem::path& path, const TableLayout& layout) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split_fields(line, layout.delimiter);
    if (rows.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw ShapeError(path.string() + ": line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(width));
    }
    std::vector<double> values(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      values[c] = parse_cell(fields[c], line_no, c + 1);
    }
    rows.push_back(std::move(values));
  }
  if (f.bad()) throw IoError("read error on " + path.string());
  if (rows.empty()) throw ValidationError(path.string() + " holds no data");

  Matrix raw(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < width; ++c)
      raw(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  if (layout.orientation == Orientation::kEventsAsColumns) raw.transposeInPlace();

  const Eigen::Index available = raw.cols();
  auto check_index = [&](int idx, const char* what) {
    if (idx < 0 || idx >= available) {
      throw ShapeError(std::string(what) + " index " + std::to_string(idx) + " outside the " +
                       std::to_string(available) + " columns of " + path.string());
    }
  };

  SampleStream stream;
  if (layout.feature_columns.empty()) {
    stream.events = raw;
  } else {
    stream.events.resize(raw.rows(), static_cast<Eigen::Index>(layout.feature_columns.size()));
    for (std::size_t j = 0; j < layout.feature_columns.size(); ++j) {
      check_index(layout.feature_columns[j], "feature column");
      stream.events.col(static_cast<Eigen::Index>(j)) = raw.col(layout.feature_columns[j]);
    }
  }
  if (layout.day_column) {
    check_index(*layout.day_column, "day column");
    std::vector<int> days(static_cast<std::size_t>(raw.rows()));
    for (Eigen::Index t = 0; t < raw.rows(); ++t) {
      days[static_cast<std::size_t>(t)] = static_cast<int>(raw(t, *layout.day_column));
    }
    stream.days = std::move(days);
  }
  if (layout.timestamp_column) {
    check_index(*layout.timestamp_column, "timestamp column");
    std::vector<double> ts(static_cast<std::size_t>(raw.rows()));
    for (Eigen::Index t = 0; t < raw.rows(); ++t) {
      ts[static_cast<std::size_t>(t)] = raw(t, *layout.timestamp_column);
    }
    stream.timestamps = std::move(ts);
  }
  validate_stream(stream);
  return stream;
}

}  // namespace binorm
