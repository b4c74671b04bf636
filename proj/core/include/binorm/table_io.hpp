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
#include <optional>
#include <vector>

#include "binorm/series.hpp"

namespace binorm {

enum class Orientation { kEventsAsRows, kEventsAsColumns };

/// How a delimited numeric file maps onto an event stream. Column indices are
/// 0-based positions along the feature axis of the file (columns when events
/// are rows, rows when events are columns).
struct TableLayout {
  char delimiter = ',';  // ',', '\t' or ' ' (runs of whitespace)
  Orientation orientation = Orientation::kEventsAsRows;
  std::vector<int> feature_columns;  // empty: every column
  std::optional<int> day_column;
  std::optional<int> timestamp_column;
};

/// Throws IoError, ParseError (1-based line/field of the offending cell) or
/// ShapeError for ragged rows and out-of-range column indices.
SampleStream load_table(const std::filesystem::path& path, const TableLayout& layout);

}  // namespace binorm
