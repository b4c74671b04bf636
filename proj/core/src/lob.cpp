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

#include "binorm/lob.hpp"

#include <cmath>
#include <string>

#include "binorm/errors.hpp"

namespace binorm {

LobEvent LobEvent::from_interleaved(std::span<const double> row) {
  if (row.empty() || row.size() % 4 != 0) {
    throw ShapeError("order-book row needs 4 values per level, got " + std::to_string(row.size()));
  }
  LobEvent e;
  const std::size_t levels = row.size() / 4;
  for (std::size_t l = 0; l < levels; ++l) {
    e.ask_price.push_back(row[4 * l]);
    e.ask_volume.push_back(row[4 * l + 1]);
    e.bid_price.push_back(row[4 * l + 2]);
    e.bid_volume.push_back(row[4 * l + 3]);
  }
  return e;
}

void validate_event(const LobEvent& e) {
  const std::size_t levels = e.ask_price.size();
  if (e.ask_volume.size() != levels || e.bid_price.size() != levels ||
      e.bid_volume.size() != levels) {
    throw ValidationError("order-book sides have different level counts");
  }
  for (std::size_t l = 0; l < levels; ++l) {
    if (!(e.ask_price[l] > 0.0) || !(e.bid_price[l] > 0.0)) {
      throw ValidationError("non-positive price at level " + std::to_string(l + 1));
    }
    if (e.ask_volume[l] < 0.0 || e.bid_volume[l] < 0.0) {
      throw ValidationError("negative volume at level " + std::to_string(l + 1));
    }
    if (l > 0 && (e.ask_price[l] < e.ask_price[l - 1] || e.bid_price[l] > e.bid_price[l - 1])) {
      throw ValidationError("price ladder out of order at level " + std::to_string(l + 1));
    }
  }
  if (levels > 0 && e.ask_price[0] < e.bid_price[0]) {
    throw ValidationError("best ask is below best bid");
  }
}

double mid_price(const LobEvent& e) {
  if (e.ask_price.empty() || e.bid_price.empty()) {
    throw ValidationError("mid-price needs a level-1 bid and ask");
  }
  return (e.bid_price[0] + e.ask_price[0]) / 2.0;
}

double mid_price(const LobEvent& e, double tick_factor) {
  if (e.ask_price.empty() || e.bid_price.empty()) {
    throw ValidationError("mid-price needs a level-1 bid and ask");
  }
  if (!(tick_factor > 0.0)) {
    throw ValidationError("tick factor must be positive");
  }
  // Sum of integer ticks is exact; a single division rounds once.
  const double ticks = std::round(e.bid_price[0] * tick_factor) +
                       std::round(e.ask_price[0] * tick_factor);
  return ticks / (2.0 * tick_factor);
}

std::vector<double> mid_prices(const SampleStream& stream, const PriceColumns& columns) {
  if (columns.best_ask < 0 || columns.best_ask >= stream.features() || columns.best_bid < 0 ||
      columns.best_bid >= stream.features()) {
    throw ShapeError("price columns fall outside the stream's " +
                     std::to_string(stream.features()) + " features");
  }
  std::vector<double> mids(static_cast<std::size_t>(stream.length()));
  for (Eigen::Index t = 0; t < stream.length(); ++t) {
    LobEvent e;
    e.ask_price = {stream.events(t, columns.best_ask)};
    e.bid_price = {stream.events(t, columns.best_bid)};
    mids[static_cast<std::size_t>(t)] =
        columns.tick_factor ? mid_price(e, *columns.tick_factor) : mid_price(e);
  }
  return mids;
}

}  // namespace binorm
