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

#include <optional>
#include <span>
#include <vector>

#include "binorm/series.hpp"

namespace binorm {

/// One order-book snapshot with L price levels per side. Level 0 is the best
/// quote on each side.
struct LobEvent {
  std::vector<double> ask_price;
  std::vector<double> ask_volume;
  std::vector<double> bid_price;
  std::vector<double> bid_volume;
  std::optional<double> timestamp;

  /// Reads 4L values ordered per level as (ask price, ask volume, bid price,
  /// bid volume), the FI-2010 column order.
  static LobEvent from_interleaved(std::span<const double> row);

  [[nodiscard]] std::size_t levels() const noexcept { return ask_price.size(); }
};

/// Checks positivity of prices, non-negative volumes, an uncrossed top of book
/// and monotone price ladders. Throws ValidationError.
void validate_event(const LobEvent& event);

/// (best bid + best ask) / 2. Throws ValidationError if level 1 is missing.
double mid_price(const LobEvent& event);

/// Mid-price on quotes first rounded to integer ticks (price * tick_factor), so
/// decimal quotes average without representation error.
double mid_price(const LobEvent& event, double tick_factor);

/// Feature columns holding the best ask and best bid inside a stream.
struct PriceColumns {
  Eigen::Index best_ask = 0;
  Eigen::Index best_bid = 2;
  std::optional<double> tick_factor;
};

std::vector<double> mid_prices(const SampleStream& stream, const PriceColumns& columns);

}  // namespace binorm
