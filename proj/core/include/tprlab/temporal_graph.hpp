// Copyright 2026 The tprlab Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "tprlab/common.hpp"

namespace tprlab {

inline constexpr int kDaysPerWeek = 7;
inline constexpr int kMinutesPerSlot = 5;
inline constexpr int kSlotsPerDay = 24 * 60 / kMinutesPerSlot;  // 288
inline constexpr int kTemporalNodes = kDaysPerWeek * kSlotsPerDay;  // 2016

/// A (day-of-week, 5-minute slot) pair. Monday is day 0.
struct TimeSlot {
  int day = 0;
  int slot = 0;

  int index() const { return day * kSlotsPerDay + slot; }
  static TimeSlot from_index(int index) { return {index / kSlotsPerDay, index % kSlotsPerDay}; }
  bool operator==(const TimeSlot&) const = default;
};

/// Slot boundaries are half-open: minute m belongs to slot m / 5.
TimeSlot departure_to_node(Timestamp ts);

/// Week-of-time-slots similarity graph. Undirected; node index = day*288 + slot.
///
/// Edges: consecutive slots within a day (no 287->0 wrap), the same slot on
/// consecutive days, and the same slot between Sunday and Monday.
class TemporalGraph {
 public:
  TemporalGraph();

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::int32_t>& neighbors(int node) const { return adjacency_.at(static_cast<std::size_t>(node)); }
  const std::vector<std::vector<std::int32_t>>& adjacency() const { return adjacency_; }

  /// One-hot slot vector (288) and one-hot day vector (7) of a node.
  std::pair<std::vector<double>, std::vector<double>> initial_repr(int node) const;

  bool connected() const;
  void write_edge_list(std::ostream& out) const;

 private:
  std::vector<std::vector<std::int32_t>> adjacency_;
  std::vector<std::pair<int, int>> edges_;
};

inline TemporalGraph build_temporal_graph() { return TemporalGraph(); }

}  // namespace tprlab
