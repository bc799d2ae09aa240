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

#include "tprlab/temporal_graph.hpp"

#include <algorithm>
#include <deque>
#include <ostream>

namespace tprlab {

TimeSlot departure_to_node(Timestamp ts) {
  return {day_of_week(ts), minute_of_day(ts) / kMinutesPerSlot};
}

TemporalGraph::TemporalGraph() : adjacency_(kTemporalNodes) {
  auto link = [this](TimeSlot a, TimeSlot b) {
    int u = a.index(), v = b.index();
    edges_.emplace_back(u, v);
    adjacency_[static_cast<std::size_t>(u)].push_back(v);
    adjacency_[static_cast<std::size_t>(v)].push_back(u);
  };
  for (int d = 0; d < kDaysPerWeek; ++d)
    for (int s = 0; s + 1 < kSlotsPerDay; ++s) link({d, s}, {d, s + 1});
  for (int d = 0; d + 1 < kDaysPerWeek; ++d)
    for (int s = 0; s < kSlotsPerDay; ++s) link({d, s}, {d + 1, s});
  for (int s = 0; s < kSlotsPerDay; ++s) link({kDaysPerWeek - 1, s}, {0, s});
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

std::pair<std::vector<double>, std::vector<double>> TemporalGraph::initial_repr(int node) const {
  TimeSlot t = TimeSlot::from_index(node);
  std::vector<double> slot(kSlotsPerDay, 0.0), day(kDaysPerWeek, 0.0);
  slot[static_cast<std::size_t>(t.slot)] = 1.0;
  day[static_cast<std::size_t>(t.day)] = 1.0;
  return {std::move(slot), std::move(day)};
}

bool TemporalGraph::connected() const {
  std::vector<bool> seen(node_count(), false);
  std::deque<int> frontier{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    int u = frontier.front();
    frontier.pop_front();
    for (int v : neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        frontier.push_back(v);
      }
    }
  }
  return reached == node_count();
}

void TemporalGraph::write_edge_list(std::ostream& out) const {
  out << "u,v\n";
  for (auto [u, v] : edges_) out << u << ',' << v << '\n';
}

}  // namespace tprlab
