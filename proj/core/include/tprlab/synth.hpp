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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tprlab/road_network.hpp"
#include "tprlab/weak_labels.hpp"

namespace tprlab {

struct SynthConfig {
  int grid_w = 6;
  int grid_h = 6;
  int n_paths = 2000;       // total temporal paths, a multiple of group_size
  int group_size = 5;       // trajectory path plus group_size-1 alternatives
  int od_pool = 120;        // distinct origin-destination pairs trajectories draw from
  double peak_slowdown = 2.0;
  double noise_sigma = 0.05;
  double min_edge_m = 200.0;
  double max_edge_m = 1200.0;
  int days = 28;            // departures fall in [start, start + days)
  std::string start = "2024-01-01T00:00:00";
  std::map<std::string, double> speed_base = {
      {"primary", 16.7}, {"secondary", 13.9}, {"tertiary", 11.1}, {"residential", 8.3}};
  std::uint64_t seed = 1;

  void validate() const;
};

/// One generated temporal path with its ground truth.
struct SynthSample {
  PathRecord record;
  double travel_time_s = 0.0;
  double rank_score = 0.0;  // edge-set Jaccard with the group's trajectory path
  std::int64_t group_id = 0;
  int chosen = 0;           // 1 for the trajectory path
};

struct SynthDataset {
  RoadNetwork network;
  std::vector<SynthSample> samples;
  TCITable tci;
};

/// Grid node name for column x, row y.
std::string grid_node_name(int x, int y);

/// 4-connected grid with both directions of every link sharing randomized
/// features and length.
RoadNetwork generate_network(const SynthConfig& cfg);

/// Free-flow speed of an edge in m/s.
double edge_speed(const Edge& edge, const SynthConfig& cfg);

/// Sum of length / speed, divided speeds when the departure is in a peak
/// window, scaled by noise_factor.
double travel_time(const RoadNetwork& network, const Path& path, Timestamp departure, const SynthConfig& cfg,
                   double noise_factor = 1.0);

/// Up to k loopless shortest paths by length, shortest first. Empty when the
/// target is unreachable.
std::vector<Path> k_shortest_paths(const RoadNetwork& network, NodeId source, NodeId target, int k);

/// Edge-set Jaccard similarity.
double edge_jaccard(const Path& a, const Path& b);

/// `groups` ranking groups drawn from the named RNG stream. Ids start at
/// first_id; group ids at first_group.
std::vector<SynthSample> generate_samples(const RoadNetwork& network, const SynthConfig& cfg, std::size_t groups,
                                          std::string_view stream, std::int64_t first_id = 0,
                                          std::int64_t first_group = 0);

/// TCI level 3 inside the peak windows, 0 elsewhere.
TCITable peak_tci_table();

SynthDataset generate(const SynthConfig& cfg);

struct TargetRecord {
  std::int64_t path_id = 0;
  double travel_time_s = 0.0;
  double rank_score = 0.0;
  std::int64_t group_id = 0;
  int chosen = 0;
};

/// CSV `path_id,travel_time_s,rank_score,group_id,chosen`.
void write_targets(std::ostream& out, std::span<const SynthSample> samples, std::string_view config_hash = {});
std::vector<TargetRecord> read_targets(std::istream& in, const std::string& source_name);
std::vector<TargetRecord> load_targets(const std::filesystem::path& file);

}  // namespace tprlab
