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

#include "tprlab/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <random>
#include <set>
#include <unordered_set>

#include "tprlab/error.hpp"

namespace tprlab {
namespace {

constexpr int kDay = 24 * 3600;

// Dijkstra by length avoiding banned edges and nodes; empty when unreachable.
Path shortest_path(const RoadNetwork& net, NodeId source, NodeId target, const std::vector<char>& banned_edge,
                   const std::vector<char>& banned_node) {
  const auto n = net.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<EdgeId> via(n, -1);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[static_cast<std::size_t>(source)] = 0.0;
  pq.push({0.0, source});
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (u == target) break;
    for (EdgeId e : net.outgoing(u)) {
      if (banned_edge[static_cast<std::size_t>(e)]) continue;
      const Edge& ed = net.edge(e);
      if (banned_node[static_cast<std::size_t>(ed.to)]) continue;
      const double nd = d + ed.length_m;
      if (nd < dist[static_cast<std::size_t>(ed.to)]) {
        dist[static_cast<std::size_t>(ed.to)] = nd;
        via[static_cast<std::size_t>(ed.to)] = e;
        pq.push({nd, ed.to});
      }
    }
  }
  Path p;
  if (source == target || via[static_cast<std::size_t>(target)] < 0) return p;
  for (NodeId v = target; v != source;) {
    EdgeId e = via[static_cast<std::size_t>(v)];
    p.edges.push_back(e);
    v = net.edge(e).from;
  }
  std::reverse(p.edges.begin(), p.edges.end());
  return p;
}

Timestamp draw_departure(int cls, Timestamp start, int days, Rng& rng) {
  std::uniform_int_distribution<int> day(0, days - 1);
  auto weekday = [&] {
    for (;;) {
      Timestamp d = start + std::chrono::days(day(rng));
      if (day_of_week(d) < 5) return d;
    }
  };
  if (cls == kMorningPeak) {
    std::uniform_int_distribution<int> sec(7 * 3600, 9 * 3600 - 1);
    return weekday() + std::chrono::seconds(sec(rng));
  }
  if (cls == kAfternoonPeak) {
    std::uniform_int_distribution<int> sec(16 * 3600, 19 * 3600 - 1);
    return weekday() + std::chrono::seconds(sec(rng));
  }
  std::uniform_int_distribution<int> sec(0, kDay - 1);
  for (;;) {
    Timestamp t = start + std::chrono::days(day(rng)) + std::chrono::seconds(sec(rng));
    if (pop_label(t).value == kOffPeak) return t;
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (grid_w < 2 || grid_h < 2) throw ConfigError("synth grid must be at least 2x2");
  if (group_size < 1) throw ConfigError("synth.group_size must be >= 1");
  if (n_paths < group_size || n_paths % group_size != 0)
    throw ConfigError("synth.n_paths must be a positive multiple of synth.group_size");
  if (od_pool < 1) throw ConfigError("synth.od_pool must be >= 1");
  if (!(peak_slowdown >= 1.0)) throw ConfigError("synth.peak_slowdown must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ConfigError("synth.noise_sigma must be >= 0");
  if (!(min_edge_m > 0.0 && max_edge_m >= min_edge_m)) throw ConfigError("synth edge length range is invalid");
  if (days < 7) throw ConfigError("synth.days must be >= 7");
  if (speed_base.empty()) throw ConfigError("synth.speed_base must name at least one road type");
  for (const auto& [name, v] : speed_base)
    if (!(v > 0.0)) throw ConfigError("synth.speed_base['" + name + "'] must be > 0");
  (void)parse_iso8601(start);
}

std::string grid_node_name(int x, int y) { return "x" + std::to_string(x) + "y" + std::to_string(y); }

RoadNetwork generate_network(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng = make_rng(cfg.seed, "network");
  std::vector<std::string> types;
  for (const auto& [name, v] : cfg.speed_base) types.push_back(name);
  std::uniform_int_distribution<std::size_t> type_of(0, types.size() - 1);
  std::uniform_int_distribution<int> lanes(1, 3);
  std::uniform_real_distribution<double> length(cfg.min_edge_m, cfg.max_edge_m);
  std::bernoulli_distribution signals(0.3), one_way(0.2);

  std::vector<std::string> nodes;
  for (int y = 0; y < cfg.grid_h; ++y)
    for (int x = 0; x < cfg.grid_w; ++x) nodes.push_back(grid_node_name(x, y));
  std::vector<EdgeRecord> records;
  auto link = [&](int x0, int y0, int x1, int y1) {
    EdgeRecord r;
    r.road_type = types[type_of(rng)];
    r.num_lanes = lanes(rng);
    r.traffic_signals = signals(rng);
    r.one_way = one_way(rng);
    r.length_m = std::round(length(rng) * 10.0) / 10.0;
    r.id = static_cast<EdgeId>(records.size());
    r.from = grid_node_name(x0, y0);
    r.to = grid_node_name(x1, y1);
    records.push_back(r);
    r.id = static_cast<EdgeId>(records.size());
    std::swap(r.from, r.to);
    records.push_back(r);
  };
  for (int y = 0; y < cfg.grid_h; ++y)
    for (int x = 0; x < cfg.grid_w; ++x) {
      if (x + 1 < cfg.grid_w) link(x, y, x + 1, y);
      if (y + 1 < cfg.grid_h) link(x, y, x, y + 1);
    }
  return RoadNetwork::from_records(std::move(records), &nodes);
}

double edge_speed(const Edge& edge, const SynthConfig& cfg) {
  auto it = cfg.speed_base.find(edge.road_type);
  if (it == cfg.speed_base.end()) throw LookupError("no base speed for road type '" + edge.road_type + "'");
  return it->second * (1.0 + 0.1 * (edge.num_lanes - 1)) * (edge.traffic_signals ? 0.85 : 1.0);
}

double travel_time(const RoadNetwork& network, const Path& path, Timestamp departure, const SynthConfig& cfg,
                   double noise_factor) {
  const double slow = in_peak_window(departure) ? cfg.peak_slowdown : 1.0;
  double t = 0.0;
  for (EdgeId e : path.edges) {
    const Edge& ed = network.edge(e);
    t += ed.length_m / (edge_speed(ed, cfg) / slow);
  }
  return t * noise_factor;
}

std::vector<Path> k_shortest_paths(const RoadNetwork& network, NodeId source, NodeId target, int k) {
  if (k < 1) throw ConfigError("k_shortest_paths: k must be >= 1");
  std::vector<char> no_edges(network.edge_count(), 0), no_nodes(network.node_count(), 0);
  std::vector<Path> found;
  Path first = shortest_path(network, source, target, no_edges, no_nodes);
  if (first.edges.empty()) return found;
  found.push_back(first);
  // Candidates ordered by (length, edge sequence) for deterministic selection.
  std::set<std::pair<double, std::vector<EdgeId>>> candidates;
  while (static_cast<int>(found.size()) < k) {
    const Path& prev = found.back();
    const auto nodes = network.path_nodes(prev);
    for (std::size_t i = 0; i < prev.edges.size(); ++i) {
      std::vector<char> banned_edge(network.edge_count(), 0), banned_node(network.node_count(), 0);
      for (const auto& p : found)
        if (p.edges.size() > i && std::equal(prev.edges.begin(), prev.edges.begin() + static_cast<std::ptrdiff_t>(i),
                                             p.edges.begin()))
          banned_edge[static_cast<std::size_t>(p.edges[i])] = 1;
      for (std::size_t j = 0; j < i; ++j) banned_node[static_cast<std::size_t>(nodes[j])] = 1;
      Path spur = shortest_path(network, nodes[i], target, banned_edge, banned_node);
      if (spur.edges.empty()) continue;
      std::vector<EdgeId> total(prev.edges.begin(), prev.edges.begin() + static_cast<std::ptrdiff_t>(i));
      total.insert(total.end(), spur.edges.begin(), spur.edges.end());
      if (std::any_of(found.begin(), found.end(), [&](const Path& p) { return p.edges == total; })) continue;
      candidates.insert({network.path_length_m(Path{total}), std::move(total)});
    }
    if (candidates.empty()) break;
    found.push_back(Path{candidates.begin()->second});
    candidates.erase(candidates.begin());
  }
  return found;
}

double edge_jaccard(const Path& a, const Path& b) {
  std::unordered_set<EdgeId> sa(a.edges.begin(), a.edges.end()), sb(b.edges.begin(), b.edges.end());
  std::size_t inter = 0;
  for (auto e : sa) inter += sb.count(e);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<SynthSample> generate_samples(const RoadNetwork& network, const SynthConfig& cfg, std::size_t groups,
                                          std::string_view stream, std::int64_t first_id, std::int64_t first_group) {
  cfg.validate();
  const Timestamp start = start_of_day(parse_iso8601(cfg.start));

  // Origin-destination pool shared by every stream.
  Rng pool_rng = make_rng(cfg.seed, "od_pool");
  std::uniform_int_distribution<NodeId> node(0, static_cast<NodeId>(network.node_count()) - 1);
  std::vector<std::vector<Path>> pool;
  for (int attempts = 0; static_cast<int>(pool.size()) < cfg.od_pool; ++attempts) {
    if (attempts > 1000 * cfg.od_pool) throw ConfigError("cannot find enough reachable origin-destination pairs");
    const NodeId s = node(pool_rng), t = node(pool_rng);
    if (s == t) continue;
    auto paths = k_shortest_paths(network, s, t, cfg.group_size);
    if (static_cast<int>(paths.size()) < cfg.group_size || paths.front().edges.size() < 2) continue;
    pool.push_back(std::move(paths));
  }

  const std::uint64_t root = derive_seed(cfg.seed, stream);
  std::vector<SynthSample> out;
  out.reserve(groups * static_cast<std::size_t>(cfg.group_size));
  std::int64_t id = first_id;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::int64_t gid = first_group + static_cast<std::int64_t>(g);
    Rng rng(derive_seed(root, static_cast<std::uint64_t>(gid)));
    std::uniform_int_distribution<std::size_t> od(0, pool.size() - 1);
    const auto& candidates = pool[od(rng)];
    const Timestamp dep = draw_departure(static_cast<int>(gid % 3), start, cfg.days, rng);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      SynthSample s;
      s.record.id = id++;
      s.record.tp = {candidates[c], dep};
      const double factor = std::max(0.1, 1.0 + cfg.noise_sigma * noise(rng));
      s.travel_time_s = travel_time(network, candidates[c], dep, cfg, factor);
      s.rank_score = c == 0 ? 1.0 : edge_jaccard(candidates[0], candidates[c]);
      s.group_id = gid;
      s.chosen = c == 0 ? 1 : 0;
      out.push_back(std::move(s));
    }
  }
  return out;
}

TCITable peak_tci_table() {
  TCITable t;
  for (int d = 0; d < kDaysPerWeek; ++d)
    for (int s = 0; s < kSlotsPerDay; ++s) {
      // Monday 2024-01-01 anchors the weekday of slot d.
      const Timestamp ts = make_timestamp(2024, 1, 1 + d, 0, 0, 0) + std::chrono::minutes(s * kMinutesPerSlot);
      t.set_level({d, s}, in_peak_window(ts) ? 3 : 0);
    }
  return t;
}

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset ds{generate_network(cfg), {}, peak_tci_table()};
  ds.samples = generate_samples(ds.network, cfg, static_cast<std::size_t>(cfg.n_paths / cfg.group_size), "paths");
  return ds;
}

void write_targets(std::ostream& out, std::span<const SynthSample> samples, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "path_id,travel_time_s,rank_score,group_id,chosen\n";
  for (const auto& s : samples)
    out << s.record.id << ',' << format_double(s.travel_time_s) << ',' << format_double(s.rank_score) << ','
        << s.group_id << ',' << s.chosen << '\n';
}

std::vector<TargetRecord> read_targets(std::istream& in, const std::string& source_name) {
  std::vector<TargetRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cols = split(t, ',');
    if (!header) {
      if (cols != std::vector<std::string_view>{"path_id", "travel_time_s", "rank_score", "group_id", "chosen"})
        throw ParseError(source_name, lineno, "expected header 'path_id,travel_time_s,rank_score,group_id,chosen'");
      header = true;
      continue;
    }
    if (cols.size() != 5) throw ParseError(source_name, lineno, "expected 5 fields");
    try {
      TargetRecord r{parse_int(cols[0]), parse_double(cols[1]), parse_double(cols[2]), parse_int(cols[3]),
                     static_cast<int>(parse_int(cols[4]))};
      if (r.chosen != 0 && r.chosen != 1) throw ParseError("chosen must be 0 or 1");
      if (!(r.rank_score >= 0.0 && r.rank_score <= 1.0)) throw ParseError("rank_score must be in [0, 1]");
      out.push_back(r);
    } catch (const Error& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  if (!header) throw ParseError(source_name, lineno, "missing header");
  return out;
}

std::vector<TargetRecord> load_targets(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArtifactError("cannot open targets file " + file.string());
  return read_targets(in, file.string());
}

}  // namespace tprlab
