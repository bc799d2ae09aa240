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

#include "tprlab/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include "tprlab/error.hpp"

namespace tprlab {

FeatureVocabulary::FeatureVocabulary() : values_{"<unk>"} {}

int FeatureVocabulary::intern(std::string_view value) {
  if (auto it = index_.find(std::string(value)); it != index_.end()) return it->second;
  int idx = size();
  values_.emplace_back(value);
  index_.emplace(std::string(value), idx);
  return idx;
}

int FeatureVocabulary::lookup(std::string_view value) const {
  auto it = index_.find(std::string(value));
  return it == index_.end() ? kUnknown : it->second;
}

std::size_t PathHash::operator()(const Path& p) const noexcept {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (EdgeId e : p.edges) h = splitmix64(h ^ static_cast<std::uint64_t>(e));
  return static_cast<std::size_t>(h);
}

RoadNetwork RoadNetwork::from_records(std::vector<EdgeRecord> records,
                                      const std::vector<std::string>* declared_nodes,
                                      const EdgeVocabularies* base_vocab) {
  if (records.empty()) throw IntegrityError("road network has no edges");

  RoadNetwork net;
  if (declared_nodes) {
    for (const auto& name : *declared_nodes) {
      if (net.node_index_.count(name)) throw IntegrityError("duplicate node id '" + name + "'");
      net.node_index_.emplace(name, static_cast<NodeId>(net.node_names_.size()));
      net.node_names_.push_back(name);
    }
  }
  auto resolve = [&](const std::string& name, EdgeId eid) -> NodeId {
    if (auto it = net.node_index_.find(name); it != net.node_index_.end()) return it->second;
    if (declared_nodes)
      throw IntegrityError("edge " + std::to_string(eid) + " references undeclared node '" + name + "'");
    auto id = static_cast<NodeId>(net.node_names_.size());
    net.node_index_.emplace(name, id);
    net.node_names_.push_back(name);
    return id;
  };

  const auto n_edges = records.size();
  std::vector<bool> seen(n_edges, false);
  for (const auto& r : records) {
    if (r.id < 0 || static_cast<std::size_t>(r.id) >= n_edges)
      throw IntegrityError("edge id " + std::to_string(r.id) + " outside dense range [0, " +
                           std::to_string(n_edges) + ")");
    if (seen[static_cast<std::size_t>(r.id)]) throw IntegrityError("duplicate edge id " + std::to_string(r.id));
    seen[static_cast<std::size_t>(r.id)] = true;
  }

  if (base_vocab) net.vocab_ = *base_vocab;
  net.edges_.resize(n_edges);
  // Records are interned in file order so vocabulary indices follow first
  // appearance in the file, independent of edge id order.
  for (auto& r : records) {
    if (r.num_lanes < 1) throw IntegrityError("edge " + std::to_string(r.id) + " has num_lanes < 1");
    if (!(r.length_m >= 0.0) || !std::isfinite(r.length_m))
      throw IntegrityError("edge " + std::to_string(r.id) + " has invalid length");
    Edge e;
    e.id = r.id;
    e.from = resolve(r.from, r.id);
    e.to = resolve(r.to, r.id);
    e.road_type = std::move(r.road_type);
    e.num_lanes = r.num_lanes;
    e.one_way = r.one_way;
    e.traffic_signals = r.traffic_signals;
    e.length_m = r.length_m;
    auto cat = [&](FeatureVocabulary& v, const std::string& s) {
      return base_vocab ? v.lookup(s) : v.intern(s);
    };
    e.categories.road_type = cat(net.vocab_.road_type, e.road_type);
    e.categories.num_lanes = cat(net.vocab_.num_lanes, std::to_string(e.num_lanes));
    e.categories.one_way = cat(net.vocab_.one_way, e.one_way ? "1" : "0");
    e.categories.traffic_signals = cat(net.vocab_.traffic_signals, e.traffic_signals ? "1" : "0");
    net.edges_[static_cast<std::size_t>(e.id)] = std::move(e);
  }

  net.out_.assign(net.node_names_.size(), {});
  for (const auto& e : net.edges_) net.out_[static_cast<std::size_t>(e.from)].push_back(e.id);
  return net;
}

const Edge& RoadNetwork::edge(EdgeId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= edges_.size())
    throw LookupError("unknown edge id " + std::to_string(id));
  return edges_[static_cast<std::size_t>(id)];
}

std::span<const EdgeId> RoadNetwork::outgoing(NodeId node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= out_.size())
    throw LookupError("unknown node index " + std::to_string(node));
  return out_[static_cast<std::size_t>(node)];
}

const std::string& RoadNetwork::node_name(NodeId node) const {
  if (node < 0 || static_cast<std::size_t>(node) >= node_names_.size())
    throw LookupError("unknown node index " + std::to_string(node));
  return node_names_[static_cast<std::size_t>(node)];
}

std::optional<NodeId> RoadNetwork::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

bool RoadNetwork::validate_path(const Path& path) const {
  if (path.edges.empty()) throw ContractViolation("path is empty");
  for (EdgeId id : path.edges) (void)edge(id);
  for (std::size_t i = 1; i < path.edges.size(); ++i) {
    if (edge(path.edges[i - 1]).to != edge(path.edges[i]).from) return false;
  }
  return true;
}

double RoadNetwork::path_length_m(const Path& path) const {
  double total = 0.0;
  for (EdgeId id : path.edges) total += edge(id).length_m;
  return total;
}

std::vector<NodeId> RoadNetwork::path_nodes(const Path& path) const {
  std::vector<NodeId> nodes;
  if (path.edges.empty()) return nodes;
  nodes.push_back(edge(path.edges.front()).from);
  for (EdgeId id : path.edges) nodes.push_back(edge(id).to);
  return nodes;
}

std::vector<std::vector<std::int32_t>> RoadNetwork::undirected_adjacency() const {
  std::vector<std::vector<std::int32_t>> adj(node_names_.size());
  for (const auto& e : edges_) {
    if (e.from == e.to) continue;
    adj[static_cast<std::size_t>(e.from)].push_back(e.to);
    adj[static_cast<std::size_t>(e.to)].push_back(e.from);
  }
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  return adj;
}

namespace {

constexpr std::string_view kEdgeHeader[] = {"edge_id", "from_node", "to_node", "road_type",
                                            "num_lanes", "one_way", "traffic_signals", "length_m"};
constexpr std::string_view kPathHeader[] = {"path_id", "departure", "edges"};

bool is_comment_or_blank(std::string_view line) {
  auto t = trim(line);
  return t.empty() || t.front() == '#';
}

bool parse_flag(std::string_view s) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw ParseError("expected 0 or 1, got '" + std::string(s) + "'");
}

template <std::size_t N>
void check_header(std::string_view line, const std::string_view (&expected)[N], const std::string& source,
                  std::size_t lineno) {
  auto cols = split(line, ',');
  bool ok = cols.size() == N;
  for (std::size_t i = 0; ok && i < N; ++i) ok = cols[i] == expected[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < N; ++i) want += (i ? "," : "") + std::string(expected[i]);
    throw ParseError(source, lineno, "expected header '" + want + "'");
  }
}

void write_hash_comment(std::ostream& out, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
}

}  // namespace

RoadNetwork read_network(std::istream& in, const std::string& source_name,
                         const std::vector<std::string>* declared_nodes, const EdgeVocabularies* base_vocab) {
  std::vector<EdgeRecord> records;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    if (!header_seen) {
      check_header(line, kEdgeHeader, source_name, lineno);
      header_seen = true;
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != 8)
      throw ParseError(source_name, lineno, "expected 8 fields, got " + std::to_string(cols.size()));
    try {
      EdgeRecord r;
      r.id = static_cast<EdgeId>(parse_int(cols[0]));
      r.from = std::string(cols[1]);
      r.to = std::string(cols[2]);
      r.road_type = std::string(cols[3]);
      r.num_lanes = static_cast<int>(parse_int(cols[4]));
      r.one_way = parse_flag(cols[5]);
      r.traffic_signals = parse_flag(cols[6]);
      r.length_m = parse_double(cols[7]);
      if (r.from.empty() || r.to.empty()) throw ParseError("empty node id");
      records.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  if (!header_seen) throw IntegrityError(source_name + ": empty edge list");
  return RoadNetwork::from_records(std::move(records), declared_nodes, base_vocab);
}

std::vector<std::string> read_node_list(std::istream& in, const std::string& source_name) {
  std::vector<std::string> nodes;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    auto t = trim(line);
    if (!header_seen) {
      if (t != "node_id") throw ParseError(source_name, lineno, "expected header 'node_id'");
      header_seen = true;
      continue;
    }
    nodes.emplace_back(t);
  }
  return nodes;
}

RoadNetwork load_network(const std::filesystem::path& edge_file, const std::filesystem::path* node_file,
                         const EdgeVocabularies* base_vocab) {
  std::ifstream in(edge_file);
  if (!in) throw ArtifactError("cannot open edge file " + edge_file.string());
  std::optional<std::vector<std::string>> declared;
  if (node_file) {
    std::ifstream nin(*node_file);
    if (!nin) throw ArtifactError("cannot open node file " + node_file->string());
    declared = read_node_list(nin, node_file->string());
  }
  return read_network(in, edge_file.string(), declared ? &*declared : nullptr, base_vocab);
}

void write_network(std::ostream& out, const RoadNetwork& net, std::string_view config_hash) {
  write_hash_comment(out, config_hash);
  out << "edge_id,from_node,to_node,road_type,num_lanes,one_way,traffic_signals,length_m\n";
  for (const auto& e : net.edges()) {
    out << e.id << ',' << net.node_name(e.from) << ',' << net.node_name(e.to) << ',' << e.road_type << ','
        << e.num_lanes << ',' << (e.one_way ? 1 : 0) << ',' << (e.traffic_signals ? 1 : 0) << ','
        << format_double(e.length_m) << '\n';
  }
}

void write_node_list(std::ostream& out, const RoadNetwork& net, std::string_view config_hash) {
  write_hash_comment(out, config_hash);
  out << "node_id\n";
  for (const auto& name : net.node_names()) out << name << '\n';
}

std::vector<PathRecord> read_paths(std::istream& in, const std::string& source_name) {
  std::vector<PathRecord> out;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (is_comment_or_blank(line)) continue;
    if (!header_seen) {
      check_header(line, kPathHeader, source_name, lineno);
      header_seen = true;
      continue;
    }
    auto cols = split(line, ',');
    if (cols.size() != 3)
      throw ParseError(source_name, lineno, "expected 3 fields, got " + std::to_string(cols.size()));
    try {
      PathRecord r;
      r.id = parse_int(cols[0]);
      r.tp.departure = parse_iso8601(cols[1]);
      for (auto tok : split(cols[2], ';')) r.tp.path.edges.push_back(static_cast<EdgeId>(parse_int(tok)));
      out.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  return out;
}

std::vector<PathRecord> load_paths(const std::filesystem::path& path_file) {
  std::ifstream in(path_file);
  if (!in) throw ArtifactError("cannot open path file " + path_file.string());
  return read_paths(in, path_file.string());
}

void write_paths(std::ostream& out, std::span<const PathRecord> paths, std::string_view config_hash) {
  write_hash_comment(out, config_hash);
  out << "path_id,departure,edges\n";
  for (const auto& r : paths) {
    out << r.id << ',' << format_iso8601(r.tp.departure) << ',';
    for (std::size_t i = 0; i < r.tp.path.edges.size(); ++i) out << (i ? ";" : "") << r.tp.path.edges[i];
    out << '\n';
  }
}

std::optional<std::string> read_config_hash(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty()) continue;
    constexpr std::string_view prefix = "# config_hash=";
    if (t.substr(0, prefix.size()) == prefix) return std::string(trim(t.substr(prefix.size())));
    if (t.front() != '#') break;
  }
  return std::nullopt;
}

}  // namespace tprlab
