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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tprlab/common.hpp"

namespace tprlab {

using NodeId = std::int32_t;
using EdgeId = std::int32_t;

/// Categorical vocabulary built in first-appearance order. Index 0 is the
/// reserved UNK entry; known values occupy 1..size()-1.
class FeatureVocabulary {
 public:
  static constexpr int kUnknown = 0;

  FeatureVocabulary();

  int intern(std::string_view value);
  /// Index of `value`, or kUnknown.
  int lookup(std::string_view value) const;
  const std::string& value(int index) const { return values_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(values_.size()); }

  bool operator==(const FeatureVocabulary& other) const { return values_ == other.values_; }

 private:
  std::vector<std::string> values_;
  std::unordered_map<std::string, int> index_;
};

struct EdgeVocabularies {
  FeatureVocabulary road_type;
  FeatureVocabulary num_lanes;
  FeatureVocabulary one_way;
  FeatureVocabulary traffic_signals;

  bool operator==(const EdgeVocabularies&) const = default;
};

/// Vocabulary indices of the four categorical edge features.
struct EdgeCategories {
  int road_type = 0;
  int num_lanes = 0;
  int one_way = 0;
  int traffic_signals = 0;
};

struct Edge {
  EdgeId id = 0;
  NodeId from = 0;
  NodeId to = 0;
  std::string road_type;
  int num_lanes = 1;
  bool one_way = false;
  bool traffic_signals = false;
  double length_m = 0.0;
  EdgeCategories categories;
};

/// One row of the edge-list format, before validation.
struct EdgeRecord {
  EdgeId id = 0;
  std::string from;
  std::string to;
  std::string road_type;
  int num_lanes = 1;
  bool one_way = false;
  bool traffic_signals = false;
  double length_m = 0.0;
};

struct Path {
  std::vector<EdgeId> edges;

  std::size_t size() const { return edges.size(); }
  bool operator==(const Path&) const = default;
};

struct PathHash {
  std::size_t operator()(const Path& p) const noexcept;
};

struct TemporalPath {
  Path path;
  Timestamp departure;

  bool operator==(const TemporalPath&) const = default;
};

/// Directed road network. Immutable once built.
class RoadNetwork {
 public:
  /// Validates and builds a network. When `declared_nodes` is given every
  /// endpoint must appear in it; otherwise nodes are collected from the
  /// endpoints in first-appearance order. When `base_vocab` is given,
  /// categories are mapped through it and unseen values become UNK.
  static RoadNetwork from_records(std::vector<EdgeRecord> records,
                                  const std::vector<std::string>* declared_nodes = nullptr,
                                  const EdgeVocabularies* base_vocab = nullptr);

  std::size_t node_count() const { return node_names_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const Edge& edge(EdgeId id) const;
  std::span<const Edge> edges() const { return edges_; }
  std::span<const EdgeId> outgoing(NodeId node) const;
  const std::string& node_name(NodeId node) const;
  std::optional<NodeId> find_node(std::string_view name) const;
  const EdgeVocabularies& vocabularies() const { return vocab_; }
  const std::vector<std::string>& node_names() const { return node_names_; }

  /// True iff every consecutive pair of edges is adjacent. Throws LookupError
  /// on an unknown edge id and ContractViolation on an empty path.
  bool validate_path(const Path& path) const;
  double path_length_m(const Path& path) const;
  std::vector<NodeId> path_nodes(const Path& path) const;

  /// Undirected simple adjacency (sorted, deduplicated), used for walks.
  std::vector<std::vector<std::int32_t>> undirected_adjacency() const;

 private:
  std::vector<std::string> node_names_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeId>> out_;
  EdgeVocabularies vocab_;
};

/// Reads the edge-list file (header row required, comma separated, lines
/// starting with '#' are comments). Throws ParseError naming the line or
/// IntegrityError for structural problems.
RoadNetwork load_network(const std::filesystem::path& edge_file,
                         const std::filesystem::path* node_file = nullptr,
                         const EdgeVocabularies* base_vocab = nullptr);
RoadNetwork read_network(std::istream& in, const std::string& source_name,
                         const std::vector<std::string>* declared_nodes = nullptr,
                         const EdgeVocabularies* base_vocab = nullptr);
std::vector<std::string> read_node_list(std::istream& in, const std::string& source_name);
void write_network(std::ostream& out, const RoadNetwork& net, std::string_view config_hash = {});
void write_node_list(std::ostream& out, const RoadNetwork& net, std::string_view config_hash = {});

struct PathRecord {
  std::int64_t id = 0;
  TemporalPath tp;
};

std::vector<PathRecord> read_paths(std::istream& in, const std::string& source_name);
std::vector<PathRecord> load_paths(const std::filesystem::path& path_file);
void write_paths(std::ostream& out, std::span<const PathRecord> paths, std::string_view config_hash = {});

/// Extracts the value of a leading `# config_hash=<hex>` comment, if present.
std::optional<std::string> read_config_hash(const std::filesystem::path& file);

}  // namespace tprlab
