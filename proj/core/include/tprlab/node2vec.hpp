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
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace tprlab {

class TemporalGraph;
class RoadNetwork;

/// Undirected graph as sorted neighbor lists.
using Adjacency = std::vector<std::vector<std::int32_t>>;
using Walk = std::vector<std::int32_t>;

struct Node2VecConfig {
  int dim = 128;
  int walks_per_node = 10;
  int walk_length = 40;
  int window = 5;
  int neg_samples = 5;
  double p = 1.0;
  double q = 1.0;
  int epochs = 5;
  double lr = 0.025;
  std::uint64_t seed = 1;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense node-id -> vector table; row i is the embedding of node i.
struct NodeEmbeddingTable {
  RowMatrix vectors;

  int dim() const { return static_cast<int>(vectors.cols()); }
  std::size_t count() const { return static_cast<std::size_t>(vectors.rows()); }
  bool operator==(const NodeEmbeddingTable& other) const {
    return vectors.rows() == other.vectors.rows() && vectors.cols() == other.vectors.cols() &&
           vectors == other.vectors;
  }
};

/// Second-order biased walks. Walk k*|V| + v starts at node v, its RNG stream
/// derived from (seed, k*|V| + v), so output is independent of thread count.
std::vector<Walk> biased_walks(const Adjacency& graph, const Node2VecConfig& cfg);

/// Samples the successor of `current` given the previous node (or -1 for the
/// first step). Exposed for testing the transition bias.
std::int32_t next_walk_node(const Adjacency& graph, std::int32_t previous, std::int32_t current, double p,
                            double q, double u01);

struct SkipGramStats {
  std::vector<double> epoch_loss;  // mean negative-sampling loss per (center, context) pair
};

NodeEmbeddingTable train_skipgram(const std::vector<Walk>& walks, std::size_t node_count,
                                  const Node2VecConfig& cfg, SkipGramStats* stats = nullptr);

NodeEmbeddingTable embed_graph(const Adjacency& graph, const Node2VecConfig& cfg, SkipGramStats* stats = nullptr);
NodeEmbeddingTable embed_temporal(const TemporalGraph& tg, const Node2VecConfig& cfg);
NodeEmbeddingTable embed_road(const RoadNetwork& net, const Node2VecConfig& cfg);

/// Text format: optional `# config_hash=` line, `dim count`, then one row per
/// node `node_id v_1 ... v_dim` at 17 significant digits.
void write_embedding(std::ostream& out, const NodeEmbeddingTable& table, std::string_view config_hash = {});
NodeEmbeddingTable read_embedding(std::istream& in, const std::string& source_name);
void save_embedding(const std::filesystem::path& file, const NodeEmbeddingTable& table,
                    std::string_view config_hash = {});
NodeEmbeddingTable load_embedding(const std::filesystem::path& file);

}  // namespace tprlab
