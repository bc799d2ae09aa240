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

#include "tprlab/node2vec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "tprlab/common.hpp"
#include "tprlab/error.hpp"
#include "tprlab/road_network.hpp"
#include "tprlab/temporal_graph.hpp"

namespace tprlab {

void Node2VecConfig::validate() const {
  if (dim < 2) throw ConfigError("node2vec dim must be >= 2");
  if (walks_per_node < 1 || walk_length < 1 || window < 1 || neg_samples < 1)
    throw ConfigError("node2vec counts must be >= 1");
  if (epochs < 0) throw ConfigError("node2vec epochs must be >= 0");
  if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("node2vec p and q must be > 0");
  if (!(lr > 0.0)) throw ConfigError("node2vec lr must be > 0");
}

std::int32_t next_walk_node(const Adjacency& graph, std::int32_t previous, std::int32_t current, double p,
                            double q, double u01) {
  const auto& nbrs = graph[static_cast<std::size_t>(current)];
  if (nbrs.empty()) return -1;
  if (previous < 0) {
    auto k = static_cast<std::size_t>(u01 * static_cast<double>(nbrs.size()));
    return nbrs[std::min(k, nbrs.size() - 1)];
  }
  const auto& prev_nbrs = graph[static_cast<std::size_t>(previous)];
  // Unnormalized weights: 1/p to return, 1 to a common neighbor, 1/q outward.
  double weights[64];
  std::vector<double> heap_weights;
  double* w = weights;
  if (nbrs.size() > 64) {
    heap_weights.resize(nbrs.size());
    w = heap_weights.data();
  }
  double total = 0.0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    std::int32_t x = nbrs[i];
    double wi;
    if (x == previous)
      wi = 1.0 / p;
    else if (std::binary_search(prev_nbrs.begin(), prev_nbrs.end(), x))
      wi = 1.0;
    else
      wi = 1.0 / q;
    w[i] = wi;
    total += wi;
  }
  double target = u01 * total;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    target -= w[i];
    if (target < 0.0) return nbrs[i];
  }
  // Rounding fallthrough: last neighbor with positive weight.
  for (std::size_t i = nbrs.size(); i-- > 0;)
    if (w[i] > 0.0) return nbrs[i];
  return nbrs.back();
}

std::vector<Walk> biased_walks(const Adjacency& graph, const Node2VecConfig& cfg) {
  cfg.validate();
  if (graph.empty()) throw ContractViolation("biased_walks: graph is empty");
  const std::size_t n = graph.size();
  const std::size_t total = n * static_cast<std::size_t>(cfg.walks_per_node);
  std::vector<Walk> walks(total);
  parallel_for(total, [&](std::size_t k) {
    auto start = static_cast<std::int32_t>(k % n);
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Walk& walk = walks[k];
    walk.reserve(static_cast<std::size_t>(cfg.walk_length));
    walk.push_back(start);
    std::int32_t prev = -1, cur = start;
    while (walk.size() < static_cast<std::size_t>(cfg.walk_length)) {
      std::int32_t next = next_walk_node(graph, prev, cur, cfg.p, cfg.q, unif(rng));
      if (next < 0) break;
      walk.push_back(next);
      prev = cur;
      cur = next;
    }
  });
  return walks;
}

namespace {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace

NodeEmbeddingTable train_skipgram(const std::vector<Walk>& walks, std::size_t node_count,
                                  const Node2VecConfig& cfg, SkipGramStats* stats) {
  cfg.validate();
  if (walks.empty()) throw ContractViolation("train_skipgram: no walks");
  const int dim = cfg.dim;
  Rng rng = make_rng(cfg.seed, "skipgram");

  NodeEmbeddingTable table;
  table.vectors.resize(static_cast<Eigen::Index>(node_count), dim);
  {
    std::uniform_real_distribution<double> init(-0.5 / dim, 0.5 / dim);
    for (Eigen::Index i = 0; i < table.vectors.rows(); ++i)
      for (Eigen::Index j = 0; j < dim; ++j) table.vectors(i, j) = init(rng);
  }
  if (cfg.epochs == 0) return table;

  RowMatrix context = RowMatrix::Zero(static_cast<Eigen::Index>(node_count), dim);

  std::vector<double> freq(node_count, 0.0);
  std::size_t tokens = 0;
  for (const auto& w : walks) {
    for (auto v : w) freq[static_cast<std::size_t>(v)] += 1.0;
    tokens += w.size();
  }
  for (auto& f : freq) f = std::pow(f, 0.75);
  std::discrete_distribution<std::int32_t> negative(freq.begin(), freq.end());
  const double total_steps = static_cast<double>(tokens) * cfg.epochs;
  double step = 0.0;
  Eigen::VectorXd grad_center(dim);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss = 0.0;
    std::size_t pairs = 0;
    for (const auto& walk : walks) {
      const auto len = static_cast<std::ptrdiff_t>(walk.size());
      for (std::ptrdiff_t i = 0; i < len; ++i, step += 1.0) {
        const double lr = std::max(cfg.lr * (1.0 - step / total_steps), cfg.lr * 1e-4);
        auto center = table.vectors.row(walk[static_cast<std::size_t>(i)]);
        const auto lo = std::max<std::ptrdiff_t>(0, i - cfg.window);
        const auto hi = std::min<std::ptrdiff_t>(len - 1, i + cfg.window);
        for (auto j = lo; j <= hi; ++j) {
          if (j == i) continue;
          grad_center.setZero();
          for (int k = 0; k <= cfg.neg_samples; ++k) {
            std::int32_t target;
            double label;
            if (k == 0) {
              target = walk[static_cast<std::size_t>(j)];
              label = 1.0;
            } else {
              target = negative(rng);
              label = 0.0;
            }
            auto out = context.row(target);
            double score = center.dot(out);
            loss -= label > 0 ? log_sigmoid(score) : log_sigmoid(-score);
            double g = (label - sigmoid(score)) * lr;
            grad_center.noalias() += g * out.transpose();
            out.noalias() += g * center;
          }
          center.noalias() += grad_center.transpose();
          ++pairs;
        }
      }
    }
    if (stats) stats->epoch_loss.push_back(pairs ? loss / static_cast<double>(pairs) : 0.0);
  }
  return table;
}

NodeEmbeddingTable embed_graph(const Adjacency& graph, const Node2VecConfig& cfg, SkipGramStats* stats) {
  auto walks = biased_walks(graph, cfg);
  return train_skipgram(walks, graph.size(), cfg, stats);
}

NodeEmbeddingTable embed_temporal(const TemporalGraph& tg, const Node2VecConfig& cfg) {
  return embed_graph(tg.adjacency(), cfg);
}

NodeEmbeddingTable embed_road(const RoadNetwork& net, const Node2VecConfig& cfg) {
  return embed_graph(net.undirected_adjacency(), cfg);
}

void write_embedding(std::ostream& out, const NodeEmbeddingTable& table, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << table.dim() << ' ' << table.count() << '\n';
  for (Eigen::Index i = 0; i < table.vectors.rows(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < table.vectors.cols(); ++j) out << ' ' << format_double(table.vectors(i, j));
    out << '\n';
  }
}

NodeEmbeddingTable read_embedding(std::istream& in, const std::string& source_name) {
  std::string line;
  std::size_t lineno = 0;
  long long dim = -1, count = -1;
  NodeEmbeddingTable table;
  std::vector<bool> seen;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto fields = split(t, ' ');
    fields.erase(std::remove_if(fields.begin(), fields.end(), [](auto f) { return f.empty(); }), fields.end());
    try {
      if (dim < 0) {
        if (fields.size() != 2) throw ParseError("expected 'dim count' header");
        dim = parse_int(fields[0]);
        count = parse_int(fields[1]);
        if (dim < 1 || count < 0) throw ParseError("invalid table shape");
        table.vectors.resize(count, dim);
        seen.assign(static_cast<std::size_t>(count), false);
        continue;
      }
      if (static_cast<long long>(fields.size()) != dim + 1)
        throw ParseError("expected " + std::to_string(dim + 1) + " fields");
      long long id = parse_int(fields[0]);
      if (id < 0 || id >= count) throw ParseError("node id out of range");
      if (seen[static_cast<std::size_t>(id)]) throw ParseError("duplicate node id");
      seen[static_cast<std::size_t>(id)] = true;
      for (long long j = 0; j < dim; ++j) table.vectors(id, j) = parse_double(fields[static_cast<std::size_t>(j + 1)]);
      ++rows;
    } catch (const ParseError& e) {
      throw ParseError(source_name, lineno, e.what());
    }
  }
  if (dim < 0) throw ParseError(source_name + ": missing embedding header");
  if (static_cast<long long>(rows) != count)
    throw IntegrityError(source_name + ": expected " + std::to_string(count) + " rows, got " + std::to_string(rows));
  return table;
}

void save_embedding(const std::filesystem::path& file, const NodeEmbeddingTable& table, std::string_view config_hash) {
  std::ofstream out(file);
  if (!out) throw ArtifactError("cannot write " + file.string());
  write_embedding(out, table, config_hash);
}

NodeEmbeddingTable load_embedding(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ArtifactError("cannot open embedding file " + file.string());
  return read_embedding(in, file.string());
}

}  // namespace tprlab
