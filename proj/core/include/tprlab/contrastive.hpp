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
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "tprlab/common.hpp"
#include "tprlab/road_network.hpp"
#include "tprlab/weak_labels.hpp"

namespace tprlab {

/// A temporal path with its weak label. `id` is the dataset path id, or -1
/// for an instance synthesized by departure resampling.
struct LabeledPath {
  std::int64_t id = -1;
  TemporalPath tp;
  WeakLabel label;
};

enum class PairKind { positive, negative };

/// Positive iff both the path and the weak label are equal; departure times
/// are ignored.
PairKind classify_pair(const LabeledPath& a, const LabeledPath& b);

/// Training pool grouped by (path, weak label).
class TrainingSet {
 public:
  TrainingSet() = default;
  explicit TrainingSet(std::vector<LabeledPath> items);

  const std::vector<LabeledPath>& items() const { return items_; }
  const LabeledPath& item(std::size_t i) const { return items_.at(i); }
  std::size_t size() const { return items_.size(); }
  std::size_t group_count() const { return groups_.size(); }
  /// Group index of item i.
  std::size_t group_of(std::size_t i) const { return group_of_.at(i); }
  const std::vector<std::size_t>& group_members(std::size_t g) const { return groups_.at(g); }
  /// A dataset restricted to the given item indices (order preserved).
  TrainingSet subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<LabeledPath> items_;
  std::vector<std::size_t> group_of_;
  std::vector<std::vector<std::size_t>> groups_;
};

/// Mini-batch with per-query positive and negative index sets.
struct Batch {
  std::vector<LabeledPath> items;
  std::vector<std::vector<int>> positives;  // S_i
  std::vector<std::vector<int>> negatives;  // N_i = batch \ ({i} u S_i)

  std::size_t size() const { return items.size(); }
  /// Derives S and N from classify_pair.
  static Batch from_items(std::vector<LabeledPath> items);
  /// Throws ContractViolation unless every query has |S| >= 1 and |N| >= 1.
  void validate() const;
};

/// Builds a batch from anchor items: each anchor is paired with `twin` (another
/// stored instance of its group) or, when `twin` is empty, with a copy whose
/// departure is resampled inside the same weak-label window.
Batch pair_batch(const TrainingSet& data, std::span<const std::size_t> anchors,
                 std::span<const std::ptrdiff_t> twins, const WeakLabeler& labeler, Rng& rng);

/// Samples batch_size/2 distinct groups and two instances of each. Throws
/// ConfigError when the dataset has fewer than batch_size/2 groups.
Batch make_batch(const TrainingSet& data, int batch_size, const WeakLabeler& labeler, Rng& rng);

/// Cosine similarity; 0 when either vector is zero.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Global weakly-supervised contrastive objective (to maximize):
///   sum_i 1/|S_i| sum_{j in S_i} log( exp(sim_ij) / sum_{k in N_i} exp(sim_ik) )
/// with sim = cosine / temperature. When `grad` is given it receives
/// d objective / d tpr_i.
double global_loss(const Batch& batch, std::span<const Eigen::VectorXd> tprs, double temperature = 1.0,
                   std::vector<Eigen::VectorXd>* grad = nullptr);

/// Reference to one edge representation: position `position` of item `item`.
struct EdgeSample {
  int item = 0;
  int position = 0;
  EdgeId edge = 0;
  WeakLabel label;
};

struct EdgeSampleSets {
  std::vector<EdgeSample> positive;  // PN
  std::vector<EdgeSample> negative;  // NN
};

/// k_edges positions per positive path into PN and per negative path into
/// NN, uniform without replacement, each tagged with its source path label.
EdgeSampleSets sample_edge_sets(const Batch& batch, int query, int k_edges, Rng& rng);

/// Local objective (to maximize):
///   sum_i 1/|PN_i| log( sum_{PN_i} exp(s(tpr_i, e)) / sum_{NN_i} exp(s(tpr_i, e)) )
/// `edge_reprs[item]` holds the per-position representations (hidden x n).
/// Gradients, when requested, are w.r.t. the TPRs and edge representations.
double local_loss(std::span<const Eigen::VectorXd> tprs, std::span<const Eigen::MatrixXd> edge_reprs,
                  std::span<const EdgeSampleSets> sets, double temperature = 1.0,
                  std::vector<Eigen::VectorXd>* grad_tprs = nullptr,
                  std::vector<Eigen::MatrixXd>* grad_edges = nullptr);

inline double joint_objective(double global, double local, double lambda) {
  return lambda * global + (1.0 - lambda) * local;
}

/// Numerically stable log(sum(exp(v))).
double log_sum_exp(std::span<const double> values);

}  // namespace tprlab
