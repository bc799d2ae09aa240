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

#include "tprlab/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tprlab/error.hpp"

namespace tprlab {

PairKind classify_pair(const LabeledPath& a, const LabeledPath& b) {
  return (a.tp.path == b.tp.path && a.label == b.label) ? PairKind::positive : PairKind::negative;
}

namespace {

struct GroupKey {
  const Path* path;
  WeakLabel label;
  bool operator==(const GroupKey& o) const { return *path == *o.path && label == o.label; }
};

struct GroupKeyHash {
  std::size_t operator()(const GroupKey& k) const noexcept {
    return PathHash{}(*k.path) ^ (static_cast<std::size_t>(k.label.value) * 0x9e3779b97f4a7c15ULL) ^
           static_cast<std::size_t>(k.label.scheme);
  }
};

}  // namespace

TrainingSet::TrainingSet(std::vector<LabeledPath> items) : items_(std::move(items)) {
  std::unordered_map<GroupKey, std::size_t, GroupKeyHash> index;
  group_of_.resize(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    GroupKey key{&items_[i].tp.path, items_[i].label};
    auto [it, inserted] = index.emplace(key, groups_.size());
    if (inserted) groups_.emplace_back();
    groups_[it->second].push_back(i);
    group_of_[i] = it->second;
  }
}

TrainingSet TrainingSet::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledPath> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(item(i));
  return TrainingSet(std::move(out));
}

Batch Batch::from_items(std::vector<LabeledPath> items) {
  Batch b;
  b.items = std::move(items);
  const int n = static_cast<int>(b.items.size());
  b.positives.assign(static_cast<std::size_t>(n), {});
  b.negatives.assign(static_cast<std::size_t>(n), {});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      auto kind = classify_pair(b.items[static_cast<std::size_t>(i)], b.items[static_cast<std::size_t>(j)]);
      (kind == PairKind::positive ? b.positives : b.negatives)[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  return b;
}

void Batch::validate() const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (positives[i].empty()) throw ContractViolation("batch query " + std::to_string(i) + " has no positive");
    if (negatives[i].empty()) throw ContractViolation("batch query " + std::to_string(i) + " has no negative");
  }
}

Batch pair_batch(const TrainingSet& data, std::span<const std::size_t> anchors, std::span<const std::ptrdiff_t> twins,
                 const WeakLabeler& labeler, Rng& rng) {
  if (anchors.size() != twins.size()) throw ContractViolation("pair_batch: anchors/twins size mismatch");
  std::vector<LabeledPath> items;
  items.reserve(2 * anchors.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    const LabeledPath& a = data.item(anchors[k]);
    items.push_back(a);
    if (twins[k] >= 0) {
      items.push_back(data.item(static_cast<std::size_t>(twins[k])));
    } else {
      LabeledPath copy = a;
      copy.id = -1;
      copy.tp.departure = resample_departure(a.tp.departure, labeler, rng);
      copy.label = labeler(copy.tp.departure);
      items.push_back(std::move(copy));
    }
  }
  Batch b = Batch::from_items(std::move(items));
  b.validate();
  return b;
}

Batch make_batch(const TrainingSet& data, int batch_size, const WeakLabeler& labeler, Rng& rng) {
  if (batch_size < 4 || batch_size % 2 != 0) throw ConfigError("batch size must be even and >= 4");
  const auto groups_needed = static_cast<std::size_t>(batch_size / 2);
  if (data.group_count() < groups_needed)
    throw ConfigError("dataset has " + std::to_string(data.group_count()) + " (path, label) groups; batch needs " +
                      std::to_string(groups_needed));
  std::vector<std::size_t> order(data.group_count());
  std::iota(order.begin(), order.end(), 0);
  // Partial Fisher-Yates: first groups_needed entries are a uniform sample.
  for (std::size_t i = 0; i < groups_needed; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
    std::swap(order[i], order[pick(rng)]);
  }
  std::vector<std::size_t> anchors;
  std::vector<std::ptrdiff_t> twins;
  for (std::size_t g = 0; g < groups_needed; ++g) {
    const auto& members = data.group_members(order[g]);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    std::size_t a = members[pick(rng)];
    std::vector<std::size_t> candidates;
    for (auto m : members)
      if (m != a && data.item(m).tp.departure != data.item(a).tp.departure) candidates.push_back(m);
    anchors.push_back(a);
    if (candidates.empty()) {
      twins.push_back(-1);
    } else {
      std::uniform_int_distribution<std::size_t> pc(0, candidates.size() - 1);
      twins.push_back(static_cast<std::ptrdiff_t>(candidates[pc(rng)]));
    }
  }
  return pair_batch(data, anchors, twins, labeler, rng);
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

namespace {

/// Adds weight * d cos(a, b) / d a to `out`.
void add_cosine_grad(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double weight, Eigen::VectorXd& out) {
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0 || weight == 0.0) return;
  const double s = a.dot(b) / (na * nb);
  out.noalias() += weight * (b / (na * nb) - s * a / (na * na));
}

std::vector<double> softmax(std::span<const double> v) {
  const double lse = log_sum_exp(v);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::exp(v[i] - lse);
  return out;
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

double global_loss(const Batch& batch, std::span<const Eigen::VectorXd> tprs, double temperature,
                   std::vector<Eigen::VectorXd>* grad) {
  if (tprs.size() != batch.size()) throw ContractViolation("global_loss: one TPR per batch item required");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (grad) {
    grad->assign(tprs.size(), Eigen::VectorXd::Zero(tprs.empty() ? 0 : tprs[0].size()));
  }
  double total = 0.0;
  std::vector<double> neg_sims;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& S = batch.positives[i];
    const auto& N = batch.negatives[i];
    if (S.empty()) throw ContractViolation("global_loss: query " + std::to_string(i) + " has no positives");
    if (N.empty()) throw ContractViolation("global_loss: query " + std::to_string(i) + " has no negatives");
    neg_sims.clear();
    for (int k : N) neg_sims.push_back(cosine(tprs[i], tprs[static_cast<std::size_t>(k)]) / temperature);
    const double lse = log_sum_exp(neg_sims);
    double pos_mean = 0.0;
    for (int j : S) pos_mean += cosine(tprs[i], tprs[static_cast<std::size_t>(j)]) / temperature;
    pos_mean /= static_cast<double>(S.size());
    total += pos_mean - lse;

    if (grad) {
      const double w_pos = 1.0 / (static_cast<double>(S.size()) * temperature);
      for (int j : S) {
        const auto& tj = tprs[static_cast<std::size_t>(j)];
        add_cosine_grad(tprs[i], tj, w_pos, (*grad)[i]);
        add_cosine_grad(tj, tprs[i], w_pos, (*grad)[static_cast<std::size_t>(j)]);
      }
      auto p = softmax(neg_sims);
      for (std::size_t m = 0; m < N.size(); ++m) {
        const auto k = static_cast<std::size_t>(N[m]);
        const double w = -p[m] / temperature;
        add_cosine_grad(tprs[i], tprs[k], w, (*grad)[i]);
        add_cosine_grad(tprs[k], tprs[i], w, (*grad)[k]);
      }
    }
  }
  return total;
}

EdgeSampleSets sample_edge_sets(const Batch& batch, int query, int k_edges, Rng& rng) {
  if (query < 0 || static_cast<std::size_t>(query) >= batch.size()) throw LookupError("query index out of range");
  if (k_edges < 1) throw ConfigError("k_edges must be >= 1");
  EdgeSampleSets sets;
  auto draw = [&](int item, std::vector<EdgeSample>& out) {
    const auto& lp = batch.items[static_cast<std::size_t>(item)];
    const int n = static_cast<int>(lp.tp.path.size());
    std::vector<int> pos(static_cast<std::size_t>(n));
    std::iota(pos.begin(), pos.end(), 0);
    const int take = std::min(k_edges, n);
    for (int t = 0; t < take; ++t) {
      std::uniform_int_distribution<int> pick(t, n - 1);
      std::swap(pos[static_cast<std::size_t>(t)], pos[static_cast<std::size_t>(pick(rng))]);
      const int p = pos[static_cast<std::size_t>(t)];
      out.push_back({item, p, lp.tp.path.edges[static_cast<std::size_t>(p)], lp.label});
    }
  };
  for (int j : batch.positives[static_cast<std::size_t>(query)]) draw(j, sets.positive);
  for (int k : batch.negatives[static_cast<std::size_t>(query)]) draw(k, sets.negative);
  return sets;
}

double local_loss(std::span<const Eigen::VectorXd> tprs, std::span<const Eigen::MatrixXd> edge_reprs,
                  std::span<const EdgeSampleSets> sets, double temperature, std::vector<Eigen::VectorXd>* grad_tprs,
                  std::vector<Eigen::MatrixXd>* grad_edges) {
  if (sets.size() != tprs.size()) throw ContractViolation("local_loss: one edge-set pair per query required");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (grad_tprs) grad_tprs->assign(tprs.size(), Eigen::VectorXd::Zero(tprs.empty() ? 0 : tprs[0].size()));
  if (grad_edges) {
    grad_edges->resize(edge_reprs.size());
    for (std::size_t i = 0; i < edge_reprs.size(); ++i)
      (*grad_edges)[i] = Eigen::MatrixXd::Zero(edge_reprs[i].rows(), edge_reprs[i].cols());
  }
  double total = 0.0;
  std::vector<double> pos_s, neg_s;
  Eigen::VectorXd e, ge;
  for (std::size_t i = 0; i < tprs.size(); ++i) {
    const auto& PN = sets[i].positive;
    const auto& NN = sets[i].negative;
    if (PN.empty()) throw ContractViolation("local_loss: query " + std::to_string(i) + " has an empty positive edge set");
    if (NN.empty()) throw ContractViolation("local_loss: query " + std::to_string(i) + " has an empty negative edge set");
    auto edge_vec = [&](const EdgeSample& s) -> Eigen::VectorXd {
      const auto& m = edge_reprs[static_cast<std::size_t>(s.item)];
      if (s.position < 0 || s.position >= m.cols()) throw LookupError("edge sample position out of range");
      return m.col(s.position);
    };
    pos_s.clear();
    neg_s.clear();
    for (const auto& s : PN) pos_s.push_back(cosine(tprs[i], edge_vec(s)) / temperature);
    for (const auto& s : NN) neg_s.push_back(cosine(tprs[i], edge_vec(s)) / temperature);
    const double inv = 1.0 / static_cast<double>(PN.size());
    total += inv * (log_sum_exp(pos_s) - log_sum_exp(neg_s));

    if (grad_tprs || grad_edges) {
      auto pp = softmax(pos_s);
      auto pn = softmax(neg_s);
      auto apply = [&](const EdgeSample& s, double w) {
        e = edge_vec(s);
        if (grad_tprs) add_cosine_grad(tprs[i], e, w, (*grad_tprs)[i]);
        if (grad_edges) {
          ge = Eigen::VectorXd::Zero(e.size());
          add_cosine_grad(e, tprs[i], w, ge);
          (*grad_edges)[static_cast<std::size_t>(s.item)].col(s.position) += ge;
        }
      };
      for (std::size_t m = 0; m < PN.size(); ++m) apply(PN[m], inv * pp[m] / temperature);
      for (std::size_t m = 0; m < NN.size(); ++m) apply(NN[m], -inv * pn[m] / temperature);
    }
  }
  return total;
}

}  // namespace tprlab
