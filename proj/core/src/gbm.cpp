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

#include "tprlab/gbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "tprlab/common.hpp"
#include "tprlab/error.hpp"

namespace tprlab {
namespace {

constexpr double kMinHessian = 1e-12;
constexpr double kProbClip = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const double> grad, std::span<const double> hess,
              std::span<const std::vector<std::size_t>> sorted, int max_depth, int min_leaf,
              std::vector<RegressionTree::Node>& nodes)
      : x_(x), grad_(grad), hess_(hess), sorted_(sorted), max_depth_(max_depth), min_leaf_(min_leaf),
        nodes_(nodes), mark_(static_cast<std::size_t>(x.rows()), 0) {}

  int build(std::vector<std::size_t> rows, int depth) {
    double g = 0.0, h = 0.0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({});
    nodes_[id].value = -g / std::max(h, kMinHessian);
    if (depth >= max_depth_ || rows.size() < 2 * static_cast<std::size_t>(min_leaf_)) return id;

    for (auto r : rows) mark_[r] = 1;
    const double parent = g * g / std::max(h, kMinHessian);
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    for (std::size_t f = 0; f < sorted_.size(); ++f) {
      double gl = 0.0, hl = 0.0;
      std::size_t nl = 0;
      const auto& order = sorted_[f];
      std::size_t prev = order.size();
      for (std::size_t k = 0; k < order.size(); ++k) {
        const auto r = order[k];
        if (!mark_[r]) continue;
        if (prev != order.size()) {
          const double a = x_(static_cast<Eigen::Index>(prev), static_cast<Eigen::Index>(f));
          const double b = x_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f));
          const std::size_t nr = rows.size() - nl;
          if (a < b && nl >= static_cast<std::size_t>(min_leaf_) && nr >= static_cast<std::size_t>(min_leaf_)) {
            const double hr = h - hl;
            if (hl > kMinHessian && hr > kMinHessian) {
              const double gr = g - gl;
              const double gain = gl * gl / hl + gr * gr / hr - parent;
              if (gain > best_gain) {
                best_gain = gain;
                best_feature = static_cast<int>(f);
                best_threshold = a + (b - a) / 2.0;
                if (!(best_threshold > a && best_threshold <= b)) best_threshold = b;
              }
            }
          }
        }
        gl += grad_[r];
        hl += hess_[r];
        ++nl;
        prev = r;
      }
    }
    for (auto r : rows) mark_[r] = 0;
    if (best_feature < 0 || best_gain <= 1e-12 * std::max(1.0, std::abs(parent))) return id;

    std::vector<std::size_t> left, right;
    for (auto r : rows)
      (x_(static_cast<Eigen::Index>(r), best_feature) < best_threshold ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(std::move(left), depth + 1);
    const int rgt = build(std::move(right), depth + 1);
    nodes_[id].feature = best_feature;
    nodes_[id].threshold = best_threshold;
    nodes_[id].left = l;
    nodes_[id].right = rgt;
    return id;
  }

 private:
  const Eigen::MatrixXd& x_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::span<const std::vector<std::size_t>> sorted_;
  int max_depth_;
  int min_leaf_;
  std::vector<RegressionTree::Node>& nodes_;
  std::vector<char> mark_;
};

double mean_loss(GbmMode mode, std::span<const double> y, std::span<const double> raw) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (mode == GbmMode::regression) {
      const double d = y[i] - raw[i];
      s += d * d;
    } else {
      const double p = std::clamp(sigmoid(raw[i]), kProbClip, 1.0 - kProbClip);
      s -= y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
    }
  }
  return s / static_cast<double>(y.size());
}

}  // namespace

void GbmConfig::validate() const {
  if (rounds < 0) throw ConfigError("gbm.rounds must be >= 0");
  if (max_depth < 1) throw ConfigError("gbm.max_depth must be >= 1");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw ConfigError("gbm.shrinkage must be in (0, 1]");
  if (min_samples_leaf < 1) throw ConfigError("gbm.min_samples_leaf must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw ConfigError("gbm.subsample must be in (0, 1]");
}

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& x, std::span<const double> grad,
                                   std::span<const double> hess, std::span<const std::size_t> rows,
                                   std::span<const std::vector<std::size_t>> sorted, int max_depth,
                                   int min_samples_leaf) {
  RegressionTree tree;
  TreeBuilder builder(x, grad, hess, sorted, max_depth, min_samples_leaf, tree.nodes_);
  builder.build(std::vector<std::size_t>(rows.begin(), rows.end()), 0);
  return tree;
}

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  int at = 0;
  while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
    const auto& n = nodes_[static_cast<std::size_t>(at)];
    at = row(n.feature) < n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(at)].value;
}

int RegressionTree::depth() const {
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    best = std::max(best, d[i]);
    if (nodes_[i].feature >= 0) {
      d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
    }
  }
  return best;
}

double TreeEnsemble::predict_raw(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  double f = base_score_;
  for (const auto& t : trees_) f += shrinkage_ * t.predict(row);
  return f;
}

std::vector<double> TreeEnsemble::predict(const Eigen::MatrixXd& x) const {
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double raw = predict_raw(x.row(i));
    out[static_cast<std::size_t>(i)] = mode_ == GbmMode::regression ? raw : sigmoid(raw);
  }
  return out;
}

std::vector<int> TreeEnsemble::predict_class(const Eigen::MatrixXd& x, double threshold) const {
  if (mode_ != GbmMode::classification) throw ContractViolation("predict_class requires a classification ensemble");
  auto p = predict(x);
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= threshold ? 1 : 0;
  return out;
}

TreeEnsemble fit_gbm(const Eigen::MatrixXd& x, std::span<const double> y, GbmMode mode, const GbmConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  if (n == 0 || y.empty()) throw ConfigError("gradient boosting needs a non-empty training set");
  if (n < 2) throw ConfigError("gradient boosting needs at least 2 examples");
  if (y.size() != n) throw ConfigError("feature rows and targets differ in count");
  if (x.cols() == 0) throw ConfigError("gradient boosting needs at least one feature");
  if (!x.allFinite()) throw ConfigError("features must be finite");
  for (double v : y) {
    if (!std::isfinite(v)) throw ConfigError("targets must be finite");
    if (mode == GbmMode::classification && v != 0.0 && v != 1.0)
      throw ConfigError("classification targets must be 0 or 1");
  }

  TreeEnsemble model;
  model.mode_ = mode;
  model.shrinkage_ = cfg.shrinkage;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  if (mode == GbmMode::regression) {
    model.base_score_ = mean;
  } else {
    const double p = std::clamp(mean, kProbClip, 1.0 - kProbClip);
    model.base_score_ = std::log(p / (1.0 - p));
  }

  std::vector<std::vector<std::size_t>> sorted(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    auto& order = sorted[static_cast<std::size_t>(f)];
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return x(static_cast<Eigen::Index>(a), f) < x(static_cast<Eigen::Index>(b), f);
    });
  }

  std::vector<double> raw(n, model.base_score_), grad(n), hess(n);
  model.loss_.push_back(mean_loss(mode, y, raw));
  Rng rng(cfg.seed);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::size_t> rows = all;
  for (int round = 0; round < cfg.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (mode == GbmMode::regression) {
        grad[i] = raw[i] - y[i];
        hess[i] = 1.0;
      } else {
        const double p = sigmoid(raw[i]);
        grad[i] = p - y[i];
        hess[i] = p * (1.0 - p);
      }
    }
    if (cfg.subsample < 1.0) {
      rows = all;
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(std::max<std::size_t>(2, static_cast<std::size_t>(cfg.subsample * static_cast<double>(n))));
      std::sort(rows.begin(), rows.end());
    }
    auto tree = RegressionTree::fit(x, grad, hess, rows, sorted, cfg.max_depth, cfg.min_samples_leaf);
    for (std::size_t i = 0; i < n; ++i) raw[i] += cfg.shrinkage * tree.predict(x.row(static_cast<Eigen::Index>(i)));
    model.trees_.push_back(std::move(tree));
    model.loss_.push_back(mean_loss(mode, y, raw));
  }
  return model;
}

}  // namespace tprlab
