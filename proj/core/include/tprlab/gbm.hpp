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
#include <vector>

#include <Eigen/Core>

namespace tprlab {

enum class GbmMode { regression, classification };

struct GbmConfig {
  int rounds = 100;
  int max_depth = 3;
  double shrinkage = 0.1;
  int min_samples_leaf = 1;
  double subsample = 1.0;  // < 1 draws a seeded row sample per round
  std::uint64_t seed = 0;

  void validate() const;
};

/// Binary regression tree over dense features; leaves hold Newton steps.
class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  /// Rows of `x` are samples; rows outside `rows` are ignored.
  static RegressionTree fit(const Eigen::MatrixXd& x, std::span<const double> grad, std::span<const double> hess,
                            std::span<const std::size_t> rows, std::span<const std::vector<std::size_t>> sorted,
                            int max_depth, int min_samples_leaf);

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

 private:
  std::vector<Node> nodes_;
};

/// Additive tree ensemble. In classification mode raw scores are log-odds.
class TreeEnsemble {
 public:
  GbmMode mode() const { return mode_; }
  double base_score() const { return base_score_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  /// Training loss before the first tree and after every round.
  const std::vector<double>& training_loss() const { return loss_; }

  double predict_raw(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  /// Regression: value. Classification: probability of class 1.
  std::vector<double> predict(const Eigen::MatrixXd& x) const;
  std::vector<int> predict_class(const Eigen::MatrixXd& x, double threshold = 0.5) const;

  friend TreeEnsemble fit_gbm(const Eigen::MatrixXd& x, std::span<const double> y, GbmMode mode,
                              const GbmConfig& cfg);

 private:
  GbmMode mode_ = GbmMode::regression;
  double base_score_ = 0.0;
  double shrinkage_ = 0.1;
  std::vector<RegressionTree> trees_;
  std::vector<double> loss_;
};

/// Least-squares boosting (regression) or logistic boosting on {0,1} targets
/// (classification). Throws ConfigError on fewer than 2 rows, mismatched
/// sizes, non-finite targets or non-binary classification labels.
TreeEnsemble fit_gbm(const Eigen::MatrixXd& x, std::span<const double> y, GbmMode mode, const GbmConfig& cfg = {});

}  // namespace tprlab
