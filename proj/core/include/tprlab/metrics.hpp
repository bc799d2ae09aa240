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

namespace tprlab {

struct RegressionMetrics {
  double mae = 0.0;
  double mare = 0.0;  // sum |error| / sum |truth|
  double mape = 0.0;  // percent, over nonzero truths
  std::size_t n = 0;
  std::size_t mape_excluded = 0;  // zero truths left out of MAPE
};

/// Throws ConfigError on empty or mismatched input, non-finite values, or an
/// all-zero truth vector.
RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> pred);

/// Ranks 1..n, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// (concordant - discordant) / (n(n-1)/2); tied pairs count as neither.
double kendall_tau(std::span<const double> truth, std::span<const double> pred);
/// 1 - 6 sum d^2 / (n(n^2-1)) over average ranks.
double spearman_rho(std::span<const double> truth, std::span<const double> pred);

struct RankMetrics {
  double tau = 0.0;  // macro average over groups
  double rho = 0.0;
  std::size_t groups = 0;
  std::size_t skipped = 0;  // groups with fewer than 2 members
};

/// Per-group tau and rho, macro-averaged. Throws ConfigError when no group
/// has at least 2 members.
RankMetrics rank_metrics(std::span<const double> truth, std::span<const double> pred,
                         std::span<const std::int64_t> group);

struct RecommendationMetrics {
  double accuracy = 0.0;
  double hit_rate = 0.0;
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Binary labels. Throws ContractViolation when truth has no positives.
RecommendationMetrics recommendation_metrics(std::span<const int> truth, std::span<const int> pred);

}  // namespace tprlab
