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

#include "tprlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tprlab/error.hpp"

namespace tprlab {
namespace {

void check_pair(std::span<const double> truth, std::span<const double> pred) {
  if (truth.empty()) throw ConfigError("metrics need at least one example");
  if (truth.size() != pred.size()) throw ConfigError("truth and prediction differ in length");
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (!std::isfinite(truth[i]) || !std::isfinite(pred[i])) throw ConfigError("metrics inputs must be finite");
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  RegressionMetrics m;
  m.n = truth.size();
  double abs_err = 0.0, abs_truth = 0.0, pct = 0.0;
  std::size_t pct_n = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double e = std::abs(pred[i] - truth[i]);
    abs_err += e;
    abs_truth += std::abs(truth[i]);
    if (truth[i] == 0.0) {
      ++m.mape_excluded;
    } else {
      pct += e / std::abs(truth[i]);
      ++pct_n;
    }
  }
  if (abs_truth == 0.0) throw ConfigError("relative errors are undefined when every truth value is zero");
  m.mae = abs_err / static_cast<double>(truth.size());
  m.mare = abs_err / abs_truth;
  m.mape = 100.0 * pct / static_cast<double>(pct_n);
  return m;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double kendall_tau(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  const std::size_t n = truth.size();
  if (n < 2) throw ConfigError("Kendall tau needs at least 2 items");
  long long con = 0, dis = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const int s = sign(truth[i] - truth[j]) * sign(pred[i] - pred[j]);
      con += s > 0;
      dis += s < 0;
    }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(con - dis) / pairs;
}

double spearman_rho(std::span<const double> truth, std::span<const double> pred) {
  check_pair(truth, pred);
  const std::size_t n = truth.size();
  if (n < 2) throw ConfigError("Spearman rho needs at least 2 items");
  const auto rt = average_ranks(truth);
  const auto rp = average_ranks(pred);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rt[i] - rp[i]) * (rt[i] - rp[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

RankMetrics rank_metrics(std::span<const double> truth, std::span<const double> pred,
                         std::span<const std::int64_t> group) {
  check_pair(truth, pred);
  if (group.size() != truth.size()) throw ConfigError("group ids and truth differ in length");
  std::map<std::int64_t, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < group.size(); ++i) members[group[i]].push_back(i);
  RankMetrics m;
  std::vector<double> t, p;
  for (const auto& [id, idx] : members) {
    if (idx.size() < 2) {
      ++m.skipped;
      continue;
    }
    t.clear();
    p.clear();
    for (auto i : idx) {
      t.push_back(truth[i]);
      p.push_back(pred[i]);
    }
    m.tau += kendall_tau(t, p);
    m.rho += spearman_rho(t, p);
    ++m.groups;
  }
  if (m.groups == 0) throw ConfigError("no ranking group has at least 2 members");
  m.tau /= static_cast<double>(m.groups);
  m.rho /= static_cast<double>(m.groups);
  return m;
}

RecommendationMetrics recommendation_metrics(std::span<const int> truth, std::span<const int> pred) {
  if (truth.empty()) throw ConfigError("metrics need at least one example");
  if (truth.size() != pred.size()) throw ConfigError("truth and prediction differ in length");
  RecommendationMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if ((truth[i] != 0 && truth[i] != 1) || (pred[i] != 0 && pred[i] != 1))
      throw ConfigError("recommendation labels must be 0 or 1");
    if (truth[i] == 1) (pred[i] == 1 ? m.tp : m.fn)++;
    else (pred[i] == 1 ? m.fp : m.tn)++;
  }
  if (m.tp + m.fn == 0) throw ContractViolation("hit rate is undefined without positive labels");
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(truth.size());
  m.hit_rate = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  return m;
}

}  // namespace tprlab
