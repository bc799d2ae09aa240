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

#include "tprlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "tprlab/curriculum.hpp"
#include "tprlab/error.hpp"

namespace tprlab {

double TrainConfig::effective_lambda() const {
  if (no_global && no_local) throw ConfigError("no_global and no_local cannot both be set");
  if (no_global) return 0.0;
  if (no_local) return 1.0;
  return lambda;
}

void TrainConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must be in [0, 1]");
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size < 4 || batch_size % 2 != 0) throw ConfigError("batch_size must be even and >= 4");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (k_edges < 1) throw ConfigError("k_edges must be >= 1");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (patience < 1 || max_epochs < 1) throw ConfigError("patience and max_epochs must be >= 1");
  (void)effective_lambda();
}

BatchObjective batch_objective(const Batch& batch, std::span<const EdgeSampleSets> sets, const EncoderParams& params,
                               const EncoderInputs& inputs, const TrainConfig& cfg, ParameterSet* grad) {
  const std::size_t n = batch.size();
  std::vector<SequenceCache> caches(grad ? n : 0);
  std::vector<Eigen::VectorXd> tprs(n);
  std::vector<Eigen::MatrixXd> edges(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = encode(batch.items[i].tp, params, inputs, grad ? &caches[i] : nullptr);
    tprs[i] = std::move(r.tpr);
    edges[i] = std::move(r.edge_reprs);
  }
  const double lam = cfg.effective_lambda();
  std::vector<Eigen::VectorXd> g_global, g_local;
  std::vector<Eigen::MatrixXd> g_edges;
  BatchObjective out;
  out.global = global_loss(batch, tprs, cfg.temperature, grad ? &g_global : nullptr);
  out.local = local_loss(tprs, edges, sets, cfg.temperature, grad ? &g_local : nullptr, grad ? &g_edges : nullptr);
  out.objective = joint_objective(out.global, out.local, lam);
  if (grad) {
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::MatrixXd d_out = (1.0 - lam) * g_edges[i];
      const Eigen::VectorXd d_tpr = lam * g_global[i] + (1.0 - lam) * g_local[i];
      d_out.colwise() += d_tpr / static_cast<double>(d_out.cols());
      backward(params, caches[i], d_out, *grad);
    }
  }
  return out;
}

Trainer::Trainer(const EncoderInputs& inputs, EncoderParams init, TrainConfig cfg, WeakLabeler labeler)
    : inputs_(inputs),
      params_(std::move(init)),
      cfg_(cfg),
      labeler_(std::move(labeler)),
      adam_(params_.params().size(), Adam::Options{cfg.lr, 0.9, 0.999, 1e-8}),
      rng_(make_rng(cfg.seed, "train")),
      grad_(params_.params().zeros_like()),
      start_(std::chrono::steady_clock::now()) {
  cfg_.validate();
  inputs_.zero_temporal = cfg_.no_temporal;
  inputs_.validate(params_.dims());
}

EpochLog Trainer::run_epoch(const TrainingSet& data, std::span<const std::size_t> order, const std::string& stage) {
  std::vector<char> in_order(data.size(), 0), used(data.size(), 0);
  for (auto i : order) in_order.at(i) = 1;

  // Path index per item and the groups sharing each path.
  std::unordered_map<Path, std::size_t, PathHash> path_index;
  std::vector<std::size_t> path_of(data.size());
  std::vector<std::vector<std::size_t>> path_groups;
  for (std::size_t g = 0; g < data.group_count(); ++g) {
    const auto& first = data.item(data.group_members(g).front());
    auto [it, fresh] = path_index.try_emplace(first.tp.path, path_groups.size());
    if (fresh) path_groups.emplace_back();
    path_groups[it->second].push_back(g);
    for (auto m : data.group_members(g)) path_of[m] = it->second;
  }

  // Unvisited sibling of `idx` in its group with a different departure.
  auto take_twin = [&](std::size_t idx) -> std::ptrdiff_t {
    for (auto m : data.group_members(data.group_of(idx)))
      if (m != idx && in_order[m] && !used[m] && data.item(m).tp.departure != data.item(idx).tp.departure) {
        used[m] = 1;
        return static_cast<std::ptrdiff_t>(m);
      }
    return -1;
  };
  auto twin_of = [&](const LabeledPath& a, std::ptrdiff_t twin) {
    if (twin >= 0) return data.item(static_cast<std::size_t>(twin));
    LabeledPath copy = a;
    copy.id = -1;
    copy.tp.departure = resample_departure(a.tp.departure, labeler_, rng_);
    copy.label = labeler_(copy.tp.departure);
    return copy;
  };

  struct Unit {
    std::vector<LabeledPath> items;
    std::size_t key;  // path index with label_contrast, group index otherwise
  };
  std::deque<Unit> queue;
  for (auto idx : order) {
    if (used[idx]) continue;
    used[idx] = 1;
    const LabeledPath& anchor = data.item(idx);
    Unit unit;
    unit.key = cfg_.label_contrast ? path_of[idx] : data.group_of(idx);
    unit.items.push_back(anchor);
    unit.items.push_back(twin_of(anchor, take_twin(idx)));
    if (cfg_.label_contrast) {
      std::ptrdiff_t stored = -1;
      for (auto g : path_groups[path_of[idx]]) {
        if (g == data.group_of(idx)) continue;
        for (auto m : data.group_members(g))
          if (in_order[m] && !used[m]) {
            stored = static_cast<std::ptrdiff_t>(m);
            break;
          }
        if (stored >= 0) break;
      }
      if (stored >= 0) {
        const auto m = static_cast<std::size_t>(stored);
        used[m] = 1;
        unit.items.push_back(data.item(m));
        unit.items.push_back(twin_of(data.item(m), take_twin(m)));
      } else if (auto dep = contrast_departure(anchor.tp.departure, labeler_, rng_)) {
        LabeledPath other = anchor;
        other.id = -1;
        other.tp.departure = *dep;
        other.label = labeler_(*dep);
        unit.items.push_back(other);
        unit.items.push_back(twin_of(other, -1));
      }
    }
    queue.push_back(std::move(unit));
  }

  const auto per_batch = static_cast<std::size_t>(cfg_.batch_size);
  double sum_obj = 0.0, sum_g = 0.0, sum_l = 0.0;
  std::size_t queries = 0;
  std::vector<LabeledPath> items;
  std::vector<EdgeSampleSets> sets;
  std::unordered_set<std::size_t> keys;
  std::vector<Unit> skipped;
  std::size_t batch_index = 0;
  while (!queue.empty()) {
    items.clear();
    keys.clear();
    skipped.clear();
    while (!queue.empty() && items.size() < per_batch) {
      if (items.size() + queue.front().items.size() > per_batch) break;
      Unit u = std::move(queue.front());
      queue.pop_front();
      if (!keys.insert(u.key).second) {
        skipped.push_back(std::move(u));
        continue;
      }
      items.insert(items.end(), u.items.begin(), u.items.end());
    }
    for (auto it = skipped.rbegin(); it != skipped.rend(); ++it) queue.push_front(std::move(*it));
    // A batch needs two groups so every query has a negative.
    if (items.size() < 4) break;

    Batch batch = Batch::from_items(items);
    batch.validate();
    sets.clear();
    for (std::size_t q = 0; q < batch.size(); ++q)
      sets.push_back(sample_edge_sets(batch, static_cast<int>(q), cfg_.k_edges, rng_));
    grad_.set_zero();
    auto obj = batch_objective(batch, sets, params_, inputs_, cfg_, &grad_);
    if (!std::isfinite(obj.objective))
      throw DivergenceError("objective is not finite at stage '" + stage + "', batch " + std::to_string(batch_index) +
                            " (global=" + std::to_string(obj.global) + ", local=" + std::to_string(obj.local) + ")");
    auto g = grad_.values();
    for (double& v : g) v = -v;
    clip_global_norm(g, cfg_.clip_norm);
    adam_.step(params_.params().values(), g);
    if (!params_.params().all_finite())
      throw DivergenceError("parameters became non-finite at stage '" + stage + "', batch " +
                            std::to_string(batch_index));

    sum_obj += obj.objective;
    sum_g += obj.global;
    sum_l += obj.local;
    queries += batch.size();
    ++batch_index;
  }

  EpochLog entry;
  entry.epoch = static_cast<int>(log_.size()) + 1;
  entry.stage = stage;
  if (queries > 0) {
    entry.objective = sum_obj / static_cast<double>(queries);
    entry.global_term = sum_g / static_cast<double>(queries);
    entry.local_term = sum_l / static_cast<double>(queries);
  }
  entry.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  log_.push_back(entry);
  return entry;
}

void Trainer::run_until_converged(const TrainingSet& data, std::span<const std::size_t> order,
                                  const std::string& stage) {
  std::vector<std::size_t> shuffled(order.begin(), order.end());
  double best = -std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int e = 0; e < cfg_.max_epochs; ++e) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng_);
    auto entry = run_epoch(data, shuffled, stage);
    if (entry.objective > best + cfg_.min_delta) {
      best = entry.objective;
      stall = 0;
    } else if (++stall >= cfg_.patience) {
      break;
    }
  }
}

TrainResult train(const TrainingSet& data, const EncoderInputs& inputs, const EncoderDims& dims, const TrainConfig& cfg,
                  const WeakLabeler& labeler, const CurriculumPlan* plan) {
  cfg.validate();
  if (!inputs.network) throw ContractViolation("train: encoder inputs missing the road network");
  auto init = EncoderParams::initialize(dims, VocabSizes::of(inputs.network->vocabularies()), derive_seed(cfg.seed, "init"));
  Trainer trainer(inputs, std::move(init), cfg, labeler);
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), 0);
  if (plan) {
    for (std::size_t s = 0; s < plan->stages.size(); ++s)
      trainer.run_epoch(data, plan->stages[s], "stage" + std::to_string(s + 1));
    trainer.run_until_converged(data, all, "stage" + std::to_string(plan->stages.size() + 1));
  } else if (cfg.until_converged) {
    trainer.run_until_converged(data, all, "full");
  } else {
    for (int e = 0; e < cfg.epochs; ++e) {
      std::shuffle(all.begin(), all.end(), trainer.rng());
      trainer.run_epoch(data, all, "full");
    }
  }
  TrainResult result;
  result.log = trainer.log();
  result.params = trainer.release();
  return result;
}

std::vector<Eigen::VectorXd> encode_all(std::span<const TemporalPath> paths, const EncoderParams& params,
                                        const EncoderInputs& inputs) {
  inputs.validate(params.dims());
  std::vector<Eigen::VectorXd> out(paths.size());
  parallel_for(paths.size(), [&](std::size_t i) { out[i] = encode(paths[i], params, inputs).tpr; });
  return out;
}

double pair_separation(const Batch& batch, std::span<const Eigen::VectorXd> tprs) {
  double pos = 0.0, neg = 0.0;
  std::size_t np = 0, nn = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t j = i + 1; j < batch.size(); ++j) {
      const double c = cosine(tprs[i], tprs[j]);
      if (classify_pair(batch.items[i], batch.items[j]) == PairKind::positive) {
        pos += c;
        ++np;
      } else {
        neg += c;
        ++nn;
      }
    }
  }
  if (np == 0 || nn == 0) throw ContractViolation("pair_separation: batch needs positive and negative pairs");
  return pos / static_cast<double>(np) - neg / static_cast<double>(nn);
}

void write_train_log(std::ostream& out, std::span<const EpochLog> log, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "epoch,objective,global_term,local_term,wallclock_s\n";
  for (const auto& e : log)
    out << e.epoch << ',' << format_double(e.objective) << ',' << format_double(e.global_term) << ','
        << format_double(e.local_term) << ',' << format_double(e.wallclock_s) << '\n';
}

}  // namespace tprlab
