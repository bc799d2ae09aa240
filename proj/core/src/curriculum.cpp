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

#include "tprlab/curriculum.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <random>

#include "tprlab/error.hpp"

namespace tprlab {
namespace {

// Sizes of n contiguous chunks of `total`, larger chunks first.
std::vector<std::size_t> chunk_sizes(std::size_t total, std::size_t n) {
  std::vector<std::size_t> sizes(n, total / n);
  for (std::size_t i = 0; i < total % n; ++i) ++sizes[i];
  return sizes;
}

}  // namespace

std::size_t MetaSetSplit::owner_of(std::size_t item) const {
  for (std::size_t s = 0; s < sets.size(); ++s)
    if (std::find(sets[s].begin(), sets[s].end(), item) != sets[s].end()) return s;
  throw LookupError("item " + std::to_string(item) + " is not in any meta-set");
}

MetaSetSplit split_meta_sets(const TrainingSet& data, const RoadNetwork& network, int n) {
  if (n < 1) throw ConfigError("number of meta-sets must be >= 1");
  if (data.size() < static_cast<std::size_t>(n))
    throw ConfigError("cannot split " + std::to_string(data.size()) + " items into " + std::to_string(n) +
                      " meta-sets");
  struct Key {
    double meters;
    std::size_t edges;
    std::int64_t id;
    std::size_t index;
  };
  std::vector<Key> keys;
  keys.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.item(i).tp.path;
    keys.push_back({network.path_length_m(p), p.edges.size(), data.item(i).id, i});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.meters != b.meters) return a.meters < b.meters;
    if (a.edges != b.edges) return a.edges < b.edges;
    if (a.id != b.id) return a.id < b.id;
    return a.index < b.index;
  });
  MetaSetSplit split;
  std::size_t at = 0;
  for (auto size : chunk_sizes(keys.size(), static_cast<std::size_t>(n))) {
    auto& set = split.sets.emplace_back();
    for (std::size_t k = 0; k < size; ++k) set.push_back(keys[at++].index);
  }
  return split;
}

ExpertPool train_experts(const TrainingSet& data, const MetaSetSplit& split, const EncoderInputs& inputs,
                         const EncoderDims& dims, const TrainConfig& cfg, const WeakLabeler& labeler) {
  ExpertPool pool;
  pool.experts.resize(split.size());
  parallel_for(split.size(), [&](std::size_t i) {
    TrainConfig ecfg = cfg;
    ecfg.seed = derive_seed(cfg.seed, "expert/" + std::to_string(i));
    ecfg.until_converged = false;
    try {
      pool.experts[i] = train(data.subset(split.sets[i]), inputs, dims, ecfg, labeler).params;
    } catch (const Error& e) {
      throw Error("expert " + std::to_string(i) + ": " + e.what());
    }
  });
  return pool;
}

double difficulty_score(std::span<const Eigen::VectorXd> expert_outputs, std::size_t owner) {
  if (owner >= expert_outputs.size()) throw LookupError("difficulty_score: owner expert out of range");
  double s = 0.0;
  for (std::size_t k = 0; k < expert_outputs.size(); ++k)
    if (k != owner) s += cosine(expert_outputs[owner], expert_outputs[k]);
  return s;
}

std::vector<double> score_items(const TrainingSet& data, const MetaSetSplit& split, const ExpertPool& pool,
                                const EncoderInputs& inputs) {
  if (pool.experts.size() != split.size()) throw ContractViolation("expert pool does not match the meta-set split");
  std::vector<std::size_t> owner(data.size(), split.size());
  for (std::size_t s = 0; s < split.size(); ++s)
    for (auto i : split.sets[s]) owner.at(i) = s;
  for (std::size_t i = 0; i < owner.size(); ++i)
    if (owner[i] == split.size()) throw LookupError("item " + std::to_string(i) + " is not in any meta-set");

  std::vector<double> scores(data.size());
  parallel_for(data.size(), [&](std::size_t i) {
    std::vector<Eigen::VectorXd> outs;
    outs.reserve(pool.experts.size());
    for (const auto& e : pool.experts) outs.push_back(encode(data.item(i).tp, e, inputs).tpr);
    scores[i] = difficulty_score(outs, owner[i]);
  });
  return scores;
}

CurriculumPlan build_plan(const TrainingSet& data, std::span<const double> scores, int m, std::uint64_t seed) {
  if (m < 1) throw ConfigError("number of curriculum stages must be >= 1");
  if (scores.size() != data.size()) throw ContractViolation("build_plan: one score per item required");
  if (data.size() < static_cast<std::size_t>(m)) throw ConfigError("fewer items than curriculum stages");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    if (data.item(a).id != data.item(b).id) return data.item(a).id < data.item(b).id;
    return a < b;
  });
  CurriculumPlan plan;
  plan.scores.assign(scores.begin(), scores.end());
  plan.stage_of.assign(data.size(), 0);
  Rng rng = make_rng(seed, "plan");
  std::size_t at = 0;
  for (auto size : chunk_sizes(order.size(), static_cast<std::size_t>(m))) {
    auto& stage = plan.stages.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(at),
                                           order.begin() + static_cast<std::ptrdiff_t>(at + size));
    at += size;
    for (auto i : stage) plan.stage_of[i] = static_cast<int>(plan.stages.size());
    std::shuffle(stage.begin(), stage.end(), rng);
  }
  return plan;
}

void CurriculumConfig::validate() const {
  if (meta_sets < 1) throw ConfigError("curriculum.meta_sets must be >= 1");
  if (stages < 1) throw ConfigError("curriculum.stages must be >= 1");
}

CurriculumResult run_curriculum(const TrainingSet& data, const EncoderInputs& inputs, const EncoderDims& dims,
                                const TrainConfig& cfg, const CurriculumConfig& ccfg, const WeakLabeler& labeler) {
  ccfg.validate();
  cfg.validate();
  if (!inputs.network) throw ContractViolation("run_curriculum: encoder inputs missing the road network");
  CurriculumResult result;
  if (ccfg.mode == CurriculumMode::none) {
    TrainConfig plain = cfg;
    plain.until_converged = true;
    result.trained = train(data, inputs, dims, plain, labeler);
    return result;
  }
  std::vector<double> scores;
  if (ccfg.mode == CurriculumMode::heuristic) {
    scores.reserve(data.size());
    for (const auto& it : data.items()) scores.push_back(-static_cast<double>(it.tp.path.edges.size()));
  } else {
    EncoderInputs expert_inputs = inputs;
    expert_inputs.zero_temporal = cfg.no_temporal;
    auto split = split_meta_sets(data, *inputs.network, ccfg.meta_sets);
    auto pool = train_experts(data, split, expert_inputs, dims, cfg, labeler);
    scores = score_items(data, split, pool, expert_inputs);
  }
  result.plan = build_plan(data, scores, ccfg.stages, derive_seed(cfg.seed, "curriculum"));
  result.trained = train(data, inputs, dims, cfg, labeler, &*result.plan);
  return result;
}

void write_plan(std::ostream& out, const TrainingSet& data, const CurriculumPlan& plan, std::string_view config_hash) {
  if (!config_hash.empty()) out << "# config_hash=" << config_hash << '\n';
  out << "tp_id,score,stage\n";
  for (std::size_t s = 0; s < plan.stages.size(); ++s)
    for (auto i : plan.stages[s]) out << data.item(i).id << ',' << format_double(plan.scores[i]) << ',' << s + 1 << '\n';
}

}  // namespace tprlab
