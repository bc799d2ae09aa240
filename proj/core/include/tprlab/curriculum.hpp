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
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tprlab/trainer.hpp"

namespace tprlab {

/// N disjoint chunks of item indices, shortest paths first.
struct MetaSetSplit {
  std::vector<std::vector<std::size_t>> sets;

  std::size_t size() const { return sets.size(); }
  /// Meta-set holding item i; LookupError if none does.
  std::size_t owner_of(std::size_t item) const;
};

/// Sorts by total meters (ties: edge count, then path id) and chunks into n
/// contiguous blocks whose sizes differ by at most one, larger blocks first.
MetaSetSplit split_meta_sets(const TrainingSet& data, const RoadNetwork& network, int n);

struct ExpertPool {
  std::vector<EncoderParams> experts;
};

/// Expert i is trained for cfg.epochs on meta-set i only, seeded from
/// derive_seed(cfg.seed, "expert/<i>").
ExpertPool train_experts(const TrainingSet& data, const MetaSetSplit& split, const EncoderInputs& inputs,
                         const EncoderDims& dims, const TrainConfig& cfg, const WeakLabeler& labeler);

/// Sum of cosines between the owner's output and every other expert output.
double difficulty_score(std::span<const Eigen::VectorXd> expert_outputs, std::size_t owner);

/// Difficulty of every item under the pool.
std::vector<double> score_items(const TrainingSet& data, const MetaSetSplit& split, const ExpertPool& pool,
                                const EncoderInputs& inputs);

struct CurriculumPlan {
  std::vector<std::vector<std::size_t>> stages;  // stages 1..M; the full-set stage is implicit
  std::vector<double> scores;                    // per item
  std::vector<int> stage_of;                     // per item, 1-based

  std::size_t stage_count() const { return stages.size(); }
};

/// Descending score (ties: path id), M chunks larger-first, each shuffled.
CurriculumPlan build_plan(const TrainingSet& data, std::span<const double> scores, int m, std::uint64_t seed);

enum class CurriculumMode { learned, heuristic, none };

struct CurriculumConfig {
  CurriculumMode mode = CurriculumMode::learned;
  int meta_sets = 10;
  int stages = 10;

  void validate() const;
};

struct CurriculumResult {
  TrainResult trained;
  std::optional<CurriculumPlan> plan;
};

/// learned: split, experts, scores, plan, staged training.
/// heuristic: scores are negated edge counts.
/// none: shuffled training until convergence.
CurriculumResult run_curriculum(const TrainingSet& data, const EncoderInputs& inputs, const EncoderDims& dims,
                                const TrainConfig& cfg, const CurriculumConfig& ccfg, const WeakLabeler& labeler);

/// CSV `tp_id,score,stage`.
void write_plan(std::ostream& out, const TrainingSet& data, const CurriculumPlan& plan,
                std::string_view config_hash = {});

}  // namespace tprlab
