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

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tprlab/contrastive.hpp"
#include "tprlab/parameters.hpp"
#include "tprlab/path_encoder.hpp"

namespace tprlab {

struct TrainConfig {
  double lambda = 0.8;
  double lr = 3e-4;
  int batch_size = 32;
  int epochs = 5;  // fixed-length schedules (experts, plain training)
  std::uint64_t seed = 1;
  int k_edges = 1;
  double temperature = 1.0;
  double clip_norm = 5.0;
  bool no_global = false;
  bool no_local = false;
  bool no_temporal = false;
  // Packs every positive pair with a pair of the same path under another weak
  // label, so each batch holds same-path negatives.
  bool label_contrast = true;
  // Convergence schedule: stop after `patience` epochs without an objective
  // improvement larger than `min_delta`, or after `max_epochs`.
  bool until_converged = false;
  int patience = 5;
  double min_delta = 1e-4;
  int max_epochs = 100;

  /// Balance factor after applying the no_global / no_local switches.
  double effective_lambda() const;
  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  std::string stage;
  double objective = 0.0;    // mean per query
  double global_term = 0.0;  // mean per query
  double local_term = 0.0;   // mean per query
  double wallclock_s = 0.0;
};

struct BatchObjective {
  double objective = 0.0;
  double global = 0.0;
  double local = 0.0;
};

/// Joint objective of one batch with fixed edge sample sets. When `grad` is
/// given it receives d objective / d params (objective is maximized).
BatchObjective batch_objective(const Batch& batch, std::span<const EdgeSampleSets> sets, const EncoderParams& params,
                               const EncoderInputs& inputs, const TrainConfig& cfg, ParameterSet* grad = nullptr);

/// Ordered curriculum: stages 1..M are trained for one epoch each, then the
/// full set until convergence.
struct CurriculumPlan;

/// Mini-batch ascent on the joint objective with Adam and global-norm
/// clipping. Owns the optimizer state across epochs and stages.
class Trainer {
 public:
  Trainer(const EncoderInputs& inputs, EncoderParams init, TrainConfig cfg, WeakLabeler labeler);

  /// One pass over `order` (indices into `data`): each unvisited item anchors
  /// a positive pair with an unvisited sibling of its group when one exists in
  /// `order`, otherwise with a resampled copy. With label_contrast the pair is
  /// joined by a pair of the same path under a different label (stored when
  /// available, else with a departure moved to another label window). Units
  /// are packed up to batch_size items with distinct paths per batch.
  EpochLog run_epoch(const TrainingSet& data, std::span<const std::size_t> order, const std::string& stage);
  /// Epochs over shuffled `order` until the convergence rule fires.
  void run_until_converged(const TrainingSet& data, std::span<const std::size_t> order, const std::string& stage);

  const EncoderParams& params() const { return params_; }
  EncoderParams release() { return std::move(params_); }
  const std::vector<EpochLog>& log() const { return log_; }
  Rng& rng() { return rng_; }

 private:
  EncoderInputs inputs_;
  EncoderParams params_;
  TrainConfig cfg_;
  WeakLabeler labeler_;
  Adam adam_;
  Rng rng_;
  ParameterSet grad_;
  std::vector<EpochLog> log_;
  std::chrono::steady_clock::time_point start_;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochLog> log;
};

/// Trains a fresh encoder (initialized from cfg.seed). Without a plan runs
/// cfg.epochs shuffled epochs, or until convergence when cfg.until_converged.
/// With a plan runs one epoch per stage, then the full set until convergence.
TrainResult train(const TrainingSet& data, const EncoderInputs& inputs, const EncoderDims& dims, const TrainConfig& cfg,
                  const WeakLabeler& labeler, const CurriculumPlan* plan = nullptr);

/// TPRs for every item (no_temporal must match the training variant).
std::vector<Eigen::VectorXd> encode_all(std::span<const TemporalPath> paths, const EncoderParams& params,
                                        const EncoderInputs& inputs);

/// Mean cosine over positive pairs minus mean cosine over negative pairs.
double pair_separation(const Batch& batch, std::span<const Eigen::VectorXd> tprs);

/// CSV `epoch,objective,global_term,local_term,wallclock_s`.
void write_train_log(std::ostream& out, std::span<const EpochLog> log, std::string_view config_hash = {});

}  // namespace tprlab
