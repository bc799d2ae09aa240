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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "tprlab/error.hpp"
#include "tprlab/parameters.hpp"
#include "tprlab/trainer.hpp"

using namespace tprlab;

namespace {

TrainConfig small_cfg() {
  TrainConfig c;
  c.batch_size = 8;
  c.epochs = 2;
  c.lr = 1e-2;
  c.seed = 3;
  return c;
}

// Max relative error of the joint objective's gradient on sampled parameters.
double joint_grad_error(const testing::TinyWorld& w, const TrainConfig& cfg, std::size_t samples) {
  const auto set = w.training_set();
  Rng rng(21);
  const Batch batch = make_batch(set, 8, w.labeler, rng);
  std::vector<EdgeSampleSets> sets;
  for (std::size_t i = 0; i < batch.size(); ++i)
    sets.push_back(sample_edge_sets(batch, static_cast<int>(i), cfg.k_edges, rng));
  const auto p0 = w.init();
  const auto inputs = w.inputs();
  const DifferentiableFn fn = [&](std::span<const double> flat, std::span<double> grad) {
    EncoderParams p = p0;
    std::copy(flat.begin(), flat.end(), p.params().values().begin());
    ParameterSet g = p.params().zeros_like();
    const double v = batch_objective(batch, sets, p, inputs, cfg, &g).objective;
    std::copy(g.values().begin(), g.values().end(), grad.begin());
    return v;
  };
  std::vector<double> flat(p0.params().values().begin(), p0.params().values().end());
  std::vector<double> grad(flat.size());
  fn(flat, grad);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < flat.size(); ++i)
    if (std::abs(grad[i]) > 1e-5) idx.push_back(i);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(std::min(idx.size(), samples));
  REQUIRE(idx.size() == samples);
  return grad_check(fn, flat, idx, 1e-4).max_relative_error;
}

}  // namespace

TEST_SUITE("trainer") {
  TEST_CASE("balance factor follows the ablation switches") {
    TrainConfig c;
    CHECK(c.effective_lambda() == 0.8);
    c.no_global = true;
    CHECK(c.effective_lambda() == 0.0);
    c.no_global = false;
    c.no_local = true;
    CHECK(c.effective_lambda() == 1.0);
    c.no_global = true;
    CHECK_THROWS_AS(c.effective_lambda(), ConfigError);
  }

  TEST_CASE("invalid training settings are configuration errors") {
    TrainConfig c;
    c.batch_size = 7;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.lambda = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.temperature = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("joint objective gradient matches finite differences") {
    testing::TinyWorld w;
    TrainConfig cfg;
    CHECK(joint_grad_error(w, cfg, 60) < 1e-3);
    cfg.k_edges = 2;
    cfg.temperature = 0.5;
    CHECK(joint_grad_error(w, cfg, 60) < 1e-3);
  }

  TEST_CASE("single-term objectives have exact gradients too") {
    testing::TinyWorld w;
    TrainConfig cfg;
    cfg.no_global = true;
    CHECK(joint_grad_error(w, cfg, 50) < 1e-3);
    cfg.no_global = false;
    cfg.no_local = true;
    CHECK(joint_grad_error(w, cfg, 50) < 1e-3);
  }

  TEST_CASE("batch objective blends the global and local terms") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    Rng rng(2);
    const Batch batch = make_batch(set, 8, w.labeler, rng);
    std::vector<EdgeSampleSets> sets;
    for (std::size_t i = 0; i < batch.size(); ++i) sets.push_back(sample_edge_sets(batch, static_cast<int>(i), 1, rng));
    const auto r = batch_objective(batch, sets, w.init(), w.inputs(), TrainConfig{});
    CHECK(r.objective == doctest::Approx(0.8 * r.global + 0.2 * r.local).epsilon(1e-12));
  }

  TEST_CASE("zero epochs return the initialization") {
    testing::TinyWorld w;
    auto cfg = small_cfg();
    cfg.epochs = 0;
    const auto r = train(w.training_set(), w.inputs(), w.dims, cfg, w.labeler);
    CHECK(r.params == EncoderParams::initialize(w.dims, w.vocab(), derive_seed(cfg.seed, "init")));
    CHECK(r.log.empty());
  }

  TEST_CASE("training is deterministic for a seed") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    const auto a = train(set, w.inputs(), w.dims, small_cfg(), w.labeler);
    const auto b = train(set, w.inputs(), w.dims, small_cfg(), w.labeler);
    CHECK(a.params == b.params);
    REQUIRE(a.log.size() == b.log.size());
    for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].objective == b.log[i].objective);
    auto other = small_cfg();
    other.seed = 4;
    CHECK_FALSE(train(set, w.inputs(), w.dims, other, w.labeler).params == a.params);
  }

  TEST_CASE("logged objective improves over five epochs") {
    double first = 0.0, last = 0.0;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      testing::TinyWorld w(seed);
      auto cfg = small_cfg();
      cfg.epochs = 5;
      cfg.seed = seed;
      const auto r = train(w.training_set(), w.inputs(), w.dims, cfg, w.labeler);
      REQUIRE(r.log.size() == 5);
      for (const auto& e : r.log) {
        CHECK(std::isfinite(e.objective));
        CHECK(e.objective == doctest::Approx(0.8 * e.global_term + 0.2 * e.local_term).epsilon(1e-9));
      }
      first += r.log.front().objective;
      last += r.log.back().objective;
    }
    CHECK(last >= first);
  }

  TEST_CASE("convergence schedule stops within the cap") {
    testing::TinyWorld w;
    auto cfg = small_cfg();
    cfg.until_converged = true;
    cfg.patience = 1;
    cfg.max_epochs = 4;
    const auto r = train(w.training_set(), w.inputs(), w.dims, cfg, w.labeler);
    CHECK(r.log.size() >= 2);
    CHECK(r.log.size() <= 4);
  }

  TEST_CASE("non-finite objectives abort with a divergence error") {
    testing::TinyWorld w;
    NodeEmbeddingTable poisoned = w.temporal;
    poisoned.vectors.setConstant(std::numeric_limits<double>::quiet_NaN());
    EncoderInputs inputs = w.inputs();
    inputs.temporal = &poisoned;
    CHECK_THROWS_AS(train(w.training_set(), inputs, w.dims, small_cfg(), w.labeler), DivergenceError);
    // The same table is harmless when temporal inputs are zeroed.
    auto cfg = small_cfg();
    cfg.no_temporal = true;
    CHECK_NOTHROW(train(w.training_set(), inputs, w.dims, cfg, w.labeler));
  }

  TEST_CASE("epochs over a subset touch only that subset") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    Trainer t(w.inputs(), w.init(), small_cfg(), w.labeler);
    std::vector<std::size_t> order(set.size() / 2);
    std::iota(order.begin(), order.end(), 0);
    const auto log = t.run_epoch(set, order, "stage1");
    CHECK(log.stage == "stage1");
    CHECK(log.epoch == 1);
    CHECK(t.log().size() == 1);
    CHECK_FALSE(t.params() == w.init());
  }

  TEST_CASE("encode_all matches per-path encoding") {
    testing::TinyWorld w;
    const auto p = w.init();
    std::vector<TemporalPath> tps;
    for (std::size_t i = 0; i < 5; ++i) tps.push_back(w.samples[i].record.tp);
    const auto all = encode_all(tps, p, w.inputs());
    REQUIRE(all.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(all[i] == encode(tps[i], p, w.inputs()).tpr);
  }

  TEST_CASE("pair separation is positive mean cosine minus negative mean cosine") {
    const WeakLabel mor{LabelScheme::pop, kMorningPeak};
    auto item = [&](EdgeId e, int minute) {
      return LabeledPath{0, TemporalPath{Path{{e}}, make_timestamp(2024, 1, 2, 8, minute)}, mor};
    };
    const auto b = Batch::from_items({item(1, 0), item(1, 5), item(2, 0), item(2, 5)});
    const std::vector<Eigen::VectorXd> z = {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
                                            Eigen::Vector2d(0, 1)};
    CHECK(pair_separation(b, z) == doctest::Approx(1.0));
    const std::vector<Eigen::VectorXd> flipped = {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1), Eigen::Vector2d(-1, 0),
                                                  Eigen::Vector2d(0, 1)};
    // Positive pairs: cos45 and 0; negatives: -1, 0, -cos45, cos45.
    const double c45 = std::sqrt(0.5);
    CHECK(pair_separation(b, flipped) == doctest::Approx((c45 + 0.0) / 2.0 - (-1.0 + 0.0 - c45 + c45) / 4.0));
  }

  TEST_CASE("training log has the documented header") {
    std::vector<EpochLog> log = {{1, "stage1", -1.5, -2.0, 0.5, 0.25}};
    std::stringstream ss;
    write_train_log(ss, log, "abc");
    std::string line;
    std::getline(ss, line);
    CHECK(line == "# config_hash=abc");
    std::getline(ss, line);
    CHECK(line == "epoch,objective,global_term,local_term,wallclock_s");
    std::getline(ss, line);
    CHECK(line == "1,-1.5,-2,0.5,0.25");
  }
}
