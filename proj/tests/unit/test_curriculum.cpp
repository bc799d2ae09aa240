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
#include <set>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "tprlab/curriculum.hpp"
#include "tprlab/error.hpp"

using namespace tprlab;

namespace {

// Items over single-edge paths with chosen ids; meters follow the edge.
TrainingSet single_edge_set(const RoadNetwork& net, const std::vector<EdgeId>& edges) {
  std::vector<LabeledPath> items;
  for (std::size_t i = 0; i < edges.size(); ++i)
    items.push_back({static_cast<std::int64_t>(100 + i), TemporalPath{Path{{edges[i]}}, make_timestamp(2024, 1, 2, 8)},
                     WeakLabel{}});
  return TrainingSet(std::move(items));
}

void check_partition(const std::vector<std::vector<std::size_t>>& chunks, std::size_t n) {
  std::vector<int> hits(n, 0);
  for (const auto& c : chunks)
    for (auto i : c) hits.at(i)++;
  for (int h : hits) CHECK(h == 1);
}

TrainConfig expert_cfg() {
  TrainConfig c;
  c.batch_size = 8;
  c.epochs = 1;
  c.lr = 1e-2;
  c.patience = 1;
  c.max_epochs = 2;
  return c;
}

}  // namespace

TEST_SUITE("curriculum") {
  TEST_CASE("ten paths in two meta-sets split shortest and longest halves") {
    testing::TinyWorld w;
    std::vector<EdgeId> edges(10);
    for (EdgeId e = 0; e < 10; ++e) edges[static_cast<std::size_t>(e)] = e;
    const auto set = single_edge_set(w.network, edges);
    const auto split = split_meta_sets(set, w.network, 2);
    REQUIRE(split.size() == 2);
    CHECK(split.sets[0].size() == 5);
    CHECK(split.sets[1].size() == 5);
    double max_first = 0.0, min_second = 1e300;
    for (auto i : split.sets[0]) max_first = std::max(max_first, w.network.path_length_m(set.item(i).tp.path));
    for (auto i : split.sets[1]) min_second = std::min(min_second, w.network.path_length_m(set.item(i).tp.path));
    CHECK(max_first <= min_second);
    check_partition(split.sets, set.size());
  }

  TEST_CASE("remainders go to the earlier meta-sets") {
    testing::TinyWorld w;
    std::vector<EdgeId> edges(11);
    for (EdgeId e = 0; e < 11; ++e) edges[static_cast<std::size_t>(e)] = e;
    const auto split = split_meta_sets(single_edge_set(w.network, edges), w.network, 2);
    CHECK(split.sets[0].size() == 6);
    CHECK(split.sets[1].size() == 5);
    const auto three = split_meta_sets(single_edge_set(w.network, edges), w.network, 3);
    CHECK(three.sets[0].size() == 4);
    CHECK(three.sets[1].size() == 4);
    CHECK(three.sets[2].size() == 3);
  }

  TEST_CASE("equal lengths are ordered by path id") {
    testing::TinyWorld w;
    const std::vector<EdgeId> edges(6, 2);
    const auto set = single_edge_set(w.network, edges);
    const auto split = split_meta_sets(set, w.network, 2);
    CHECK(split.sets[0] == std::vector<std::size_t>{0, 1, 2});
    CHECK(split.sets[1] == std::vector<std::size_t>{3, 4, 5});
    CHECK(split.owner_of(4) == 1);
    CHECK_THROWS_AS(split.owner_of(6), LookupError);
    CHECK_THROWS_AS(split_meta_sets(set, w.network, 0), ConfigError);
    CHECK_THROWS_AS(split_meta_sets(set, w.network, 7), ConfigError);
  }

  TEST_CASE("difficulty score hand-computed values") {
    const std::vector<Eigen::VectorXd> same(4, Eigen::Vector2d(0.3, 0.4));
    CHECK(difficulty_score(same, 2) == doctest::Approx(3.0).epsilon(1e-12));
    const std::vector<Eigen::VectorXd> orth = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 2)};
    CHECK(difficulty_score(orth, 0) == doctest::Approx(0.0).epsilon(1e-12));
    const std::vector<Eigen::VectorXd> three = {Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, std::sqrt(0.75)),
                                                Eigen::Vector2d(-0.25, std::sqrt(1.0 - 0.0625))};
    CHECK(difficulty_score(three, 0) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_THROWS_AS(difficulty_score(three, 3), LookupError);
  }

  TEST_CASE("four scored items in two stages keep the easiest first") {
    std::vector<LabeledPath> items;
    for (int i = 0; i < 4; ++i)
      items.push_back({i, TemporalPath{Path{{i}}, make_timestamp(2024, 1, 2, 8)}, WeakLabel{}});
    const TrainingSet set(std::move(items));
    const std::vector<double> scores = {1.0, 3.0, 0.0, 2.0};
    const auto plan = build_plan(set, scores, 2, 9);
    REQUIRE(plan.stage_count() == 2);
    CHECK(std::set<std::size_t>(plan.stages[0].begin(), plan.stages[0].end()) == std::set<std::size_t>{1, 3});
    CHECK(std::set<std::size_t>(plan.stages[1].begin(), plan.stages[1].end()) == std::set<std::size_t>{0, 2});
    CHECK(plan.stage_of == std::vector<int>{2, 1, 2, 1});
    const auto one = build_plan(set, scores, 1, 9);
    REQUIRE(one.stage_count() == 1);
    CHECK(one.stages[0].size() == 4);
    CHECK_THROWS_AS(build_plan(set, scores, 0, 9), ConfigError);
  }

  TEST_CASE("plans are partitions with non-increasing mean difficulty") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(-9.0, 9.0);
    std::vector<LabeledPath> items;
    for (int i = 0; i < 103; ++i)
      items.push_back({i, TemporalPath{Path{{i % 7}}, make_timestamp(2024, 1, 2, 8)}, WeakLabel{}});
    const TrainingSet set(std::move(items));
    std::vector<double> scores(set.size());
    for (auto& s : scores) s = std::round(u(rng));  // ties exercise the id order
    const auto plan = build_plan(set, scores, 10, 1);
    REQUIRE(plan.stage_count() == 10);
    check_partition(plan.stages, set.size());
    double prev = 1e300;
    for (std::size_t m = 0; m < plan.stage_count(); ++m) {
      CHECK(plan.stages[m].size() == (m < 3 ? 11u : 10u));
      double mean = 0.0, lo = 1e300;
      for (auto i : plan.stages[m]) {
        mean += scores[i];
        lo = std::min(lo, scores[i]);
        CHECK(plan.stage_of[i] == static_cast<int>(m) + 1);
      }
      mean /= static_cast<double>(plan.stages[m].size());
      CHECK(mean <= prev);
      prev = mean;
      if (m + 1 < plan.stage_count())
        for (auto j : plan.stages[m + 1]) CHECK(scores[j] <= lo);
    }
    CHECK(build_plan(set, scores, 10, 1).stages == plan.stages);
    CHECK_FALSE(build_plan(set, scores, 10, 2).stages == plan.stages);
  }

  TEST_CASE("one expert trains on the full set; experts are deterministic and seed dependent") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    const auto one = split_meta_sets(set, w.network, 1);
    CHECK(one.sets[0].size() == set.size());
    const auto pool1 = train_experts(set, one, w.inputs(), w.dims, expert_cfg(), w.labeler);
    CHECK(pool1.experts.size() == 1);
    const auto two = split_meta_sets(set, w.network, 2);
    const auto a = train_experts(set, two, w.inputs(), w.dims, expert_cfg(), w.labeler);
    const auto b = train_experts(set, two, w.inputs(), w.dims, expert_cfg(), w.labeler);
    REQUIRE(a.experts.size() == 2);
    CHECK(a.experts[0] == b.experts[0]);
    CHECK(a.experts[1] == b.experts[1]);
    CHECK_FALSE(a.experts[0] == a.experts[1]);
  }

  TEST_CASE("identical experts score every item N-1") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    const auto split = split_meta_sets(set, w.network, 3);
    ExpertPool pool;
    pool.experts.assign(3, w.init());
    for (double s : score_items(set, split, pool, w.inputs())) CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("learned curriculum scores lie in range and stages partition the data") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    CurriculumConfig cc;
    cc.meta_sets = 3;
    cc.stages = 3;
    const auto r = run_curriculum(set, w.inputs(), w.dims, expert_cfg(), cc, w.labeler);
    REQUIRE(r.plan.has_value());
    CHECK(r.plan->stage_count() == 3);
    check_partition(r.plan->stages, set.size());
    for (double s : r.plan->scores) {
      CHECK(s >= -2.0 - 1e-12);
      CHECK(s <= 2.0 + 1e-12);
    }
    REQUIRE(r.trained.log.size() >= 4);
    CHECK(r.trained.log[0].stage == "stage1");
    CHECK(r.trained.log[2].stage == "stage3");
    CHECK(r.trained.log[3].stage == "stage4");
    CHECK(r.trained.log.size() <= 3 + 2);
  }

  TEST_CASE("heuristic curriculum ranks shorter paths as easier") {
    testing::TinyWorld w;
    const auto set = w.training_set();
    CurriculumConfig cc;
    cc.mode = CurriculumMode::heuristic;
    cc.stages = 4;
    const auto r = run_curriculum(set, w.inputs(), w.dims, expert_cfg(), cc, w.labeler);
    REQUIRE(r.plan.has_value());
    for (std::size_t i = 0; i < set.size(); ++i)
      CHECK(r.plan->scores[i] == -static_cast<double>(set.item(i).tp.path.size()));
  }

  TEST_CASE("no-curriculum mode trains without a plan") {
    testing::TinyWorld w;
    CurriculumConfig cc;
    cc.mode = CurriculumMode::none;
    const auto r = run_curriculum(w.training_set(), w.inputs(), w.dims, expert_cfg(), cc, w.labeler);
    CHECK_FALSE(r.plan.has_value());
    CHECK_FALSE(r.trained.log.empty());
    CHECK(r.trained.log.size() <= 2);
  }

  TEST_CASE("plan file lists id, score and stage") {
    std::vector<LabeledPath> items;
    for (int i = 0; i < 2; ++i)
      items.push_back({40 + i, TemporalPath{Path{{i}}, make_timestamp(2024, 1, 2, 8)}, WeakLabel{}});
    const TrainingSet set(std::move(items));
    const std::vector<double> scores = {0.5, 1.5};
    std::stringstream ss;
    write_plan(ss, set, build_plan(set, scores, 2, 1));
    std::string line;
    std::getline(ss, line);
    CHECK(line == "tp_id,score,stage");
    std::getline(ss, line);
    CHECK(line == "41,1.5,1");
    std::getline(ss, line);
    CHECK(line == "40,0.5,2");
  }
}
