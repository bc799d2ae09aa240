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
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "tprlab/contrastive.hpp"
#include "tprlab/error.hpp"

using namespace tprlab;

namespace {

const WeakLabel kMor{LabelScheme::pop, kMorningPeak};
const WeakLabel kAft{LabelScheme::pop, kAfternoonPeak};
const WeakLabel kOff{LabelScheme::pop, kOffPeak};

LabeledPath lp(std::vector<EdgeId> edges, WeakLabel label, int minute = 0, std::int64_t id = 0) {
  return {id, TemporalPath{Path{std::move(edges)}, make_timestamp(2024, 1, 2, 8, minute)}, label};
}

double naive_cos(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double ab = 0, aa = 0, bb = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    ab += a(i) * b(i);
    aa += a(i) * a(i);
    bb += b(i) * b(i);
  }
  return ab / std::sqrt(aa * bb);
}

// Direct transcription of the global objective with plain loops.
double naive_global(const Batch& b, const std::vector<Eigen::VectorXd>& z, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) {
    double denom = 0.0;
    for (int k : b.negatives[i]) denom += std::exp(naive_cos(z[i], z[static_cast<std::size_t>(k)]) / tau);
    double q = 0.0;
    for (int j : b.positives[i]) q += std::log(std::exp(naive_cos(z[i], z[static_cast<std::size_t>(j)]) / tau) / denom);
    total += q / static_cast<double>(b.positives[i].size());
  }
  return total;
}

double naive_local(const std::vector<Eigen::VectorXd>& z, const std::vector<Eigen::MatrixXd>& e,
                   const std::vector<EdgeSampleSets>& sets, double tau) {
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double num = 0.0, den = 0.0;
    for (const auto& s : sets[i].positive)
      num += std::exp(naive_cos(z[i], e[static_cast<std::size_t>(s.item)].col(s.position)) / tau);
    for (const auto& s : sets[i].negative)
      den += std::exp(naive_cos(z[i], e[static_cast<std::size_t>(s.item)].col(s.position)) / tau);
    total += std::log(num / den) / static_cast<double>(sets[i].positive.size());
  }
  return total;
}

Eigen::VectorXd random_vec(int n, Rng& rng) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = normal(rng);
  return v;
}

// Four path/label groups of two over two paths: same-path and same-label
// negatives both occur.
Batch mixed_batch() {
  return Batch::from_items({lp({1, 2, 3, 4}, kMor, 0), lp({1, 2, 3, 4}, kMor, 20), lp({1, 2, 3, 4}, kOff, 0),
                            lp({1, 2, 3, 4}, kOff, 7), lp({5, 6, 7}, kAft, 0), lp({5, 6, 7}, kAft, 9),
                            lp({5, 6, 7}, kMor, 1), lp({5, 6, 7}, kMor, 40)});
}

}  // namespace

TEST_SUITE("contrastive") {
  TEST_CASE("pairs are positive only for equal path and equal label") {
    CHECK(classify_pair(lp({1, 2, 3, 4}, kMor, 0), lp({1, 2, 3, 4}, kMor, 30)) == PairKind::positive);
    CHECK(classify_pair(lp({1, 2, 3, 4}, kMor), lp({1, 2, 3, 4}, kOff)) == PairKind::negative);
    CHECK(classify_pair(lp({1, 2, 3, 4}, kMor), lp({5, 6, 7}, kMor)) == PairKind::negative);
    CHECK(classify_pair(lp({1, 2, 3, 4}, kMor), lp({5, 6, 7}, kOff)) == PairKind::negative);
  }

  TEST_CASE("batch index sets partition every query's complement") {
    const auto b = mixed_batch();
    for (std::size_t i = 0; i < b.size(); ++i) {
      std::set<int> seen;
      for (int j : b.positives[i]) {
        CHECK(classify_pair(b.items[i], b.items[static_cast<std::size_t>(j)]) == PairKind::positive);
        CHECK(seen.insert(j).second);
      }
      for (int k : b.negatives[i]) {
        CHECK(classify_pair(b.items[i], b.items[static_cast<std::size_t>(k)]) == PairKind::negative);
        CHECK(seen.insert(k).second);
      }
      CHECK(seen.count(static_cast<int>(i)) == 0);
      CHECK(seen.size() == b.size() - 1);
    }
    CHECK_NOTHROW(b.validate());
  }

  TEST_CASE("batches with a lonely query fail validation") {
    const auto b = Batch::from_items({lp({1}, kMor, 0), lp({1}, kMor, 3), lp({2}, kMor, 0)});
    CHECK_THROWS_AS(b.validate(), ContractViolation);
  }

  TEST_CASE("training set groups by path and label") {
    const TrainingSet set({lp({1, 2}, kMor, 0, 10), lp({1, 2}, kMor, 5, 11), lp({1, 2}, kOff, 0, 12),
                           lp({3}, kMor, 0, 13)});
    CHECK(set.group_count() == 3);
    CHECK(set.group_of(0) == set.group_of(1));
    CHECK(set.group_of(0) != set.group_of(2));
    const std::vector<std::size_t> keep = {3, 0};
    const auto sub = set.subset(keep);
    REQUIRE(sub.size() == 2);
    CHECK(sub.item(0).id == 13);
    CHECK(sub.group_count() == 2);
  }

  TEST_CASE("batch of four from two groups gives one positive and two negatives per query") {
    const TrainingSet set({lp({1, 2}, kMor, 0, 0), lp({1, 2}, kMor, 9, 1), lp({3}, kMor, 0, 2), lp({3}, kMor, 9, 3)});
    Rng rng(1);
    const auto b = make_batch(set, 4, WeakLabeler(), rng);
    REQUIRE(b.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(b.positives[i].size() == 1);
      CHECK(b.negatives[i].size() == 2);
    }
  }

  TEST_CASE("single-instance groups are augmented with a resampled positive") {
    const TrainingSet set({lp({1, 2}, kMor, 0, 0), lp({3}, kMor, 0, 1)});
    Rng rng(2);
    const auto b = make_batch(set, 4, WeakLabeler(), rng);
    int synthesized = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
      if (b.items[i].id >= 0) continue;
      ++synthesized;
      const int j = b.positives[i].at(0);
      CHECK(b.items[static_cast<std::size_t>(j)].tp.path == b.items[i].tp.path);
      CHECK(b.items[static_cast<std::size_t>(j)].tp.departure != b.items[i].tp.departure);
      CHECK(classify_pair(b.items[i], b.items[static_cast<std::size_t>(j)]) == PairKind::positive);
    }
    CHECK(synthesized == 2);
  }

  TEST_CASE("groups sharing a path under different labels are negatives of each other") {
    const TrainingSet set({lp({1, 2}, kMor, 0, 0), lp({1, 2}, kMor, 9, 1), lp({1, 2}, kOff, 0, 2), lp({1, 2}, kOff, 9, 3)});
    Rng rng(3);
    const auto b = make_batch(set, 4, WeakLabeler(), rng);
    for (std::size_t i = 0; i < b.size(); ++i)
      for (int k : b.negatives[i]) CHECK_FALSE(b.items[static_cast<std::size_t>(k)].label == b.items[i].label);
  }

  TEST_CASE("too few groups is a configuration error") {
    const TrainingSet set({lp({1, 2}, kMor, 0, 0), lp({1, 2}, kMor, 9, 1)});
    Rng rng(4);
    CHECK_THROWS_AS(make_batch(set, 4, WeakLabeler(), rng), ConfigError);
    CHECK_THROWS_AS(make_batch(set, 5, WeakLabeler(), rng), ConfigError);
  }

  TEST_CASE("global objective hand-computed values") {
    // Explicit index sets so every query sees the prescribed |S| and |N|.
    Batch ident;
    ident.items.assign(5, lp({1}, kMor));
    for (int i = 0; i < 5; ++i) {
      ident.positives.push_back({(i + 1) % 5});
      ident.negatives.push_back({(i + 2) % 5, (i + 3) % 5, (i + 4) % 5});
    }
    const std::vector<Eigen::VectorXd> same(5, Eigen::Vector2d(0.3, -1.2));
    // All identical, |S| = 1, |N| = 3: log(e / 3e) = -log 3 per query.
    CHECK(global_loss(ident, same, 1.0) == doctest::Approx(-5.0 * std::log(3.0)).epsilon(1e-12));

    Batch tri;
    tri.items.assign(3, lp({1}, kMor));
    tri.positives = {{1}, {2}, {0}};
    tri.negatives = {{2}, {0}, {1}};
    // Mutually orthogonal, |S| = |N| = 1: log(e^0 / e^0) = 0.
    const std::vector<Eigen::VectorXd> orth = {Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 1, 0),
                                               Eigen::Vector3d(0, 0, 1)};
    CHECK(global_loss(tri, orth, 1.0) == doctest::Approx(0.0).epsilon(1e-12));

    // q = (1,0), pos = (1,0), neg = (-1,0): log(e / e^-1) = 2 for the query;
    // the other two queries contribute log(e / e^-1) = 2 and log(e^-1 / e^-1) = 0.
    Batch qpn;
    qpn.items.assign(3, lp({1}, kMor));
    qpn.positives = {{1}, {0}, {0}};
    qpn.negatives = {{2}, {2}, {1}};
    const std::vector<Eigen::VectorXd> z3 = {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)};
    CHECK(global_loss(qpn, z3, 1.0) == doctest::Approx(2.0 + 2.0 + 0.0).epsilon(1e-12));
    CHECK(naive_global(qpn, z3, 1.0) == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("global objective per-query values through the library") {
    // Queries with empty sets are rejected, so the hand examples are checked
    // as differences between full-batch evaluations.
    const auto b = Batch::from_items({lp({1}, kMor, 0), lp({1}, kMor, 1), lp({2}, kMor, 0), lp({2}, kMor, 1),
                                      lp({3}, kMor, 0), lp({3}, kMor, 1)});
    const std::vector<Eigen::VectorXd> same(6, Eigen::Vector3d(1.0, 2.0, -0.5));
    // Every query: |S| = 1, |N| = 4, all cosines 1 -> log(e / 4e) = -log 4.
    CHECK(global_loss(b, same, 1.0) == doctest::Approx(-6.0 * std::log(4.0)).epsilon(1e-12));

    const auto pair = Batch::from_items({lp({1}, kMor, 0), lp({1}, kMor, 1), lp({2}, kMor, 0), lp({2}, kMor, 1)});
    const std::vector<Eigen::VectorXd> opp = {Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0),
                                              Eigen::Vector2d(-1, 0)};
    // Each query: pos cos 1, two negatives cos -1 -> log(e / 2e^-1) = 2 - log 2.
    CHECK(global_loss(pair, opp, 1.0) == doctest::Approx(4.0 * (2.0 - std::log(2.0))).epsilon(1e-12));
  }

  TEST_CASE("global objective matches the loop oracle on random batches, with gradients") {
    Rng rng(11);
    const auto b = mixed_batch();
    for (double tau : {1.0, 0.5}) {
      std::vector<Eigen::VectorXd> z;
      for (std::size_t i = 0; i < b.size(); ++i) z.push_back(random_vec(4, rng));
      std::vector<Eigen::VectorXd> grad;
      const double v = global_loss(b, z, tau, &grad);
      CHECK(v == doctest::Approx(naive_global(b, z, tau)).epsilon(1e-9));
      for (std::size_t i = 0; i < z.size(); ++i)
        for (int c = 0; c < 4; ++c) {
          auto up = z, dn = z;
          up[i](c) += 1e-6;
          dn[i](c) -= 1e-6;
          const double num = (naive_global(b, up, tau) - naive_global(b, dn, tau)) / 2e-6;
          CHECK(grad[i](c) == doctest::Approx(num).epsilon(1e-5));
        }
    }
  }

  TEST_CASE("global objective rejects queries without negatives") {
    const auto b = Batch::from_items({lp({1}, kMor, 0), lp({1}, kMor, 1)});
    const std::vector<Eigen::VectorXd> z(2, Eigen::Vector2d(1, 0));
    CHECK_THROWS_AS(global_loss(b, z), ContractViolation);
  }

  TEST_CASE("edge sets follow the positive and negative paths") {
    // Query <e1..e4> morning; twin; same path off-peak; <e5..> afternoon and morning.
    const auto b = Batch::from_items({lp({1, 2, 3, 4}, kMor, 0), lp({1, 2, 3, 4}, kMor, 10), lp({1, 2, 3, 4}, kOff, 0),
                                      lp({5, 6, 7}, kAft, 0), lp({5, 6, 7}, kMor, 0)});
    Rng rng(5);
    const auto sets = sample_edge_sets(b, 0, 4, rng);
    auto has = [](const std::vector<EdgeSample>& v, EdgeId e, WeakLabel l) {
      return std::any_of(v.begin(), v.end(), [&](const EdgeSample& s) { return s.edge == e && s.label == l; });
    };
    CHECK(has(sets.positive, 4, kMor));
    CHECK(has(sets.negative, 4, kOff));
    CHECK(has(sets.negative, 5, kAft));
    CHECK(has(sets.negative, 5, kMor));
    CHECK(sets.positive.size() == 4);
    CHECK(sets.negative.size() == 4 + 3 + 3);
  }

  TEST_CASE("edge sampling draws k distinct positions per path") {
    const auto b = mixed_batch();
    Rng rng(6);
    for (int rep = 0; rep < 50; ++rep) {
      const auto sets = sample_edge_sets(b, 0, 2, rng);
      CHECK(sets.positive.size() == 2 * b.positives[0].size());
      CHECK(sets.negative.size() == 2 * b.negatives[0].size());
      for (const auto* v : {&sets.positive, &sets.negative})
        for (std::size_t i = 0; i + 1 < v->size(); i += 2) {
          CHECK((*v)[i].item == (*v)[i + 1].item);
          CHECK((*v)[i].position != (*v)[i + 1].position);
        }
      for (const auto& s : sets.positive)
        CHECK(b.items[static_cast<std::size_t>(s.item)].tp.path.edges[static_cast<std::size_t>(s.position)] == s.edge);
    }
    const auto single = Batch::from_items({lp({9}, kMor, 0), lp({9}, kMor, 3), lp({8}, kOff, 0)});
    const auto s1 = sample_edge_sets(single, 0, 1, rng);
    REQUIRE(s1.positive.size() == 1);
    CHECK(s1.positive[0].edge == 9);
    CHECK(s1.positive[0].label == kMor);
  }

  TEST_CASE("edge sampling is deterministic for a seed") {
    const auto b = mixed_batch();
    Rng a(7), c(7);
    const auto x = sample_edge_sets(b, 3, 1, a), y = sample_edge_sets(b, 3, 1, c);
    REQUIRE(x.negative.size() == y.negative.size());
    for (std::size_t i = 0; i < x.negative.size(); ++i) CHECK(x.negative[i].position == y.negative[i].position);
  }

  TEST_CASE("local objective hand-computed values") {
    // Aligned positive edge, anti-aligned negative edge: log(e / e^-1) = 2.
    const std::vector<Eigen::VectorXd> z = {Eigen::Vector2d(1, 0)};
    std::vector<Eigen::MatrixXd> e = {Eigen::MatrixXd(2, 2)};
    e[0] << 1, -1, 0, 0;
    std::vector<EdgeSampleSets> sets(1);
    sets[0].positive = {{0, 0, 1, kMor}};
    sets[0].negative = {{0, 1, 2, kOff}};
    CHECK(local_loss(z, e, sets) == doctest::Approx(2.0).epsilon(1e-12));

    // Everything identical, |PN| = |NN| = 2: (1/2) log(2e / 2e) = 0.
    std::vector<Eigen::MatrixXd> same = {Eigen::MatrixXd::Constant(2, 4, 0.7)};
    const std::vector<Eigen::VectorXd> zs = {Eigen::Vector2d(0.7, 0.7)};
    sets[0].positive = {{0, 0, 1, kMor}, {0, 1, 1, kMor}};
    sets[0].negative = {{0, 2, 1, kOff}, {0, 3, 1, kOff}};
    CHECK(local_loss(zs, same, sets) == doctest::Approx(0.0).epsilon(1e-12));

    sets[0].positive.clear();
    CHECK_THROWS_AS(local_loss(zs, same, sets), ContractViolation);
  }

  TEST_CASE("local objective matches the loop oracle with gradients") {
    Rng rng(13);
    const auto b = mixed_batch();
    std::vector<Eigen::VectorXd> z;
    std::vector<Eigen::MatrixXd> e;
    std::vector<EdgeSampleSets> sets;
    for (std::size_t i = 0; i < b.size(); ++i) {
      z.push_back(random_vec(3, rng));
      Eigen::MatrixXd m(3, static_cast<Eigen::Index>(b.items[i].tp.path.size()));
      for (Eigen::Index c = 0; c < m.cols(); ++c) m.col(c) = random_vec(3, rng);
      e.push_back(m);
    }
    for (std::size_t i = 0; i < b.size(); ++i) sets.push_back(sample_edge_sets(b, static_cast<int>(i), 2, rng));
    std::vector<Eigen::VectorXd> gz;
    std::vector<Eigen::MatrixXd> ge;
    const double v = local_loss(z, e, sets, 0.7, &gz, &ge);
    CHECK(v == doctest::Approx(naive_local(z, e, sets, 0.7)).epsilon(1e-9));
    for (std::size_t i = 0; i < z.size(); ++i)
      for (int c = 0; c < 3; ++c) {
        auto up = z, dn = z;
        up[i](c) += 1e-6;
        dn[i](c) -= 1e-6;
        const double num = (naive_local(up, e, sets, 0.7) - naive_local(dn, e, sets, 0.7)) / 2e-6;
        CHECK(gz[i](c) == doctest::Approx(num).epsilon(1e-5));
      }
    for (std::size_t i = 0; i < e.size(); ++i)
      for (Eigen::Index k = 0; k < e[i].size(); ++k) {
        auto up = e, dn = e;
        up[i].data()[k] += 1e-6;
        dn[i].data()[k] -= 1e-6;
        const double num = (naive_local(z, up, sets, 0.7) - naive_local(z, dn, sets, 0.7)) / 2e-6;
        CHECK(ge[i].data()[k] == doctest::Approx(num).epsilon(1e-5).scale(1e-8));
      }
  }

  TEST_CASE("joint objective blends the two terms") {
    CHECK(joint_objective(2.0, 5.0, 1.0) == 2.0);
    CHECK(joint_objective(2.0, 5.0, 0.0) == 5.0);
    CHECK(joint_objective(2.0, 0.0, 0.8) == doctest::Approx(1.6).epsilon(1e-15));
  }

  TEST_CASE("log-sum-exp is stable for large magnitudes") {
    const std::vector<double> big = {1000.0, 1000.0};
    CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));
    const std::vector<double> small = {-1000.0, -1001.0};
    CHECK(log_sum_exp(small) == doctest::Approx(-1000.0 + std::log1p(std::exp(-1.0))).epsilon(1e-15));
    const std::vector<double> mixed = {0.1, -0.3, 2.0};
    CHECK(log_sum_exp(mixed) ==
          doctest::Approx(std::log(std::exp(0.1) + std::exp(-0.3) + std::exp(2.0))).epsilon(1e-14));
  }

  TEST_CASE("cosine of a zero vector is zero") {
    CHECK(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)) == 0.0);
    CHECK(cosine(Eigen::Vector2d(2, 0), Eigen::Vector2d(0, 3)) == 0.0);
    CHECK(cosine(Eigen::Vector2d(2, 0), Eigen::Vector2d(-1, 0)) == doctest::Approx(-1.0));
  }
}
