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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "tprlab/contrastive.hpp"
#include "tprlab/node2vec.hpp"
#include "tprlab/path_encoder.hpp"
#include "tprlab/synth.hpp"
#include "tprlab/temporal_graph.hpp"
#include "tprlab/trainer.hpp"

namespace {

using namespace tprlab;

NodeEmbeddingTable random_table(std::size_t rows, int dim, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 0.5);
  NodeEmbeddingTable t;
  t.vectors.resize(static_cast<Eigen::Index>(rows), dim);
  for (Eigen::Index i = 0; i < t.vectors.size(); ++i) t.vectors.data()[i] = normal(rng);
  return t;
}

// Default-width encoder over the default 6x6 synthetic network.
struct EncoderFixture {
  SynthConfig synth;
  RoadNetwork network = generate_network(synth);
  Rng rng{5};
  EncoderDims dims;
  NodeEmbeddingTable temporal = random_table(kTemporalNodes, dims.temporal, rng);
  NodeEmbeddingTable road = random_table(network.node_count(), dims.road_node, rng);
  EncoderParams params = EncoderParams::initialize(dims, VocabSizes::of(network.vocabularies()), 9);
  std::vector<SynthSample> samples = generate_samples(network, synth, 40, "paths");

  EncoderInputs inputs() const { return {&network, &temporal, &road, false}; }
};

EncoderFixture& encoder_fixture() {
  static EncoderFixture f;
  return f;
}

void BM_EncodeForward(benchmark::State& state) {
  auto& f = encoder_fixture();
  const auto inputs = f.inputs();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode(f.samples[i % f.samples.size()].record.tp, f.params, inputs).tpr.data());
    ++i;
  }
}
BENCHMARK(BM_EncodeForward);

void BM_EncodeForwardBackward(benchmark::State& state) {
  auto& f = encoder_fixture();
  const auto inputs = f.inputs();
  ParameterSet grads = f.params.params().zeros_like();
  std::size_t i = 0;
  for (auto _ : state) {
    SequenceCache cache;
    const auto r = encode(f.samples[i % f.samples.size()].record.tp, f.params, inputs, &cache);
    backward(f.params, cache, Eigen::MatrixXd::Ones(r.edge_reprs.rows(), r.edge_reprs.cols()), grads);
    ++i;
  }
}
BENCHMARK(BM_EncodeForwardBackward);

void BM_BatchObjective(benchmark::State& state) {
  auto& f = encoder_fixture();
  const auto inputs = f.inputs();
  const WeakLabeler labeler;
  std::vector<LabeledPath> items;
  for (const auto& s : f.samples) items.push_back({s.record.id, s.record.tp, labeler(s.record.tp.departure)});
  const TrainingSet set(std::move(items));
  const TrainConfig cfg;
  Rng rng(3);
  const Batch batch = make_batch(set, cfg.batch_size, labeler, rng);
  std::vector<EdgeSampleSets> sets;
  for (std::size_t i = 0; i < batch.size(); ++i)
    sets.push_back(sample_edge_sets(batch, static_cast<int>(i), cfg.k_edges, rng));
  ParameterSet grads = f.params.params().zeros_like();
  for (auto _ : state) benchmark::DoNotOptimize(batch_objective(batch, sets, f.params, inputs, cfg, &grads).objective);
}
BENCHMARK(BM_BatchObjective)->Unit(benchmark::kMillisecond);

void BM_TemporalWalks(benchmark::State& state) {
  const auto graph = build_temporal_graph();
  Node2VecConfig cfg;
  cfg.walks_per_node = 1;
  for (auto _ : state) benchmark::DoNotOptimize(biased_walks(graph.adjacency(), cfg).size());
}
BENCHMARK(BM_TemporalWalks)->Unit(benchmark::kMillisecond);

void BM_SkipGramEpoch(benchmark::State& state) {
  const auto graph = build_temporal_graph();
  Node2VecConfig cfg;
  cfg.walks_per_node = 1;
  cfg.epochs = 1;
  cfg.dim = static_cast<int>(state.range(0));
  const auto walks = biased_walks(graph.adjacency(), cfg);
  for (auto _ : state) benchmark::DoNotOptimize(train_skipgram(walks, graph.node_count(), cfg).vectors.data());
}
BENCHMARK(BM_SkipGramEpoch)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
