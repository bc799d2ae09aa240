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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "tprlab/contrastive.hpp"
#include "tprlab/node2vec.hpp"
#include "tprlab/path_encoder.hpp"
#include "tprlab/synth.hpp"
#include "tprlab/trainer.hpp"

namespace tprlab::testing {

inline SynthConfig tiny_synth(std::uint64_t seed = 7) {
  SynthConfig c;
  c.grid_w = 3;
  c.grid_h = 3;
  c.n_paths = 60;
  c.group_size = 3;
  c.od_pool = 8;
  c.seed = seed;
  return c;
}

inline EncoderDims tiny_dims() {
  EncoderDims d;
  d.road_type = 3;
  d.num_lanes = 2;
  d.one_way = 2;
  d.traffic_signals = 2;
  d.road_node = 3;
  d.temporal = 4;
  d.hidden = 5;
  d.layers = 2;
  return d;
}

inline NodeEmbeddingTable random_table(std::size_t rows, int dim, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  NodeEmbeddingTable t;
  t.vectors.resize(static_cast<Eigen::Index>(rows), dim);
  for (Eigen::Index r = 0; r < t.vectors.rows(); ++r)
    for (Eigen::Index c = 0; c < t.vectors.cols(); ++c) t.vectors(r, c) = normal(rng);
  return t;
}

/// Small network, random frozen tables and a labeled path pool. Not movable:
/// inputs() points into the members.
struct TinyWorld {
  SynthConfig synth;
  RoadNetwork network;
  NodeEmbeddingTable temporal;
  NodeEmbeddingTable road;
  EncoderDims dims;
  std::vector<SynthSample> samples;
  WeakLabeler labeler;

  explicit TinyWorld(std::uint64_t seed = 7)
      : synth(tiny_synth(seed)),
        network(generate_network(synth)),
        temporal(random_table(kTemporalNodes, tiny_dims().temporal, seed + 1)),
        road(random_table(network.node_count(), tiny_dims().road_node, seed + 2)),
        dims(tiny_dims()),
        samples(generate_samples(network, synth, static_cast<std::size_t>(synth.n_paths / synth.group_size),
                                 "paths")) {}
  TinyWorld(const TinyWorld&) = delete;
  TinyWorld& operator=(const TinyWorld&) = delete;

  EncoderInputs inputs(bool zero_temporal = false) const { return {&network, &temporal, &road, zero_temporal}; }
  VocabSizes vocab() const { return VocabSizes::of(network.vocabularies()); }
  EncoderParams init(std::uint64_t seed = 11) const { return EncoderParams::initialize(dims, vocab(), seed); }

  TrainingSet training_set() const {
    std::vector<LabeledPath> items;
    for (const auto& s : samples) items.push_back({s.record.id, s.record.tp, labeler(s.record.tp.departure)});
    return TrainingSet(std::move(items));
  }
};

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tprlab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace tprlab::testing
