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
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tprlab/node2vec.hpp"
#include "tprlab/parameters.hpp"
#include "tprlab/road_network.hpp"

namespace tprlab {

/// Layer widths of the temporal path encoder.
struct EncoderDims {
  int road_type = 64;
  int num_lanes = 32;
  int one_way = 16;
  int traffic_signals = 16;
  int road_node = 64;   // per endpoint; the edge topology vector is twice this
  int temporal = 128;
  int hidden = 128;
  int layers = 2;

  int spatial() const { return 2 * road_node + road_type + num_lanes + one_way + traffic_signals; }
  int input() const { return temporal + spatial(); }
  /// Offset of the trainable categorical block inside an LSTM input vector.
  int categorical_offset() const { return temporal + 2 * road_node; }

  void validate() const;
  bool operator==(const EncoderDims&) const = default;
};

struct VocabSizes {
  int road_type = 1;
  int num_lanes = 1;
  int one_way = 1;
  int traffic_signals = 1;

  static VocabSizes of(const EdgeVocabularies& v) {
    return {v.road_type.size(), v.num_lanes.size(), v.one_way.size(), v.traffic_signals.size()};
  }
  bool operator==(const VocabSizes&) const = default;
};

/// Trainable encoder state: four categorical embedding tables and a stacked
/// LSTM. Gate order inside every 4H block is (input, forget, cell, output).
class EncoderParams {
 public:
  EncoderParams() = default;
  EncoderParams(EncoderDims dims, VocabSizes vocab);

  /// LSTM weights uniform in +-1/sqrt(hidden), forget-gate bias 1, embedding
  /// rows standard normal.
  static EncoderParams initialize(EncoderDims dims, VocabSizes vocab, std::uint64_t seed);

  const EncoderDims& dims() const { return dims_; }
  const VocabSizes& vocab() const { return vocab_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }

  // Tensor indices into params().
  std::size_t road_type_table() const { return 0; }
  std::size_t num_lanes_table() const { return 1; }
  std::size_t one_way_table() const { return 2; }
  std::size_t signals_table() const { return 3; }
  std::size_t lstm_input_weights(int layer) const { return 4 + 3 * static_cast<std::size_t>(layer); }
  std::size_t lstm_recurrent_weights(int layer) const { return 5 + 3 * static_cast<std::size_t>(layer); }
  std::size_t lstm_bias(int layer) const { return 6 + 3 * static_cast<std::size_t>(layer); }

  bool operator==(const EncoderParams& o) const {
    return dims_ == o.dims_ && vocab_ == o.vocab_ && params_ == o.params_;
  }

 private:
  EncoderDims dims_;
  VocabSizes vocab_;
  ParameterSet params_;
};

/// Frozen inputs shared by every forward pass.
struct EncoderInputs {
  const RoadNetwork* network = nullptr;
  const NodeEmbeddingTable* temporal = nullptr;  // 2016 x dims.temporal
  const NodeEmbeddingTable* road = nullptr;      // |V| x dims.road_node
  bool zero_temporal = false;                    // replace temporal vectors with zeros

  void validate(const EncoderDims& dims) const;
};

/// [n_from, n_to, RT, NoL, OW, TS] for one edge.
Eigen::VectorXd spatial_embed(const Edge& edge, const EncoderParams& params, const NodeEmbeddingTable& road_table);

/// Intermediate values of one forward pass, kept for backpropagation.
struct SequenceCache {
  Eigen::MatrixXd input;                 // input x n
  std::vector<Eigen::MatrixXd> gates;    // per layer, 4H x n, post-activation
  std::vector<Eigen::MatrixXd> cells;    // per layer, H x n
  std::vector<Eigen::MatrixXd> hiddens;  // per layer, H x n
  std::vector<EdgeCategories> categories;
};

struct EncodeResult {
  Eigen::VectorXd tpr;          // hidden
  Eigen::MatrixXd edge_reprs;   // hidden x n, column j is the representation of edge j
};

/// Runs the encoder on one temporal path. Throws ContractViolation on an empty
/// path.
EncodeResult encode(const TemporalPath& tp, const EncoderParams& params, const EncoderInputs& inputs,
                    SequenceCache* cache = nullptr);

/// Backpropagates `d_outputs` (hidden x n, gradient of the loss w.r.t. each
/// top-layer output) and accumulates parameter gradients into `grads`.
void backward(const EncoderParams& params, const SequenceCache& cache, const Eigen::MatrixXd& d_outputs,
              ParameterSet& grads);

/// Versioned binary checkpoint holding every tensor, the dims, vocabulary
/// sizes and the producing config hash.
struct Checkpoint {
  EncoderParams params;
  std::string config_hash;
  std::string variant;
};

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& file);

}  // namespace tprlab
