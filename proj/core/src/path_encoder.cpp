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

#include "tprlab/path_encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "tprlab/error.hpp"
#include "tprlab/temporal_graph.hpp"

namespace tprlab {

void EncoderDims::validate() const {
  if (road_type < 1 || num_lanes < 1 || one_way < 1 || traffic_signals < 1 || road_node < 1 || temporal < 1 ||
      hidden < 1)
    throw ConfigError("encoder dimensions must be positive");
  if (layers < 1) throw ConfigError("encoder needs at least one LSTM layer");
}

EncoderParams::EncoderParams(EncoderDims dims, VocabSizes vocab) : dims_(dims), vocab_(vocab) {
  dims_.validate();
  if (vocab.road_type < 1 || vocab.num_lanes < 1 || vocab.one_way < 1 || vocab.traffic_signals < 1)
    throw ConfigError("vocabulary sizes must include the UNK row");
  params_.add("embed.road_type", vocab.road_type, dims.road_type);
  params_.add("embed.num_lanes", vocab.num_lanes, dims.num_lanes);
  params_.add("embed.one_way", vocab.one_way, dims.one_way);
  params_.add("embed.traffic_signals", vocab.traffic_signals, dims.traffic_signals);
  const int h = dims.hidden;
  for (int l = 0; l < dims.layers; ++l) {
    const int in = l == 0 ? dims.input() : h;
    const std::string prefix = "lstm" + std::to_string(l);
    params_.add(prefix + ".w_input", 4 * h, in);
    params_.add(prefix + ".w_recurrent", 4 * h, h);
    params_.add(prefix + ".bias", 4 * h, 1);
  }
}

EncoderParams EncoderParams::initialize(EncoderDims dims, VocabSizes vocab, std::uint64_t seed) {
  EncoderParams p(dims, vocab);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t t = 0; t < 4; ++t) {
    auto m = p.params_.tensor(t);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = normal(rng);
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(dims.hidden));
  std::uniform_real_distribution<double> unif(-bound, bound);
  for (int l = 0; l < dims.layers; ++l) {
    for (auto idx : {p.lstm_input_weights(l), p.lstm_recurrent_weights(l), p.lstm_bias(l)}) {
      auto m = p.params_.tensor(idx);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = unif(rng);
    }
    p.params_.tensor(p.lstm_bias(l)).middleRows(dims.hidden, dims.hidden).setOnes();
  }
  return p;
}

void EncoderInputs::validate(const EncoderDims& dims) const {
  if (!network || !temporal || !road) throw ContractViolation("encoder inputs are incomplete");
  if (temporal->dim() != dims.temporal || temporal->count() != static_cast<std::size_t>(kTemporalNodes))
    throw ContractViolation("temporal table must be 2016 x " + std::to_string(dims.temporal));
  if (road->dim() != dims.road_node || road->count() != network->node_count())
    throw ContractViolation("road node table must be |V| x " + std::to_string(dims.road_node));
}

namespace {

int clamp_category(int index, Eigen::Index rows) {
  return (index >= 0 && index < rows) ? index : FeatureVocabulary::kUnknown;
}

EdgeCategories resolve_categories(const Edge& edge, const EncoderParams& params) {
  const auto& ps = params.params();
  return {clamp_category(edge.categories.road_type, ps.info(params.road_type_table()).rows),
          clamp_category(edge.categories.num_lanes, ps.info(params.num_lanes_table()).rows),
          clamp_category(edge.categories.one_way, ps.info(params.one_way_table()).rows),
          clamp_category(edge.categories.traffic_signals, ps.info(params.signals_table()).rows)};
}

template <typename Out>
void fill_spatial(Out&& out, const Edge& edge, const EdgeCategories& cat, const EncoderParams& params,
                  const NodeEmbeddingTable& road) {
  const auto& d = params.dims();
  const auto& ps = params.params();
  Eigen::Index o = 0;
  out.segment(o, d.road_node) = road.vectors.row(edge.from).transpose();
  o += d.road_node;
  out.segment(o, d.road_node) = road.vectors.row(edge.to).transpose();
  o += d.road_node;
  out.segment(o, d.road_type) = ps.tensor(params.road_type_table()).row(cat.road_type).transpose();
  o += d.road_type;
  out.segment(o, d.num_lanes) = ps.tensor(params.num_lanes_table()).row(cat.num_lanes).transpose();
  o += d.num_lanes;
  out.segment(o, d.one_way) = ps.tensor(params.one_way_table()).row(cat.one_way).transpose();
  o += d.one_way;
  out.segment(o, d.traffic_signals) = ps.tensor(params.signals_table()).row(cat.traffic_signals).transpose();
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Eigen::VectorXd spatial_embed(const Edge& edge, const EncoderParams& params, const NodeEmbeddingTable& road_table) {
  Eigen::VectorXd out(params.dims().spatial());
  fill_spatial(out.segment(0, out.size()), edge, resolve_categories(edge, params), params, road_table);
  return out;
}

EncodeResult encode(const TemporalPath& tp, const EncoderParams& params, const EncoderInputs& inputs,
                    SequenceCache* cache) {
  const auto& d = params.dims();
  const auto n = static_cast<Eigen::Index>(tp.path.edges.size());
  if (n == 0) throw ContractViolation("encode: empty path");
  const int h = d.hidden;

  SequenceCache local;
  SequenceCache& c = cache ? *cache : local;
  c.input.resize(d.input(), n);
  c.categories.resize(static_cast<std::size_t>(n));
  c.gates.resize(static_cast<std::size_t>(d.layers));
  c.cells.resize(static_cast<std::size_t>(d.layers));
  c.hiddens.resize(static_cast<std::size_t>(d.layers));

  Eigen::VectorXd temporal = Eigen::VectorXd::Zero(d.temporal);
  if (!inputs.zero_temporal) temporal = inputs.temporal->vectors.row(departure_to_node(tp.departure).index()).transpose();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Edge& e = inputs.network->edge(tp.path.edges[static_cast<std::size_t>(j)]);
    auto cat = resolve_categories(e, params);
    c.categories[static_cast<std::size_t>(j)] = cat;
    c.input.col(j).head(d.temporal) = temporal;
    fill_spatial(c.input.col(j).segment(d.temporal, d.spatial()), e, cat, params, *inputs.road);
  }

  const auto& ps = params.params();
  const Eigen::MatrixXd* layer_in = &c.input;
  for (int l = 0; l < d.layers; ++l) {
    const auto W = ps.tensor(params.lstm_input_weights(l));
    const auto U = ps.tensor(params.lstm_recurrent_weights(l));
    const auto b = ps.tensor(params.lstm_bias(l));
    auto& G = c.gates[static_cast<std::size_t>(l)];
    auto& C = c.cells[static_cast<std::size_t>(l)];
    auto& H = c.hiddens[static_cast<std::size_t>(l)];
    G.noalias() = W * (*layer_in);
    G.colwise() += b.col(0);
    C.resize(h, n);
    H.resize(h, n);
    Eigen::VectorXd z(4 * h);
    for (Eigen::Index t = 0; t < n; ++t) {
      z = G.col(t);
      if (t > 0) z.noalias() += U * H.col(t - 1);
      for (int k = 0; k < h; ++k) {
        const double i = sigmoid(z(k));
        const double f = sigmoid(z(h + k));
        const double g = std::tanh(z(2 * h + k));
        const double o = sigmoid(z(3 * h + k));
        const double c_prev = t > 0 ? C(k, t - 1) : 0.0;
        const double cell = f * c_prev + i * g;
        G(k, t) = i;
        G(h + k, t) = f;
        G(2 * h + k, t) = g;
        G(3 * h + k, t) = o;
        C(k, t) = cell;
        H(k, t) = o * std::tanh(cell);
      }
    }
    layer_in = &H;
  }

  EncodeResult r;
  r.edge_reprs = c.hiddens.back();
  r.tpr = r.edge_reprs.rowwise().mean();
  return r;
}

void backward(const EncoderParams& params, const SequenceCache& c, const Eigen::MatrixXd& d_outputs,
              ParameterSet& grads) {
  const auto& d = params.dims();
  const int h = d.hidden;
  const Eigen::Index n = c.input.cols();
  if (d_outputs.rows() != h || d_outputs.cols() != n) throw ContractViolation("backward: gradient shape mismatch");
  const auto& ps = params.params();

  Eigen::MatrixXd dH = d_outputs;
  Eigen::MatrixXd dZ(4 * h, n);
  Eigen::VectorXd dh(h), dc(h), dh_next(h), dc_next(h);
  for (int l = d.layers - 1; l >= 0; --l) {
    const auto& G = c.gates[static_cast<std::size_t>(l)];
    const auto& C = c.cells[static_cast<std::size_t>(l)];
    const auto& H = c.hiddens[static_cast<std::size_t>(l)];
    const auto W = ps.tensor(params.lstm_input_weights(l));
    const auto U = ps.tensor(params.lstm_recurrent_weights(l));
    dh_next.setZero();
    dc_next.setZero();
    for (Eigen::Index t = n - 1; t >= 0; --t) {
      dh = dH.col(t) + dh_next;
      for (int k = 0; k < h; ++k) {
        const double i = G(k, t), f = G(h + k, t), g = G(2 * h + k, t), o = G(3 * h + k, t);
        const double tc = std::tanh(C(k, t));
        const double c_prev = t > 0 ? C(k, t - 1) : 0.0;
        const double dck = dh(k) * o * (1.0 - tc * tc) + dc_next(k);
        dZ(k, t) = dck * g * i * (1.0 - i);
        dZ(h + k, t) = dck * c_prev * f * (1.0 - f);
        dZ(2 * h + k, t) = dck * i * (1.0 - g * g);
        dZ(3 * h + k, t) = dh(k) * tc * o * (1.0 - o);
        dc_next(k) = dck * f;
      }
      dh_next.noalias() = U.transpose() * dZ.col(t);
    }
    const Eigen::MatrixXd& layer_in = l == 0 ? c.input : c.hiddens[static_cast<std::size_t>(l - 1)];
    grads.tensor(params.lstm_input_weights(l)).noalias() += dZ * layer_in.transpose();
    if (n > 1)
      grads.tensor(params.lstm_recurrent_weights(l)).noalias() += dZ.rightCols(n - 1) * H.leftCols(n - 1).transpose();
    grads.tensor(params.lstm_bias(l)).col(0) += dZ.rowwise().sum();
    if (l > 0) {
      dH.noalias() = W.transpose() * dZ;
    } else {
      const int off = d.categorical_offset();
      const int width = d.input() - off;
      Eigen::MatrixXd dX = W.middleCols(off, width).transpose() * dZ;
      auto g_rt = grads.tensor(params.road_type_table());
      auto g_nl = grads.tensor(params.num_lanes_table());
      auto g_ow = grads.tensor(params.one_way_table());
      auto g_ts = grads.tensor(params.signals_table());
      for (Eigen::Index t = 0; t < n; ++t) {
        const auto& cat = c.categories[static_cast<std::size_t>(t)];
        Eigen::Index o = 0;
        g_rt.row(cat.road_type) += dX.col(t).segment(o, d.road_type).transpose();
        o += d.road_type;
        g_nl.row(cat.num_lanes) += dX.col(t).segment(o, d.num_lanes).transpose();
        o += d.num_lanes;
        g_ow.row(cat.one_way) += dX.col(t).segment(o, d.one_way).transpose();
        o += d.one_way;
        g_ts.row(cat.traffic_signals) += dX.col(t).segment(o, d.traffic_signals).transpose();
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'T', 'P', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw ParseError("checkpoint truncated");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  auto len = get<std::uint32_t>(in);
  if (len > (1u << 20)) throw ParseError("checkpoint string too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw ParseError("checkpoint truncated");
  return s;
}

}  // namespace

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put_string(out, ckpt.config_hash);
  put_string(out, ckpt.variant);
  const auto& d = ckpt.params.dims();
  for (int v : {d.road_type, d.num_lanes, d.one_way, d.traffic_signals, d.road_node, d.temporal, d.hidden, d.layers})
    put<std::int32_t>(out, v);
  const auto& vs = ckpt.params.vocab();
  for (int v : {vs.road_type, vs.num_lanes, vs.one_way, vs.traffic_signals}) put<std::int32_t>(out, v);
  const auto& ps = ckpt.params.params();
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ps.tensors().size()));
  for (std::size_t i = 0; i < ps.tensors().size(); ++i) {
    const auto& t = ps.info(i);
    put_string(out, t.name);
    put<std::int64_t>(out, t.rows);
    put<std::int64_t>(out, t.cols);
    out.write(reinterpret_cast<const char*>(ps.values().data() + t.offset),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!out) throw ArtifactError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof magic) != 0) throw ParseError("not a tprlab checkpoint");
  auto version = get<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw ParseError("unsupported checkpoint version " + std::to_string(version));
  Checkpoint ckpt;
  ckpt.config_hash = get_string(in);
  ckpt.variant = get_string(in);
  EncoderDims d;
  for (int* f : {&d.road_type, &d.num_lanes, &d.one_way, &d.traffic_signals, &d.road_node, &d.temporal, &d.hidden,
                 &d.layers})
    *f = get<std::int32_t>(in);
  VocabSizes vs;
  for (int* f : {&vs.road_type, &vs.num_lanes, &vs.one_way, &vs.traffic_signals}) *f = get<std::int32_t>(in);
  EncoderParams params(d, vs);
  auto& ps = params.params();
  auto count = get<std::uint32_t>(in);
  if (count != ps.tensors().size()) throw ParseError("checkpoint tensor count mismatch");
  for (std::size_t i = 0; i < count; ++i) {
    const auto& t = ps.info(i);
    auto name = get_string(in);
    auto rows = get<std::int64_t>(in);
    auto cols = get<std::int64_t>(in);
    if (name != t.name || rows != t.rows || cols != t.cols) throw ParseError("checkpoint tensor '" + name + "' mismatch");
    in.read(reinterpret_cast<char*>(ps.values().data() + t.offset), static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw ParseError("checkpoint truncated");
  }
  ckpt.params = std::move(params);
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& file, const Checkpoint& ckpt) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ArtifactError("cannot write " + file.string());
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ArtifactError("cannot open checkpoint " + file.string());
  return read_checkpoint(in);
}

}  // namespace tprlab
