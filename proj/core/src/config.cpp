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

#include "tprlab/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tprlab/error.hpp"

namespace tprlab {
namespace {

using nlohmann::json;

json to_json(const Node2VecConfig& c) {
  return {{"dim", c.dim},           {"walks_per_node", c.walks_per_node}, {"walk_length", c.walk_length},
          {"window", c.window},     {"neg_samples", c.neg_samples},       {"p", c.p},
          {"q", c.q},               {"epochs", c.epochs},                 {"lr", c.lr}};
}

void from_json_into(const json& j, Node2VecConfig& c) {
  c.dim = j.at("dim").get<int>();
  c.walks_per_node = j.at("walks_per_node").get<int>();
  c.walk_length = j.at("walk_length").get<int>();
  c.window = j.at("window").get<int>();
  c.neg_samples = j.at("neg_samples").get<int>();
  c.p = j.at("p").get<double>();
  c.q = j.at("q").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.lr = j.at("lr").get<double>();
}

json to_json(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["weak_labels"] = std::string(to_string(c.weak_labels));
  const auto& s = c.synth;
  j["synth"] = {{"grid_w", s.grid_w},
                {"grid_h", s.grid_h},
                {"n_paths", s.n_paths},
                {"group_size", s.group_size},
                {"od_pool", s.od_pool},
                {"peak_slowdown", s.peak_slowdown},
                {"noise_sigma", s.noise_sigma},
                {"min_edge_m", s.min_edge_m},
                {"max_edge_m", s.max_edge_m},
                {"days", s.days},
                {"start", s.start},
                {"speed_base", s.speed_base}};
  j["embed"] = {{"temporal", to_json(c.temporal_embed)}, {"road", to_json(c.road_embed)}};
  const auto& e = c.encoder;
  j["encoder"] = {{"road_type_dim", e.road_type}, {"num_lanes_dim", e.num_lanes}, {"one_way_dim", e.one_way},
                  {"signals_dim", e.traffic_signals}, {"hidden", e.hidden}, {"layers", e.layers}};
  const auto& t = c.train;
  j["train"] = {{"lambda", t.lambda},     {"lr", t.lr},         {"batch_size", t.batch_size},
                {"epochs", t.epochs},     {"k_edges", t.k_edges}, {"temperature", t.temperature},
                {"clip_norm", t.clip_norm}, {"patience", t.patience}, {"min_delta", t.min_delta},
                {"max_epochs", t.max_epochs}, {"label_contrast", t.label_contrast}};
  j["curriculum"] = {{"meta_sets", c.curriculum.meta_sets}, {"stages", c.curriculum.stages}};
  const auto& g = c.gbm;
  j["gbm"] = {{"rounds", g.rounds},
              {"max_depth", g.max_depth},
              {"shrinkage", g.shrinkage},
              {"min_samples_leaf", g.min_samples_leaf},
              {"subsample", g.subsample}};
  j["eval"] = {{"test_fraction", c.eval.test_fraction}, {"heldout_groups", c.eval.heldout_groups}};
  return j;
}

RunConfig from_json(const json& j) {
  RunConfig c;
  c.seed = j.at("seed").get<std::uint64_t>();
  c.weak_labels = parse_label_scheme(j.at("weak_labels").get<std::string>());
  const auto& s = j.at("synth");
  c.synth.grid_w = s.at("grid_w").get<int>();
  c.synth.grid_h = s.at("grid_h").get<int>();
  c.synth.n_paths = s.at("n_paths").get<int>();
  c.synth.group_size = s.at("group_size").get<int>();
  c.synth.od_pool = s.at("od_pool").get<int>();
  c.synth.peak_slowdown = s.at("peak_slowdown").get<double>();
  c.synth.noise_sigma = s.at("noise_sigma").get<double>();
  c.synth.min_edge_m = s.at("min_edge_m").get<double>();
  c.synth.max_edge_m = s.at("max_edge_m").get<double>();
  c.synth.days = s.at("days").get<int>();
  c.synth.start = s.at("start").get<std::string>();
  c.synth.speed_base = s.at("speed_base").get<std::map<std::string, double>>();
  from_json_into(j.at("embed").at("temporal"), c.temporal_embed);
  from_json_into(j.at("embed").at("road"), c.road_embed);
  const auto& e = j.at("encoder");
  c.encoder.road_type = e.at("road_type_dim").get<int>();
  c.encoder.num_lanes = e.at("num_lanes_dim").get<int>();
  c.encoder.one_way = e.at("one_way_dim").get<int>();
  c.encoder.traffic_signals = e.at("signals_dim").get<int>();
  c.encoder.hidden = e.at("hidden").get<int>();
  c.encoder.layers = e.at("layers").get<int>();
  const auto& t = j.at("train");
  c.train.lambda = t.at("lambda").get<double>();
  c.train.lr = t.at("lr").get<double>();
  c.train.batch_size = t.at("batch_size").get<int>();
  c.train.epochs = t.at("epochs").get<int>();
  c.train.k_edges = t.at("k_edges").get<int>();
  c.train.temperature = t.at("temperature").get<double>();
  c.train.clip_norm = t.at("clip_norm").get<double>();
  c.train.patience = t.at("patience").get<int>();
  c.train.min_delta = t.at("min_delta").get<double>();
  c.train.max_epochs = t.at("max_epochs").get<int>();
  c.train.label_contrast = t.at("label_contrast").get<bool>();
  c.curriculum.meta_sets = j.at("curriculum").at("meta_sets").get<int>();
  c.curriculum.stages = j.at("curriculum").at("stages").get<int>();
  const auto& g = j.at("gbm");
  c.gbm.rounds = g.at("rounds").get<int>();
  c.gbm.max_depth = g.at("max_depth").get<int>();
  c.gbm.shrinkage = g.at("shrinkage").get<double>();
  c.gbm.min_samples_leaf = g.at("min_samples_leaf").get<int>();
  c.gbm.subsample = g.at("subsample").get<double>();
  c.eval.test_fraction = j.at("eval").at("test_fraction").get<double>();
  c.eval.heldout_groups = j.at("eval").at("heldout_groups").get<int>();
  c.derive();
  return c;
}

bool same_kind(const json& base, const json& user) {
  if (base.is_number_integer()) return user.is_number_integer();
  if (base.is_number()) return user.is_number();
  return base.type() == user.type();
}

// Overlays `user` on `base`; every user key must already exist in base.
void merge(json& base, const json& user, const std::string& where) {
  if (!user.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string path = where.empty() ? key : where + "." + key;
    if (!base.contains(key)) throw ConfigError("unknown configuration key '" + path + "'");
    json& slot = base[key];
    if (key == "speed_base") {
      if (!value.is_object()) throw ConfigError(path + ": expected an object of road type speeds");
      for (const auto& [rt, v] : value.items())
        if (!v.is_number()) throw ConfigError(path + "." + rt + ": expected a number");
      slot = value;
    } else if (slot.is_object()) {
      merge(slot, value, path);
    } else {
      if (!same_kind(slot, value))
        throw ConfigError(path + ": expected " + std::string(slot.type_name()) + ", got " + value.type_name());
      if (slot.is_number_integer() && slot.is_number_unsigned() == false && value.is_number_unsigned() &&
          value.get<std::uint64_t>() > static_cast<std::uint64_t>(std::numeric_limits<int>::max()))
        throw ConfigError(path + ": value out of range");
      slot = value;
    }
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::wsccl: return "wsccl";
    case Variant::wsc: return "wsc";
    case Variant::no_global: return "no_global";
    case Variant::no_local: return "no_local";
    case Variant::no_temporal: return "no_temporal";
    case Variant::heuristic_cl: return "heuristic_cl";
  }
  throw ContractViolation("unknown variant");
}

Variant parse_variant(std::string_view name) {
  for (auto v : kAllVariants)
    if (to_string(v) == name) return v;
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected wsccl, wsc, no_global, no_local, no_temporal or heuristic_cl)");
}

void EvalConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("eval.test_fraction must be in (0, 1)");
  if (heldout_groups < 1) throw ConfigError("eval.heldout_groups must be >= 1");
}

RunConfig::RunConfig() {
  road_embed.dim = 64;
  derive();
}

void RunConfig::derive() {
  synth.seed = derive_seed(seed, "synth");
  temporal_embed.seed = derive_seed(seed, "embed/temporal");
  road_embed.seed = derive_seed(seed, "embed/road");
  train.seed = derive_seed(seed, "train");
  gbm.seed = derive_seed(seed, "gbm");
  encoder.temporal = temporal_embed.dim;
  encoder.road_node = road_embed.dim;
}

void RunConfig::validate() const {
  synth.validate();
  temporal_embed.validate();
  road_embed.validate();
  encoder.validate();
  train.validate();
  curriculum.validate();
  gbm.validate();
  eval.validate();
  if (encoder.temporal != temporal_embed.dim || encoder.road_node != road_embed.dim)
    throw ConfigError("encoder widths must match the embedding dims");
}

RunConfig parse_config(std::string_view json_text, const std::string& source_name) {
  json user;
  try {
    user = json::parse(json_text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(source_name + ": " + e.what());
  }
  json base = to_json(RunConfig());
  try {
    merge(base, user, "");
  } catch (const ConfigError& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  RunConfig cfg = from_json(base);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("cannot open config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

std::string canonical_json(const RunConfig& cfg) { return to_json(cfg).dump(); }

std::string config_hash(const RunConfig& cfg) { return to_hex(fnv1a64(canonical_json(cfg))); }

VariantSetup variant_setup(const RunConfig& cfg, Variant v) {
  VariantSetup s{cfg.train, cfg.curriculum};
  s.curriculum.mode = CurriculumMode::learned;
  switch (v) {
    case Variant::wsccl: break;
    case Variant::wsc: s.curriculum.mode = CurriculumMode::none; break;
    case Variant::no_global: s.train.no_global = true; break;
    case Variant::no_local: s.train.no_local = true; break;
    case Variant::no_temporal: s.train.no_temporal = true; break;
    case Variant::heuristic_cl: s.curriculum.mode = CurriculumMode::heuristic; break;
  }
  s.train.seed = derive_seed(cfg.seed, "train");
  return s;
}

}  // namespace tprlab
