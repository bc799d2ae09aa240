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

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "tprlab/curriculum.hpp"
#include "tprlab/gbm.hpp"
#include "tprlab/node2vec.hpp"
#include "tprlab/path_encoder.hpp"
#include "tprlab/synth.hpp"
#include "tprlab/trainer.hpp"
#include "tprlab/weak_labels.hpp"

namespace tprlab {

enum class Variant { wsccl, wsc, no_global, no_local, no_temporal, heuristic_cl };

inline constexpr std::array<Variant, 6> kAllVariants = {Variant::wsccl,    Variant::wsc,         Variant::no_global,
                                                        Variant::no_local, Variant::no_temporal, Variant::heuristic_cl};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct EvalConfig {
  double test_fraction = 0.2;  // share of ranking groups held out for testing
  int heldout_groups = 40;     // groups in the held-out separation sample

  void validate() const;
};

/// Every tunable of the pipeline. Module seeds are derived from `seed`.
struct RunConfig {
  std::uint64_t seed = 1;
  LabelScheme weak_labels = LabelScheme::pop;
  SynthConfig synth;
  Node2VecConfig temporal_embed;
  Node2VecConfig road_embed;
  EncoderDims encoder;
  TrainConfig train;
  CurriculumConfig curriculum;
  GbmConfig gbm;
  EvalConfig eval;

  RunConfig();

  /// Copies `seed` into every module seed through named streams and the
  /// embedding widths into the encoder dims.
  void derive();
  void validate() const;
};

/// Parses a JSON document over the defaults. Unknown keys are rejected with
/// ConfigError naming the full key path.
RunConfig parse_config(std::string_view json_text, const std::string& source_name = "<config>");
RunConfig load_config(const std::filesystem::path& file);

/// Canonical JSON of the effective configuration (sorted keys, no
/// whitespace). Variant and output directory are not part of it.
std::string canonical_json(const RunConfig& cfg);
/// 16 hex digits of FNV-1a over canonical_json.
std::string config_hash(const RunConfig& cfg);

/// Training switches of a variant applied on top of the base configuration.
struct VariantSetup {
  TrainConfig train;
  CurriculumConfig curriculum;
};
VariantSetup variant_setup(const RunConfig& cfg, Variant v);

}  // namespace tprlab
