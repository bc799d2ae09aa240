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

#include <fstream>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "tprlab/common.hpp"
#include "tprlab/config.hpp"
#include "tprlab/error.hpp"

using namespace tprlab;

namespace {

std::string error_of(const std::string& json) {
  try {
    parse_config(json, "run.json");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("an empty document yields the defaults") {
    const auto c = parse_config("{}");
    const RunConfig d;
    CHECK(canonical_json(c) == canonical_json(d));
    CHECK(c.train.lambda == 0.8);
    CHECK(c.temporal_embed.dim == 128);
    CHECK(c.road_embed.dim == 64);
    CHECK(c.encoder.temporal == 128);
    CHECK(c.encoder.road_node == 64);
    CHECK(c.weak_labels == LabelScheme::pop);
  }

  TEST_CASE("overrides are applied and widths follow the embeddings") {
    const auto c = parse_config(R"({"seed": 9, "embed": {"temporal": {"dim": 32}}, "train": {"lambda": 0.5},
                                   "weak_labels": "tci"})");
    CHECK(c.seed == 9);
    CHECK(c.train.lambda == 0.5);
    CHECK(c.encoder.temporal == 32);
    CHECK(c.weak_labels == LabelScheme::tci);
    CHECK(c.train.seed == derive_seed(9, "train"));
    CHECK(c.synth.seed == derive_seed(9, "synth"));
    CHECK(c.gbm.seed == derive_seed(9, "gbm"));
    CHECK(c.temporal_embed.seed != c.road_embed.seed);
  }

  TEST_CASE("unknown keys are rejected with their full path") {
    CHECK(error_of(R"({"train": {"lamda": 0.5}})").find("train.lamda") != std::string::npos);
    CHECK(error_of(R"({"embed": {"road": {"walks": 3}}})").find("embed.road.walks") != std::string::npos);
    CHECK(error_of(R"({"bogus": 1})").find("'bogus'") != std::string::npos);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1})"), ConfigError);
  }

  TEST_CASE("type and range errors are configuration errors") {
    CHECK_THROWS_AS(parse_config(R"({"train": {"batch_size": "32"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"batch_size": 3.5}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": {"lambda": 2.0}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"train": 4})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"synth": {"speed_base": {"primary": "fast"}}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"weak_labels": "rush"})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ParseError);
    // Integers are accepted where reals are expected.
    CHECK(parse_config(R"({"train": {"lambda": 1}})").train.lambda == 1.0);
  }

  TEST_CASE("the hash is stable and sensitive to every effective value") {
    const RunConfig d;
    CHECK(config_hash(d).size() == 16);
    CHECK(config_hash(d) == config_hash(parse_config("{}")));
    CHECK(config_hash(d) == to_hex(fnv1a64(canonical_json(d))));
    // Key order and whitespace in the input do not matter.
    CHECK(config_hash(parse_config(R"({"seed":2,"train":{"lr":0.001}})")) ==
          config_hash(parse_config("{ \"train\" : { \"lr\" : 0.001 } , \"seed\" : 2 }")));
    CHECK(config_hash(parse_config(R"({"seed": 2})")) != config_hash(d));
    CHECK(config_hash(parse_config(R"({"gbm": {"rounds": 99}})")) != config_hash(d));
    CHECK(config_hash(parse_config(R"({"synth": {"speed_base": {"primary": 10.0}}})")) != config_hash(d));
  }

  TEST_CASE("variants switch exactly one training component") {
    const RunConfig c;
    const auto base = variant_setup(c, Variant::wsccl);
    CHECK(base.curriculum.mode == CurriculumMode::learned);
    CHECK_FALSE(base.train.no_global);
    CHECK_FALSE(base.train.no_local);
    CHECK_FALSE(base.train.no_temporal);
    CHECK(variant_setup(c, Variant::wsc).curriculum.mode == CurriculumMode::none);
    CHECK(variant_setup(c, Variant::heuristic_cl).curriculum.mode == CurriculumMode::heuristic);
    CHECK(variant_setup(c, Variant::no_global).train.effective_lambda() == 0.0);
    CHECK(variant_setup(c, Variant::no_local).train.effective_lambda() == 1.0);
    CHECK(variant_setup(c, Variant::no_temporal).train.no_temporal);
    for (auto v : kAllVariants) {
      CHECK(parse_variant(to_string(v)) == v);
      CHECK(variant_setup(c, v).train.seed == derive_seed(c.seed, "train"));
    }
    CHECK_THROWS_AS(parse_variant("wscl"), ConfigError);
  }

  TEST_CASE("config files load and missing files fail") {
    const auto dir = testing::scratch_dir("config");
    std::ofstream(dir / "c.json") << R"({"curriculum": {"stages": 4}})";
    CHECK(load_config(dir / "c.json").curriculum.stages == 4);
    CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);
  }
}
