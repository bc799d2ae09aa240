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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tprlab/error.hpp"
#include "tprlab/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "out";
  std::string variant = "wsccl";
  std::optional<std::string> weak_labels;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Options& o, bool with_variant) {
  cmd->add_option("--config", o.config, "JSON configuration file (defaults apply to missing keys)");
  cmd->add_option("--seed", o.seed, "Root seed; every module seed derives from it");
  cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd->add_option("--weak-labels", o.weak_labels, "Weak-label scheme")->check(CLI::IsMember({"pop", "tci"}));
  cmd->add_flag("--quiet", o.quiet, "Suppress progress messages");
  if (with_variant)
    cmd->add_option("--variant", o.variant,
                    "wsccl | wsc | no_global | no_local | no_temporal | heuristic_cl | all")
        ->capture_default_str();
}

tprlab::RunConfig effective_config(const Options& o) {
  tprlab::RunConfig cfg = o.config.empty() ? tprlab::RunConfig() : tprlab::load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.weak_labels) cfg.weak_labels = tprlab::parse_label_scheme(*o.weak_labels);
  cfg.derive();
  cfg.validate();
  return cfg;
}

std::vector<tprlab::Variant> variants(const Options& o) {
  if (o.variant == "all") return {tprlab::kAllVariants.begin(), tprlab::kAllVariants.end()};
  return {tprlab::parse_variant(o.variant)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tprlab: temporal path representation learning on synthetic road networks"};
  app.require_subcommand(1);
  Options o;
  auto* generate = app.add_subcommand("generate", "Write the synthetic network, paths, targets and TCI table");
  auto* embed = app.add_subcommand("embed", "Embed the temporal graph and the road network with node2vec");
  auto* train = app.add_subcommand("train", "Train the temporal path encoder for one variant");
  auto* evaluate = app.add_subcommand("evaluate", "Fit task heads on learned representations and write metrics");
  auto* report = app.add_subcommand("report", "Tabulate metrics of every evaluated variant");
  add_common(generate, o, false);
  add_common(embed, o, false);
  add_common(train, o, true);
  add_common(evaluate, o, true);
  add_common(report, o, false);
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = effective_config(o);
    std::ostream* log = o.quiet ? nullptr : &std::cerr;
    if (generate->parsed()) tprlab::cmd_generate(cfg, o.out, log);
    if (embed->parsed()) tprlab::cmd_embed(cfg, o.out, log);
    if (train->parsed())
      for (auto v : variants(o)) tprlab::cmd_train(cfg, o.out, v, log);
    if (evaluate->parsed())
      for (auto v : variants(o)) tprlab::cmd_evaluate(cfg, o.out, v, log);
    if (report->parsed()) tprlab::cmd_report(cfg, o.out, &std::cout);
  } catch (const tprlab::ConfigError& e) {
    std::cerr << "tprlab: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const tprlab::ParseError& e) {
    std::cerr << "tprlab: parse error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "tprlab: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
