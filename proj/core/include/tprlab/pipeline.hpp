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
#include <string_view>
#include <vector>

#include "tprlab/config.hpp"
#include "tprlab/metrics.hpp"

namespace tprlab {

/// Artifact locations under one output directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path network() const { return root / "data" / "network.csv"; }
  std::filesystem::path nodes() const { return root / "data" / "nodes.csv"; }
  std::filesystem::path paths() const { return root / "data" / "paths.csv"; }
  std::filesystem::path targets() const { return root / "data" / "targets.csv"; }
  std::filesystem::path tci() const { return root / "data" / "tci.csv"; }
  std::filesystem::path temporal_embedding() const { return root / "embed" / "temporal.emb"; }
  std::filesystem::path road_embedding() const { return root / "embed" / "road.emb"; }
  std::filesystem::path train_dir(Variant v) const { return root / "train" / std::string(to_string(v)); }
  std::filesystem::path checkpoint(Variant v) const { return train_dir(v) / "checkpoint.bin"; }
  std::filesystem::path train_log(Variant v) const { return train_dir(v) / "train_log.csv"; }
  std::filesystem::path plan(Variant v) const { return train_dir(v) / "plan.csv"; }
  std::filesystem::path metrics(Variant v) const {
    return root / "eval" / std::string(to_string(v)) / "metrics.json";
  }
  std::filesystem::path report() const { return root / "report.csv"; }
};

struct EvaluationReport {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string variant;
  std::string weak_labels;
  std::size_t train_examples = 0;
  std::size_t test_examples = 0;
  RegressionMetrics travel_time;
  RankMetrics ranking;
  RecommendationMetrics recommendation;
  double separation = 0.0;               // positive minus negative pair cosine on held-out batches
  RegressionMetrics baseline_travel_time;  // head on mean untrained spatial features
};

/// Key/value JSON document; doubles printed with 17 significant digits.
std::string metrics_json(const EvaluationReport& report);
EvaluationReport parse_metrics_json(std::string_view text, const std::string& source_name = "<metrics>");

/// Every command throws on failure. Missing or mismatched upstream artifacts
/// raise ArtifactError naming the command that produces them. Progress goes
/// to `log` when non-null.
void cmd_generate(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log = nullptr);
void cmd_embed(const RunConfig& cfg, const std::filesystem::path& out, std::ostream* log = nullptr);
void cmd_train(const RunConfig& cfg, const std::filesystem::path& out, Variant variant, std::ostream* log = nullptr);
EvaluationReport cmd_evaluate(const RunConfig& cfg, const std::filesystem::path& out, Variant variant,
                              std::ostream* log = nullptr);
/// Comparison table of every evaluated variant, written to report.csv and
/// returned in variant order.
std::vector<EvaluationReport> cmd_report(const RunConfig& cfg, const std::filesystem::path& out,
                                         std::ostream* table = nullptr);

}  // namespace tprlab
