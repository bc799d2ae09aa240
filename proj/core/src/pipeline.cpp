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

#include "tprlab/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "tprlab/error.hpp"
#include "tprlab/temporal_graph.hpp"

namespace tprlab {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

void note(std::ostream* log, const std::string& msg) {
  if (log) *log << "[tprlab] " << msg << '\n' << std::flush;
}

// Writes through a temporary sibling so a failed run leaves no partial file.
void write_file(const fs::path& file, const std::function<void(std::ostream&)>& body,
                std::ios::openmode mode = std::ios::out) {
  fs::create_directories(file.parent_path());
  const fs::path tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp, mode | std::ios::trunc);
    if (!out) throw ArtifactError("cannot write " + tmp.string());
    body(out);
    out.flush();
    if (!out) throw ArtifactError("error while writing " + tmp.string());
  }
  fs::rename(tmp, file);
}

void require(const fs::path& file, std::string_view producer) {
  if (!fs::exists(file))
    throw ArtifactError("missing artifact " + file.string() + "; run `tprlab " + std::string(producer) +
                        "` with the same --out first");
}

void require_hash(const fs::path& file, const std::string& hash, std::string_view producer) {
  require(file, producer);
  auto found = read_config_hash(file);
  if (!found) throw ArtifactError(file.string() + " carries no config hash; rerun `tprlab " + std::string(producer) + "`");
  if (*found != hash)
    throw ArtifactError(file.string() + " was produced with config hash " + *found + " but the current config hash is " +
                        hash + "; rerun `tprlab " + std::string(producer) + "` with this config");
}

struct Data {
  RoadNetwork network;
  std::vector<PathRecord> paths;
  std::vector<TargetRecord> targets;
  TCITable tci;
};

Data load_data(const Layout& lay, const std::string& hash) {
  for (const auto& f : {lay.network(), lay.nodes(), lay.paths(), lay.targets(), lay.tci()})
    require_hash(f, hash, "generate");
  const fs::path nodes = lay.nodes();
  Data d{load_network(lay.network(), &nodes), load_paths(lay.paths()), load_targets(lay.targets()),
         load_tci_table(lay.tci())};
  if (d.targets.size() != d.paths.size()) throw IntegrityError("targets and paths differ in row count");
  for (std::size_t i = 0; i < d.paths.size(); ++i) {
    if (d.targets[i].path_id != d.paths[i].id)
      throw IntegrityError("targets row " + std::to_string(i) + " does not match path id " +
                           std::to_string(d.paths[i].id));
    if (!d.network.validate_path(d.paths[i].tp.path))
      throw IntegrityError("path " + std::to_string(d.paths[i].id) + " is not connected in the road network");
  }
  return d;
}

struct Embeddings {
  NodeEmbeddingTable temporal;
  NodeEmbeddingTable road;
};

Embeddings load_embeddings(const Layout& lay, const std::string& hash, const RunConfig& cfg,
                           const RoadNetwork& net) {
  require_hash(lay.temporal_embedding(), hash, "embed");
  require_hash(lay.road_embedding(), hash, "embed");
  Embeddings e{load_embedding(lay.temporal_embedding()), load_embedding(lay.road_embedding())};
  if (e.temporal.count() != static_cast<std::size_t>(kTemporalNodes) || e.temporal.dim() != cfg.encoder.temporal)
    throw IntegrityError("temporal embedding shape does not match the configuration");
  if (e.road.count() != net.node_count() || e.road.dim() != cfg.encoder.road_node)
    throw IntegrityError("road embedding shape does not match the network");
  return e;
}

WeakLabeler make_labeler(const RunConfig& cfg, const TCITable& tci) {
  return cfg.weak_labels == LabelScheme::pop ? WeakLabeler() : WeakLabeler(tci);
}

TrainingSet labeled(std::span<const PathRecord> paths, const WeakLabeler& labeler) {
  std::vector<LabeledPath> items;
  items.reserve(paths.size());
  for (const auto& p : paths) items.push_back({p.id, p.tp, labeler(p.tp.departure)});
  return TrainingSet(std::move(items));
}

Eigen::MatrixXd rows_of(const std::vector<Eigen::VectorXd>& features, std::span<const std::size_t> idx) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(idx.size()), features.front().size());
  for (std::size_t r = 0; r < idx.size(); ++r) x.row(static_cast<Eigen::Index>(r)) = features[idx[r]].transpose();
  return x;
}

json regression_json(const RegressionMetrics& m) {
  return {{"mae", m.mae}, {"mare", m.mare}, {"mape", m.mape}, {"n", m.n}, {"mape_excluded", m.mape_excluded}};
}

RegressionMetrics regression_from(const json& j) {
  RegressionMetrics m;
  m.mae = j.at("mae").get<double>();
  m.mare = j.at("mare").get<double>();
  m.mape = j.at("mape").get<double>();
  m.n = j.at("n").get<std::size_t>();
  m.mape_excluded = j.at("mape_excluded").get<std::size_t>();
  return m;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string metrics_json(const EvaluationReport& r) {
  json j;
  j["config_hash"] = r.config_hash;
  j["seed"] = r.seed;
  j["variant"] = r.variant;
  j["weak_labels"] = r.weak_labels;
  j["split"] = {{"train_examples", r.train_examples}, {"test_examples", r.test_examples}};
  j["tasks"]["travel_time"] = regression_json(r.travel_time);
  j["tasks"]["ranking"] = {{"kendall_tau", r.ranking.tau},
                           {"spearman_rho", r.ranking.rho},
                           {"groups", r.ranking.groups},
                           {"skipped_groups", r.ranking.skipped}};
  const auto& c = r.recommendation;
  j["tasks"]["recommendation"] = {{"accuracy", c.accuracy}, {"hit_rate", c.hit_rate}, {"tp", c.tp},
                                  {"tn", c.tn},             {"fp", c.fp},             {"fn", c.fn}};
  j["tasks"]["separation"] = {{"pair_cosine_gap", r.separation}};
  j["baselines"]["raw_spatial_travel_time"] = regression_json(r.baseline_travel_time);
  // Integers and strings serialize exactly; doubles round-trip through %.17g.
  return j.dump(2) + "\n";
}

EvaluationReport parse_metrics_json(std::string_view text, const std::string& source_name) {
  try {
    const json j = json::parse(text);
    EvaluationReport r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.variant = j.at("variant").get<std::string>();
    r.weak_labels = j.at("weak_labels").get<std::string>();
    r.train_examples = j.at("split").at("train_examples").get<std::size_t>();
    r.test_examples = j.at("split").at("test_examples").get<std::size_t>();
    const auto& t = j.at("tasks");
    r.travel_time = regression_from(t.at("travel_time"));
    r.ranking.tau = t.at("ranking").at("kendall_tau").get<double>();
    r.ranking.rho = t.at("ranking").at("spearman_rho").get<double>();
    r.ranking.groups = t.at("ranking").at("groups").get<std::size_t>();
    r.ranking.skipped = t.at("ranking").at("skipped_groups").get<std::size_t>();
    const auto& c = t.at("recommendation");
    r.recommendation.accuracy = c.at("accuracy").get<double>();
    r.recommendation.hit_rate = c.at("hit_rate").get<double>();
    r.recommendation.tp = c.at("tp").get<std::size_t>();
    r.recommendation.tn = c.at("tn").get<std::size_t>();
    r.recommendation.fp = c.at("fp").get<std::size_t>();
    r.recommendation.fn = c.at("fn").get<std::size_t>();
    r.separation = t.at("separation").at("pair_cosine_gap").get<double>();
    r.baseline_travel_time = regression_from(j.at("baselines").at("raw_spatial_travel_time"));
    return r;
  } catch (const json::exception& e) {
    throw ParseError(source_name + ": " + e.what());
  }
}

void cmd_generate(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
  cfg.validate();
  const Layout lay{out};
  const std::string hash = config_hash(cfg);
  note(log, "generating " + std::to_string(cfg.synth.grid_w) + "x" + std::to_string(cfg.synth.grid_h) + " grid, " +
                std::to_string(cfg.synth.n_paths) + " paths");
  const SynthDataset ds = generate(cfg.synth);
  std::vector<PathRecord> records;
  records.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    if (!ds.network.validate_path(s.record.tp.path))
      throw IntegrityError("generator produced a disconnected path " + std::to_string(s.record.id));
    records.push_back(s.record);
  }
  write_file(lay.network(), [&](std::ostream& o) { write_network(o, ds.network, hash); });
  write_file(lay.nodes(), [&](std::ostream& o) { write_node_list(o, ds.network, hash); });
  write_file(lay.paths(), [&](std::ostream& o) { write_paths(o, records, hash); });
  write_file(lay.targets(), [&](std::ostream& o) { write_targets(o, ds.samples, hash); });
  write_file(lay.tci(), [&](std::ostream& o) { write_tci_table(o, ds.tci, hash); });
  note(log, "wrote " + (out / "data").string() + " (config_hash=" + hash + ")");
}

void cmd_embed(const RunConfig& cfg, const fs::path& out, std::ostream* log) {
  cfg.validate();
  const Layout lay{out};
  const std::string hash = config_hash(cfg);
  for (const auto& f : {lay.network(), lay.nodes()}) require_hash(f, hash, "generate");
  const fs::path nodes = lay.nodes();
  const RoadNetwork net = load_network(lay.network(), &nodes);
  note(log, "embedding temporal graph (" + std::to_string(kTemporalNodes) + " nodes)");
  const auto temporal = embed_temporal(build_temporal_graph(), cfg.temporal_embed);
  note(log, "embedding road network (" + std::to_string(net.node_count()) + " nodes)");
  const auto road = embed_road(net, cfg.road_embed);
  write_file(lay.temporal_embedding(), [&](std::ostream& o) { write_embedding(o, temporal, hash); });
  write_file(lay.road_embedding(), [&](std::ostream& o) { write_embedding(o, road, hash); });
  note(log, "wrote " + (out / "embed").string());
}

void cmd_train(const RunConfig& cfg, const fs::path& out, Variant variant, std::ostream* log) {
  cfg.validate();
  const Layout lay{out};
  const std::string hash = config_hash(cfg);
  const Data data = load_data(lay, hash);
  const Embeddings emb = load_embeddings(lay, hash, cfg, data.network);
  const WeakLabeler labeler = make_labeler(cfg, data.tci);
  const TrainingSet set = labeled(data.paths, labeler);
  const VariantSetup setup = variant_setup(cfg, variant);
  EncoderInputs inputs{&data.network, &emb.temporal, &emb.road, setup.train.no_temporal};

  note(log, "training variant " + std::string(to_string(variant)) + " on " + std::to_string(set.size()) + " paths (" +
                std::to_string(set.group_count()) + " path/label groups)");
  CurriculumResult result;
  try {
    result = run_curriculum(set, inputs, cfg.encoder, setup.train, setup.curriculum, labeler);
  } catch (const DivergenceError& e) {
    throw DivergenceError("variant " + std::string(to_string(variant)) + ": " + e.what());
  }
  const auto& tlog = result.trained.log;
  if (!tlog.empty())
    note(log, std::to_string(tlog.size()) + " epochs, final objective " + fmt(tlog.back().objective));

  const fs::path dir = lay.train_dir(variant);
  write_file(lay.train_log(variant), [&](std::ostream& o) { write_train_log(o, tlog, hash); });
  if (result.plan) {
    write_file(lay.plan(variant), [&](std::ostream& o) { write_plan(o, set, *result.plan, hash); });
  } else {
    fs::remove(lay.plan(variant));
  }
  write_file(
      lay.checkpoint(variant),
      [&](std::ostream& o) { write_checkpoint(o, Checkpoint{result.trained.params, hash, std::string(to_string(variant))}); },
      std::ios::out | std::ios::binary);
  note(log, "wrote " + dir.string());
}

EvaluationReport cmd_evaluate(const RunConfig& cfg, const fs::path& out, Variant variant, std::ostream* log) {
  cfg.validate();
  const Layout lay{out};
  const std::string hash = config_hash(cfg);
  const Data data = load_data(lay, hash);
  const Embeddings emb = load_embeddings(lay, hash, cfg, data.network);
  require(lay.checkpoint(variant), "train --variant " + std::string(to_string(variant)));
  const Checkpoint ckpt = load_checkpoint(lay.checkpoint(variant));
  if (ckpt.config_hash != hash)
    throw ArtifactError(lay.checkpoint(variant).string() + " was trained with config hash " + ckpt.config_hash +
                        " but the current config hash is " + hash + "; rerun `tprlab train`");
  if (ckpt.variant != to_string(variant))
    throw ArtifactError(lay.checkpoint(variant).string() + " holds variant " + ckpt.variant);
  if (!(ckpt.params.dims() == cfg.encoder))
    throw IntegrityError("checkpoint encoder dims do not match the configuration");
  const WeakLabeler labeler = make_labeler(cfg, data.tci);
  const VariantSetup setup = variant_setup(cfg, variant);
  const EncoderInputs inputs{&data.network, &emb.temporal, &emb.road, setup.train.no_temporal};

  std::vector<TemporalPath> tps;
  tps.reserve(data.paths.size());
  for (const auto& p : data.paths) tps.push_back(p.tp);
  note(log, "encoding " + std::to_string(tps.size()) + " paths");
  const auto tprs = encode_all(tps, ckpt.params, inputs);

  // Untrained reference: mean spatial input vector per path.
  const auto init = EncoderParams::initialize(cfg.encoder, VocabSizes::of(data.network.vocabularies()),
                                              derive_seed(setup.train.seed, "init"));
  std::vector<Eigen::VectorXd> raw(tps.size());
  for (std::size_t i = 0; i < tps.size(); ++i) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(cfg.encoder.spatial());
    for (EdgeId e : tps[i].path.edges) acc += spatial_embed(data.network.edge(e), init, emb.road);
    raw[i] = acc / static_cast<double>(tps[i].path.edges.size());
  }

  // Group-level split so candidates of one ranking group stay together.
  std::vector<std::int64_t> groups;
  for (const auto& t : data.targets) groups.push_back(t.group_id);
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  if (groups.size() < 2) throw ConfigError("evaluation needs at least 2 ranking groups");
  Rng split_rng = make_rng(cfg.seed, "split");
  std::shuffle(groups.begin(), groups.end(), split_rng);
  const auto n_test = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.eval.test_fraction * static_cast<double>(groups.size()))), 1,
      groups.size() - 1);
  std::map<std::int64_t, bool> is_test;
  for (std::size_t g = 0; g < groups.size(); ++g) is_test[groups[g]] = g < n_test;
  std::vector<std::size_t> train_idx, test_idx;
  for (std::size_t i = 0; i < data.targets.size(); ++i)
    (is_test.at(data.targets[i].group_id) ? test_idx : train_idx).push_back(i);

  EvaluationReport report;
  report.config_hash = hash;
  report.seed = cfg.seed;
  report.variant = std::string(to_string(variant));
  report.weak_labels = std::string(to_string(cfg.weak_labels));
  report.train_examples = train_idx.size();
  report.test_examples = test_idx.size();

  auto column = [&](std::span<const std::size_t> idx, auto field) {
    std::vector<double> v;
    v.reserve(idx.size());
    for (auto i : idx) v.push_back(static_cast<double>(data.targets[i].*field));
    return v;
  };
  const auto x_train = rows_of(tprs, train_idx);
  const auto x_test = rows_of(tprs, test_idx);

  note(log, "fitting task heads on " + std::to_string(train_idx.size()) + " examples");
  const auto tt_truth = column(test_idx, &TargetRecord::travel_time_s);
  const auto tt_model = fit_gbm(x_train, column(train_idx, &TargetRecord::travel_time_s), GbmMode::regression, cfg.gbm);
  report.travel_time = regression_metrics(tt_truth, tt_model.predict(x_test));

  const auto raw_model = fit_gbm(rows_of(raw, train_idx), column(train_idx, &TargetRecord::travel_time_s),
                                 GbmMode::regression, cfg.gbm);
  report.baseline_travel_time = regression_metrics(tt_truth, raw_model.predict(rows_of(raw, test_idx)));

  std::vector<std::int64_t> test_groups;
  for (auto i : test_idx) test_groups.push_back(data.targets[i].group_id);
  const auto rank_model = fit_gbm(x_train, column(train_idx, &TargetRecord::rank_score), GbmMode::regression, cfg.gbm);
  report.ranking = rank_metrics(column(test_idx, &TargetRecord::rank_score), rank_model.predict(x_test), test_groups);

  // Recommendation: the most probable candidate of each group is recommended.
  const auto rec_model = fit_gbm(x_train, column(train_idx, &TargetRecord::chosen), GbmMode::classification, cfg.gbm);
  const auto prob = rec_model.predict(x_test);
  std::map<std::int64_t, std::size_t> best;
  for (std::size_t r = 0; r < test_idx.size(); ++r) {
    auto [it, fresh] = best.try_emplace(test_groups[r], r);
    if (!fresh && prob[r] > prob[it->second]) it->second = r;
  }
  std::vector<int> rec_truth, rec_pred(test_idx.size(), 0);
  for (auto i : test_idx) rec_truth.push_back(data.targets[i].chosen);
  for (const auto& [g, r] : best) rec_pred[r] = 1;
  report.recommendation = recommendation_metrics(rec_truth, rec_pred);

  // Separation on paths never seen in training.
  const auto held = generate_samples(data.network, cfg.synth, static_cast<std::size_t>(cfg.eval.heldout_groups),
                                     "heldout", 1'000'000'000, 1'000'000'000);
  std::vector<PathRecord> held_paths;
  for (const auto& s : held) held_paths.push_back(s.record);
  const TrainingSet held_set = labeled(held_paths, labeler);
  Rng batch_rng = make_rng(cfg.seed, "heldout_batches");
  constexpr int kHeldoutBatches = 10;
  double gap = 0.0;
  for (int b = 0; b < kHeldoutBatches; ++b) {
    const Batch batch = make_batch(held_set, cfg.train.batch_size, labeler, batch_rng);
    std::vector<Eigen::VectorXd> reps;
    for (const auto& it : batch.items) reps.push_back(encode(it.tp, ckpt.params, inputs).tpr);
    gap += pair_separation(batch, reps);
  }
  report.separation = gap / kHeldoutBatches;

  write_file(lay.metrics(variant), [&](std::ostream& o) { o << metrics_json(report); });
  note(log, "travel time MAE " + fmt(report.travel_time.mae) + " s (raw spatial baseline " +
                fmt(report.baseline_travel_time.mae) + " s), tau " + fmt(report.ranking.tau) + ", acc " +
                fmt(report.recommendation.accuracy) + ", separation " + fmt(report.separation));
  return report;
}

std::vector<EvaluationReport> cmd_report(const RunConfig& cfg, const fs::path& out, std::ostream* table) {
  const Layout lay{out};
  const std::string hash = config_hash(cfg);
  std::vector<EvaluationReport> reports;
  for (auto v : kAllVariants) {
    const fs::path file = lay.metrics(v);
    if (!fs::exists(file)) continue;
    std::ifstream in(file);
    std::stringstream ss;
    ss << in.rdbuf();
    auto r = parse_metrics_json(ss.str(), file.string());
    if (r.config_hash != hash)
      throw ArtifactError(file.string() + " was produced with config hash " + r.config_hash +
                          " but the current config hash is " + hash + "; rerun `tprlab evaluate`");
    reports.push_back(std::move(r));
  }
  if (reports.empty()) throw ArtifactError("no metrics under " + (out / "eval").string() + "; run `tprlab evaluate` first");

  auto emit = [&](std::ostream& o, const std::string& sep, bool with_hash) {
    if (with_hash) o << "# config_hash=" << hash << '\n';
    o << "variant" << sep << "mae" << sep << "mare" << sep << "mape" << sep << "kendall_tau" << sep << "spearman_rho"
      << sep << "accuracy" << sep << "hit_rate" << sep << "separation" << sep << "raw_spatial_mae\n";
    for (const auto& r : reports)
      o << r.variant << sep << fmt(r.travel_time.mae) << sep << fmt(r.travel_time.mare) << sep
        << fmt(r.travel_time.mape) << sep << fmt(r.ranking.tau) << sep << fmt(r.ranking.rho) << sep
        << fmt(r.recommendation.accuracy) << sep << fmt(r.recommendation.hit_rate) << sep << fmt(r.separation) << sep
        << fmt(r.baseline_travel_time.mae) << '\n';
  };
  write_file(lay.report(), [&](std::ostream& o) { emit(o, ",", true); });
  if (table) emit(*table, "\t", false);
  return reports;
}

}  // namespace tprlab
