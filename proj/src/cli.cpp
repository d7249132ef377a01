/*
 * Copyright 2026 The dklite Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dklite/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dklite/baselines.hpp"
#include "dklite/data.hpp"
#include "dklite/diagnostics.hpp"
#include "dklite/error.hpp"
#include "dklite/io.hpp"
#include "dklite/log.hpp"
#include "dklite/metrics.hpp"
#include "dklite/seed.hpp"
#include "dklite/trainer.hpp"

namespace dklite {
namespace {

using nlohmann::json;

const std::vector<std::string> kMetricNames = {"pehe_hat", "pehe_tilde",
                                               "policy_risk", "ate"};

std::uint64_t default_seed() {
  const char* env = std::getenv("DKLITE_SEED");
  if (env == nullptr || *env == '\0') return 0;
  std::uint64_t value = 0;
  std::size_t used = 0;
  try {
    value = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::strlen(env) || env[0] == '-') {
    throw UsageError("DKLITE_SEED must be a non-negative integer");
  }
  return value;
}

std::string sidecar_path(const std::string& csv) { return csv + ".json"; }
std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

// Inserts ".rN" before the extension when a command is repeated.
std::string repeat_path(const std::string& path, int index, int repeat) {
  if (repeat <= 1) return path;
  const std::filesystem::path p(path);
  return (p.parent_path() / (p.stem().string() + ".r" + std::to_string(index) +
                             p.extension().string()))
      .string();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw IoError("'" + path + "' is not valid JSON: " + e.what());
  }
}

// Loads a dataset CSV and, if present, its generator sidecar.
Dataset load_dataset(const std::string& path) {
  Dataset data = load_csv(path);
  const std::string side = sidecar_path(path);
  if (std::filesystem::exists(side)) {
    const json j = parse_json_file(side);
    if (j.contains("generator")) data.generator = GeneratorSpec::from_json(j["generator"]);
  }
  return data;
}

void finish_manifest(RunManifest& manifest, const std::string& path) {
  manifest.outputs.push_back(path);
  manifest.finished = utc_timestamp();
  write_text(path, manifest.to_json().dump(1) + "\n");
}

// Runs fn(0..repeat-1) on up to hardware_concurrency threads and rethrows
// the first failure in index order.
template <class Fn>
void fan_out(int repeat, Fn fn) {
  if (repeat <= 1) {
    fn(0);
    return;
  }
  const int workers = std::max(
      1, std::min<int>(repeat, static_cast<int>(std::thread::hardware_concurrency())));
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(repeat));
  std::mutex mutex;
  int next = 0;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int index;
        {
          std::lock_guard<std::mutex> lock(mutex);
          if (next >= repeat) return;
          index = next++;
        }
        try {
          fn(index);
        } catch (...) {
          failures[static_cast<std::size_t>(index)] = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

std::uint64_t run_seed(std::uint64_t seed, int index) {
  return index == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(index));
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  std::string family;
  int n = 0;
  double noise_sd = -1.0;
  std::uint64_t seed = 0;
  std::string out;
  std::string manifest;
};

int cmd_generate(const GenerateArgs& a, bool seed_given, std::ostream& out) {
  const std::uint64_t seed = seed_given ? a.seed : default_seed();
  GeneratorSpec spec = GeneratorSpec::defaults(family_from_string(a.family), seed);
  if (a.n > 0) spec.n = a.n;
  if (a.noise_sd >= 0.0) spec.noise_sd = a.noise_sd;

  RunManifest manifest;
  manifest.command = "generate";
  manifest.started = utc_timestamp();
  manifest.seed = seed;
  manifest.config = spec.to_json();

  const Dataset data = generate(spec);
  write_csv(data, a.out);
  json side;
  side["generator"] = spec.to_json();
  if (const auto grid = density_grid(spec)) {
    side["density"] = {{"lo", grid->lo},
                       {"hi", grid->hi},
                       {"points", grid->points},
                       {"d_inf", {sup_density_ratio(*grid, 0), sup_density_ratio(*grid, 1)}}};
    for (auto& v : side["density"]["d_inf"]) {
      if (std::isinf(v.get<double>())) v = "inf";
    }
  }
  write_text(sidecar_path(a.out), side.dump(1) + "\n");
  manifest.outputs = {a.out, sidecar_path(a.out)};
  finish_manifest(manifest, a.manifest.empty() ? manifest_path(a.out) : a.manifest);
  out << fmt::format("wrote {} ({} units, {} treated)\n", a.out, data.size(),
                     data.arm_count(1));
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string curve;
  std::string manifest;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  double lr = 0.0;
  int steps = 0;
  int patience = 0;
  std::uint64_t seed = 0;
  double split_ratio = 0.8;
  int repeat = 1;
  // cv only
  std::string grid = "0,10,100";
  int folds = 5;
};

TrainConfig build_config(const TrainArgs& a, const CLI::App& sub) {
  TrainConfig c;
  if (!a.config.empty()) c = TrainConfig::from_json(parse_json_file(a.config));
  if (sub.count("--alpha1")) c.alpha1 = a.alpha1;
  if (sub.count("--alpha2")) c.alpha2 = a.alpha2;
  if (sub.count("--lr")) c.learning_rate = a.lr;
  if (sub.count("--steps")) c.steps = a.steps;
  if (sub.count("--patience")) c.patience = a.patience;
  c.seed = sub.count("--seed") ? a.seed : default_seed();
  c.validate();
  return c;
}

void check_ratio(double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ConfigError("--split-ratio must lie in (0, 1]");
  }
}

int cmd_train(const TrainArgs& a, const CLI::App& sub, std::ostream& out) {
  const TrainConfig base = build_config(a, sub);
  check_ratio(a.split_ratio);
  const Dataset data = load_dataset(a.data);
  const std::string data_hash = git_blob_hash(read_text(a.data));
  std::mutex out_mutex;

  fan_out(a.repeat, [&](int r) {
    TrainConfig config = base;
    config.seed = run_seed(base.seed, r);
    const std::string ckpt = repeat_path(a.out, r, a.repeat);
    const std::string curve =
        repeat_path(a.curve.empty() ? a.out + ".curve.csv" : a.curve, r, a.repeat);

    RunManifest manifest;
    manifest.command = "train";
    manifest.started = utc_timestamp();
    manifest.seed = config.seed;
    manifest.config = config.to_json();
    manifest.config["split_ratio"] = a.split_ratio;
    manifest.add_input(a.data);

    const Dataset train_set =
        a.split_ratio < 1.0 ? split(data, a.split_ratio, config.seed).train : data;
    Checkpoint checkpoint;
    checkpoint.model = train(train_set, config);
    checkpoint.metadata = {{"data", a.data},
                           {"data_hash", data_hash},
                           {"split_ratio", a.split_ratio},
                           {"split_seed", config.seed},
                           {"train_size", train_set.size()}};
    save_checkpoint(checkpoint, ckpt);
    write_text(curve, training_curve_csv(checkpoint.model.history));
    manifest.outputs = {ckpt, curve};
    finish_manifest(manifest, repeat_path(a.manifest.empty() ? manifest_path(a.out) : a.manifest,
                                          r, a.repeat));
    std::lock_guard<std::mutex> lock(out_mutex);
    const LossBreakdown& last = checkpoint.model.history.back();
    out << fmt::format("wrote {} (seed {}, {} steps, L_fin {:.6g})\n", ckpt, config.seed,
                       checkpoint.model.history.size(), last.fin);
  });
  return 0;
}

int cmd_cv(const TrainArgs& a, const CLI::App& sub, std::ostream& out) {
  TrainConfig base = build_config(a, sub);
  std::vector<double> values;
  for (const std::string& v : split_list(a.grid)) {
    try {
      values.push_back(std::stod(v));
    } catch (const std::exception&) {
      throw UsageError("--grid: '" + v + "' is not a number");
    }
  }
  if (values.empty()) throw UsageError("--grid is empty");
  std::vector<std::pair<double, double>> grid;
  for (double a1 : values) {
    for (double a2 : values) grid.emplace_back(a1, a2);
  }
  base.grid = grid;
  base.folds = a.folds;

  RunManifest manifest;
  manifest.command = "cv";
  manifest.started = utc_timestamp();
  manifest.seed = base.seed;
  manifest.add_input(a.data);
  const Dataset data = load_dataset(a.data);
  const SelectionResult sel = select_hyperparams(data, grid, a.folds, base);

  json result;
  result["alpha1"] = sel.alpha1;
  result["alpha2"] = sel.alpha2;
  result["folds_used"] = sel.folds_used;
  result["scores"] = json::array();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    result["scores"].push_back(
        {{"alpha1", grid[g].first}, {"alpha2", grid[g].second}, {"score", sel.scores[g]}});
  }
  write_text(a.out, result.dump(1) + "\n");
  manifest.config = base.to_json();
  manifest.config["selected"] = {{"alpha1", sel.alpha1}, {"alpha2", sel.alpha2}};
  manifest.outputs = {a.out};
  finish_manifest(manifest, a.manifest.empty() ? manifest_path(a.out) : a.manifest);
  out << fmt::format("selected alpha1={} alpha2={} ({} folds)\n", sel.alpha1, sel.alpha2,
                     sel.folds_used);
  return 0;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string data;
  std::string metrics = "pehe_hat,pehe_tilde,policy_risk,ate";
  double defer_fraction = 0.0;
  std::string out;
  std::string manifest;
};

class MetricWriter {
 public:
  MetricWriter(std::set<std::string> wanted, std::uint64_t seed, std::ostream& err)
      : wanted_(std::move(wanted)), seed_(seed), err_(err) {}

  void add(const Dataset& d, const PredictionSet& p, const std::string& split_name,
           const std::string& prefix) {
    const Vector tau_hat = p.tau();
    const std::optional<Vector> tau = d.true_effect();
    for (const std::string& m : kMetricNames) {
      if (!wanted_.count(m)) continue;
      if (m == "pehe_hat" || m == "ate") {
        if (!tau) {
          note(m, "dataset has no true effect");
          continue;
        }
        if (m == "pehe_hat") {
          push(d, split_name, prefix + "sqrt_pehe_hat", std::sqrt(pehe_hat(tau_hat, *tau)));
        } else {
          push(d, split_name, prefix + "ate_error", ate_error(tau_hat, *tau));
        }
      } else if (m == "pehe_tilde") {
        if (!d.has_potential_outcomes()) {
          note(m, "dataset has no potential outcomes");
          continue;
        }
        push(d, split_name, prefix + "sqrt_pehe_tilde",
             std::sqrt(pehe_tilde(tau_hat, *d.y1, *d.y0)));
      } else if (m == "policy_risk") {
        if (d.y.size() == 0 || d.y.minCoeff() < 0.0 || d.y.maxCoeff() > 1.0) {
          note(m, "outcomes are not in [0, 1]");
          continue;
        }
        const PolicyRisk risk = policy_risk(tau_hat, d.t, d.y);
        push(d, split_name, prefix + "policy_risk", risk.value);
        if (risk.partially_identified) {
          err_ << "note: policy_risk on " << split_name
               << " is partially identified (empty policy cell)\n";
        }
      }
    }
  }

  const std::vector<MetricRow>& rows() const { return rows_; }

 private:
  void push(const Dataset& d, const std::string& split_name, const std::string& metric,
            double value) {
    rows_.push_back({d.name, split_name, metric, value, seed_});
  }
  void note(const std::string& metric, const std::string& why) {
    if (noted_.insert(metric).second) {
      err_ << "note: skipped " << metric << ": " << why << "\n";
    }
  }

  std::set<std::string> wanted_;
  std::uint64_t seed_;
  std::ostream& err_;
  std::set<std::string> noted_;
  std::vector<MetricRow> rows_;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  std::set<std::string> wanted;
  for (const std::string& m : split_list(a.metrics)) {
    if (m == "all") {
      wanted.insert(kMetricNames.begin(), kMetricNames.end());
    } else if (std::find(kMetricNames.begin(), kMetricNames.end(), m) == kMetricNames.end()) {
      throw UsageError("unknown metric '" + m + "'");
    } else {
      wanted.insert(m);
    }
  }
  if (!(a.defer_fraction >= 0.0 && a.defer_fraction < 1.0)) {
    throw ConfigError("--defer-fraction must lie in [0, 1)");
  }

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.started = utc_timestamp();
  manifest.add_input(a.model);
  manifest.add_input(a.data);
  const Checkpoint ckpt = load_checkpoint(a.model);
  const Dataset data = load_dataset(a.data);
  manifest.seed = ckpt.model.config.seed;
  manifest.config = {{"metrics", std::vector<std::string>(wanted.begin(), wanted.end())},
                     {"defer_fraction", a.defer_fraction}};

  std::vector<std::pair<std::string, Dataset>> parts;
  const json& meta = ckpt.metadata;
  const double ratio = meta.value("split_ratio", 1.0);
  const bool same_data =
      meta.value("data_hash", std::string()) == manifest.inputs.back().second;
  if (ratio < 1.0 && same_data) {
    Split s = split(data, ratio, meta.at("split_seed").get<std::uint64_t>());
    parts.emplace_back("in_sample", std::move(s.train));
    parts.emplace_back("out_sample", std::move(s.test));
  } else {
    if (ratio < 1.0) warn("evaluate: data differs from the training file; reporting all units");
    parts.emplace_back(ratio < 1.0 ? "all" : "in_sample", data);
  }

  MetricWriter writer(wanted, ckpt.model.config.seed, err);
  for (const auto& [name, d] : parts) {
    const PredictionSet pred = ckpt.model.predict(d.x);
    writer.add(d, pred, name, "");
    if (a.defer_fraction > 0.0) {
      const Deferral deferral = defer_uncertain(pred, a.defer_fraction);
      writer.add(d.subset(deferral.kept), pred.subset(deferral.kept), name, "dklite_u:");
    }
  }
  write_text(a.out, metrics_csv(writer.rows()));
  manifest.outputs = {a.out};
  finish_manifest(manifest, a.manifest.empty() ? manifest_path(a.out) : a.manifest);
  for (const MetricRow& r : writer.rows()) {
    out << fmt::format("{:<10} {:<26} {:.6g}\n", r.split, r.metric, r.value);
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string red;
  std::string green;
  std::vector<std::string> models;
  double bandwidth = 0.0;
  std::string out;
  std::string curves;
  std::string manifest;
};

int cmd_diagnose(const DiagnoseArgs& a, const CLI::App& sub, std::ostream& out) {
  if (a.models.size() != 2) throw UsageError("--models expects two checkpoints: red,green");
  std::optional<double> bandwidth;
  if (sub.count("--bandwidth")) bandwidth = a.bandwidth;

  RunManifest manifest;
  manifest.command = "diagnose";
  manifest.started = utc_timestamp();
  for (const auto& p : {a.red, a.green, a.models[0], a.models[1]}) manifest.add_input(p);
  const Dataset red = load_dataset(a.red);
  const Dataset green = load_dataset(a.green);
  const Checkpoint red_model = load_checkpoint(a.models[0]);
  const Checkpoint green_model = load_checkpoint(a.models[1]);

  const Figure2Result result =
      figure2_study(red, green, red_model.model, green_model.model, bandwidth);
  json report = result.to_json();
  report["bandwidth"] = result.red.bandwidth;
  write_text(a.out, report.dump(1) + "\n");

  const std::string curves = a.curves.empty() ? a.out + ".curves.csv" : a.curves;
  std::string text = "population,";
  bool header = true;
  for (const auto& [tag, d, m] :
       {std::tuple{"red", &red, &red_model.model}, std::tuple{"green", &green, &green_model.model}}) {
    std::stringstream lines(curve_csv(*d, *m));
    std::string line;
    std::getline(lines, line);
    if (header) text += line + "\n";
    header = false;
    while (std::getline(lines, line)) text += std::string(tag) + "," + line + "\n";
  }
  write_text(curves, text);

  manifest.config = {{"bandwidth", result.red.bandwidth}};
  manifest.outputs = {a.out, curves};
  finish_manifest(manifest, a.manifest.empty() ? manifest_path(a.out) : a.manifest);
  out << fmt::format(
      "mmd green<red: {}  wasserstein green<red: {}  cf-variance green>red: {}  "
      "D_inf green>red: {}\n",
      result.mmd_ordered, result.wasserstein_ordered, result.variance_ordered,
      result.d_inf_ordered);
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_ablate(const TrainArgs& a, const CLI::App& sub, std::ostream& out) {
  const TrainConfig base = build_config(a, sub);
  check_ratio(a.split_ratio);
  if (!(a.split_ratio < 1.0)) throw ConfigError("ablate needs --split-ratio below 1");
  const Dataset data = load_dataset(a.data);
  if (!data.true_effect()) throw DataError("ablate: dataset has no true effect");

  RunManifest manifest;
  manifest.command = "ablate";
  manifest.started = utc_timestamp();
  manifest.seed = base.seed;
  manifest.config = base.to_json();
  manifest.add_input(a.data);

  const std::vector<std::pair<std::string, std::pair<double, double>>> variants = {
      {"L_lik", {0.0, 0.0}},
      {"L_lik+L_var", {base.alpha1, 0.0}},
      {"L_lik+L_rec", {0.0, base.alpha2}},
      {"L_fin", {base.alpha1, base.alpha2}}};
  std::vector<std::string> lines(static_cast<std::size_t>(a.repeat) * variants.size());
  fan_out(a.repeat, [&](int r) {
    const std::uint64_t seed = run_seed(base.seed, r);
    const Split s = split(data, a.split_ratio, seed);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      TrainConfig c = base;
      c.seed = seed;
      std::tie(c.alpha1, c.alpha2) = variants[v].second;
      const FittedModel model = train(s.train, c);
      const double in = std::sqrt(pehe_hat(model.predict(s.train.x).tau(), *s.train.true_effect()));
      const double os = std::sqrt(pehe_hat(model.predict(s.test.x).tau(), *s.test.true_effect()));
      lines[static_cast<std::size_t>(r) * variants.size() + v] = fmt::format(
          "{},{},{},{},{},{}\n", seed, variants[v].first, c.alpha1, c.alpha2, in, os);
    }
  });
  std::string text = "seed,objective,alpha1,alpha2,in_sample_sqrt_pehe,out_sample_sqrt_pehe\n";
  for (const std::string& l : lines) text += l;
  write_text(a.out, text);
  manifest.outputs = {a.out};
  finish_manifest(manifest, a.manifest.empty() ? manifest_path(a.out) : a.manifest);
  out << text;
  return 0;
}

void add_train_options(CLI::App* sub, TrainArgs& a) {
  sub->add_option("--data", a.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  sub->add_option("--config", a.config, "Training configuration JSON");
  sub->add_option("--alpha1", a.alpha1, "Counterfactual-variance weight");
  sub->add_option("--alpha2", a.alpha2, "Reconstruction weight");
  sub->add_option("--steps", a.steps, "Optimizer steps");
  sub->add_option("--lr", a.lr, "Learning rate");
  sub->add_option("--patience", a.patience, "Early-stop patience (0 disables)");
  sub->add_option("--seed", a.seed, "Seed (default: $DKLITE_SEED or 0)");
  sub->add_option("--manifest", a.manifest, "Manifest path (default: <out>.manifest.json)");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deep-kernel individual treatment effect estimation"};
  app.name("dklite");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate_cmd = app.add_subcommand("generate", "Simulate a dataset");
  generate_cmd->add_option("--family", gen.family, "toy_red | toy_green | ihdp_like")
      ->required()
      ->check(CLI::IsMember({"toy_red", "toy_green", "ihdp_like"}));
  generate_cmd->add_option("--n", gen.n, "Sample size (default: family default)");
  generate_cmd->add_option("--noise-sd", gen.noise_sd, "Outcome noise standard deviation");
  generate_cmd->add_option("--seed", gen.seed, "Seed (default: $DKLITE_SEED or 0)");
  generate_cmd->add_option("--out", gen.out, "Output CSV")->required();
  generate_cmd->add_option("--manifest", gen.manifest, "Manifest path");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Fit a model and write a checkpoint");
  add_train_options(train_cmd, tr);
  train_cmd->add_option("--out", tr.out, "Checkpoint JSON")->required();
  train_cmd->add_option("--curve", tr.curve, "Training-curve CSV (default: <out>.curve.csv)");
  train_cmd->add_option("--split-ratio", tr.split_ratio, "Training fraction; 1 uses all units");
  train_cmd->add_option("--repeat", tr.repeat, "Independent seed-derived runs")
      ->check(CLI::PositiveNumber);

  TrainArgs cv;
  auto* cv_cmd = app.add_subcommand("cv", "Select alpha1, alpha2 by cross-validation");
  add_train_options(cv_cmd, cv);
  cv_cmd->add_option("--grid", cv.grid, "Comma-separated values; the grid is their square");
  cv_cmd->add_option("--folds", cv.folds, "Number of folds");
  cv_cmd->add_option("--out", cv.out, "Selection JSON")->required();

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Write metric rows for a checkpoint");
  evaluate_cmd->add_option("--model", ev.model, "Checkpoint JSON")->required();
  evaluate_cmd->add_option("--data", ev.data, "Dataset CSV")->required();
  evaluate_cmd->add_option("--metrics", ev.metrics,
                           "Comma-separated: pehe_hat,pehe_tilde,policy_risk,ate,all");
  evaluate_cmd->add_option("--defer-fraction", ev.defer_fraction,
                           "Also report metrics after deferring this fraction");
  evaluate_cmd->add_option("--out", ev.out, "Metric CSV")->required();
  evaluate_cmd->add_option("--manifest", ev.manifest, "Manifest path");

  DiagnoseArgs dg;
  auto* diagnose_cmd = app.add_subcommand("diagnose", "Compare overlap of two toy populations");
  diagnose_cmd->add_option("--red", dg.red, "Red population CSV")->required();
  diagnose_cmd->add_option("--green", dg.green, "Green population CSV")->required();
  diagnose_cmd->add_option("--models", dg.models, "Checkpoints: red,green")
      ->required()
      ->delimiter(',');
  diagnose_cmd->add_option("--bandwidth", dg.bandwidth, "MMD bandwidth (default: median)");
  diagnose_cmd->add_option("--out", dg.out, "Report JSON")->required();
  diagnose_cmd->add_option("--curves", dg.curves, "Curve CSV (default: <out>.curves.csv)");
  diagnose_cmd->add_option("--manifest", dg.manifest, "Manifest path");

  TrainArgs ab;
  auto* ablate_cmd = app.add_subcommand("ablate", "Compare the four objective variants");
  add_train_options(ablate_cmd, ab);
  ablate_cmd->add_option("--split-ratio", ab.split_ratio, "Training fraction");
  ablate_cmd->add_option("--repeat", ab.repeat, "Independent seed-derived runs")
      ->check(CLI::PositiveNumber);
  ablate_cmd->add_option("--out", ab.out, "Result CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return 2;
  }

  try {
    if (generate_cmd->parsed()) return cmd_generate(gen, generate_cmd->count("--seed") > 0, out);
    if (train_cmd->parsed()) return cmd_train(tr, *train_cmd, out);
    if (cv_cmd->parsed()) return cmd_cv(cv, *cv_cmd, out);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev, out, err);
    if (diagnose_cmd->parsed()) return cmd_diagnose(dg, *diagnose_cmd, out);
    if (ablate_cmd->parsed()) return cmd_ablate(ab, *ablate_cmd, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dklite
