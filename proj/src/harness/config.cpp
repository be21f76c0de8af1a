// Copyright 2026 The dpad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpad/harness/config.hpp"

#include <fstream>
#include <set>

#include "dpad/error.hpp"

namespace dpad::harness {

namespace {

using nlohmann::json;

json arch_to_json(const nn::ModelArch& a) {
  json j;
  j["arch"] = nn::to_string(a.kind);
  j["widths"] = a.widths;
  j["channels"] = a.channels;
  j["kernel"] = a.kernel;
  j["input_rows"] = a.input_rows;
  j["input_cols"] = a.input_cols;
  j["num_classes"] = a.num_classes;
  j["vocab"] = a.vocab;
  j["history"] = a.history;
  j["lstm_units"] = a.lstm_units;
  return j;
}

nn::ModelArch arch_from_json(const json& j, const nn::ModelArch& defaults) {
  nn::ModelArch a = defaults;
  if (j.contains("arch")) a.kind = nn::arch_kind_from_string(j.at("arch"));
  if (j.contains("widths")) a.widths = j.at("widths").get<std::vector<int>>();
  if (j.contains("channels")) a.channels = j.at("channels").get<std::vector<int>>();
  if (j.contains("kernel")) a.kernel = j.at("kernel");
  if (j.contains("input_rows")) a.input_rows = j.at("input_rows");
  if (j.contains("input_cols")) a.input_cols = j.at("input_cols");
  if (j.contains("num_classes")) a.num_classes = j.at("num_classes");
  if (j.contains("vocab")) a.vocab = j.at("vocab");
  if (j.contains("history")) a.history = j.at("history");
  if (j.contains("lstm_units")) a.lstm_units = j.at("lstm_units").get<std::vector<int>>();
  return a;
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::kOutlier: return "outlier";
    case ExperimentKind::kSequence: return "sequence";
    case ExperimentKind::kBackdoor: return "backdoor";
    case ExperimentKind::kUaerm: return "uaerm";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "outlier") return ExperimentKind::kOutlier;
  if (s == "sequence") return ExperimentKind::kSequence;
  if (s == "backdoor") return ExperimentKind::kBackdoor;
  if (s == "uaerm") return ExperimentKind::kUaerm;
  throw InputError("unknown experiment kind: " + s);
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InputError("config needs at least one seed");
  std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw InputError("seeds must be distinct");
  if (dp.sigmas.empty()) throw InputError("sigma grid must not be empty");
  if (!(dp.clip_bound > 0.0)) throw InputError("clip bound must be positive");
  if (dp.epochs < 0 || dp.batch_size <= 0) throw InputError("bad dp grid settings");
  arch.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = to_string(kind);
  j["output_dir"] = output_dir;
  j["seeds"] = seeds;

  json d;
  d["normal_source"] = dataset.normal_source;
  d["outlier_source"] = dataset.outlier_source;
  d["train_size"] = dataset.train_size;
  d["test_normal"] = dataset.test_normal;
  d["test_outlier"] = dataset.test_outlier;
  d["r_o_grid"] = dataset.r_o_grid;
  d["r_p_grid"] = dataset.r_p_grid;
  d["train_sessions"] = dataset.train_sessions;
  d["test_normal_sessions"] = dataset.test_normal_sessions;
  d["test_abnormal_sessions"] = dataset.test_abnormal_sessions;
  d["train_contamination"] = dataset.train_contamination;
  d["data_seed"] = dataset.data_seed;
  j["dataset"] = d;

  j["model"] = arch_to_json(arch);

  json g;
  g["sigmas"] = json::array();
  for (const auto& s : dp.sigmas) {
    if (s)
      g["sigmas"].push_back(*s);
    else
      g["sigmas"].push_back(nullptr);
  }
  g["clip_bound"] = dp.clip_bound;
  g["clip_bound_grid"] = dp.clip_bound_grid;
  g["c_sweep_sigma"] = dp.c_sweep_sigma;
  g["learning_rate"] = dp.learning_rate;
  g["batch_size"] = dp.batch_size;
  g["epochs"] = dp.epochs;
  g["delta"] = dp.delta;
  g["sampling"] = dp::to_string(dp.sampling);
  j["dp"] = g;

  json det;
  det["k_grid"] = detection.k_grid;
  det["tp_grid"] = detection.tp_grid;
  det["tau_grid"] = detection.tau_grid;
  j["detection"] = det;

  json u;
  u["subset_sizes"] = uaerm.subset_sizes;
  u["sigmas"] = uaerm.sigmas;
  u["subsets_per_cell"] = uaerm.subsets_per_cell;
  u["repeats_per_subset"] = uaerm.repeats_per_subset;
  u["epochs"] = uaerm.epochs;
  j["uaerm"] = u;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig cfg;
  cfg.kind = experiment_kind_from_string(j.at("kind"));
  switch (cfg.kind) {
    case ExperimentKind::kOutlier: cfg = outlier_default(); break;
    case ExperimentKind::kSequence: cfg = sequence_default(); break;
    case ExperimentKind::kBackdoor: cfg = backdoor_default(); break;
    case ExperimentKind::kUaerm: cfg = uaerm_default(); break;
  }

  maybe(j, "output_dir", cfg.output_dir);
  maybe(j, "seeds", cfg.seeds);

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    maybe(d, "normal_source", cfg.dataset.normal_source);
    maybe(d, "outlier_source", cfg.dataset.outlier_source);
    maybe(d, "train_size", cfg.dataset.train_size);
    maybe(d, "test_normal", cfg.dataset.test_normal);
    maybe(d, "test_outlier", cfg.dataset.test_outlier);
    maybe(d, "r_o_grid", cfg.dataset.r_o_grid);
    maybe(d, "r_p_grid", cfg.dataset.r_p_grid);
    maybe(d, "train_sessions", cfg.dataset.train_sessions);
    maybe(d, "test_normal_sessions", cfg.dataset.test_normal_sessions);
    maybe(d, "test_abnormal_sessions", cfg.dataset.test_abnormal_sessions);
    maybe(d, "train_contamination", cfg.dataset.train_contamination);
    maybe(d, "data_seed", cfg.dataset.data_seed);
  }

  if (j.contains("model")) cfg.arch = arch_from_json(j.at("model"), cfg.arch);

  if (j.contains("dp")) {
    const json& g = j.at("dp");
    if (g.contains("sigmas")) {
      cfg.dp.sigmas.clear();
      for (const auto& s : g.at("sigmas")) {
        if (s.is_null())
          cfg.dp.sigmas.push_back(std::nullopt);
        else
          cfg.dp.sigmas.push_back(s.get<double>());
      }
    }
    maybe(g, "clip_bound", cfg.dp.clip_bound);
    maybe(g, "clip_bound_grid", cfg.dp.clip_bound_grid);
    maybe(g, "c_sweep_sigma", cfg.dp.c_sweep_sigma);
    maybe(g, "learning_rate", cfg.dp.learning_rate);
    maybe(g, "batch_size", cfg.dp.batch_size);
    maybe(g, "epochs", cfg.dp.epochs);
    maybe(g, "delta", cfg.dp.delta);
    if (g.contains("sampling"))
      cfg.dp.sampling = dp::sampling_from_string(g.at("sampling"));
  }

  if (j.contains("detection")) {
    const json& det = j.at("detection");
    maybe(det, "k_grid", cfg.detection.k_grid);
    maybe(det, "tp_grid", cfg.detection.tp_grid);
    maybe(det, "tau_grid", cfg.detection.tau_grid);
  }

  if (j.contains("uaerm")) {
    const json& u = j.at("uaerm");
    maybe(u, "subset_sizes", cfg.uaerm.subset_sizes);
    maybe(u, "sigmas", cfg.uaerm.sigmas);
    maybe(u, "subsets_per_cell", cfg.uaerm.subsets_per_cell);
    maybe(u, "repeats_per_subset", cfg.uaerm.repeats_per_subset);
    maybe(u, "epochs", cfg.uaerm.epochs);
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open config '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw FormatError("config '" + path + "': " + e.what());
  }
  return from_json(j);
}

ExperimentConfig ExperimentConfig::outlier_default() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kOutlier;
  cfg.output_dir = "runs/outlier";
  cfg.dataset.test_normal = 1000;
  cfg.dataset.test_outlier = 100;
  cfg.arch = nn::ModelArch::dense_autoencoder({784, 128, 32, 128, 784});
  cfg.dp.sigmas = {std::nullopt, 0.0, 1.0, 5.0};
  cfg.dp.clip_bound = 0.05;
  cfg.dp.learning_rate = 50.0;
  cfg.dp.epochs = 20;
  cfg.dp.batch_size = 200;
  return cfg;
}

ExperimentConfig ExperimentConfig::sequence_default() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kSequence;
  cfg.output_dir = "runs/sequence";
  // vocab = corpus vocabulary + 1 (reserved pad token), fixed at run time
  cfg.arch = nn::ModelArch::lstm_lm(30, 10, {48});
  cfg.dataset.train_contamination = 0.03;
  cfg.detection.k_grid = {2, 3, 4, 6, 8};
  cfg.detection.tp_grid = {1e-2, 1e-3, 1e-4};
  cfg.dp.sigmas = {std::nullopt, 1.0};
  cfg.dp.clip_bound = 1.0;
  cfg.dp.learning_rate = 0.5;
  cfg.dp.epochs = 20;
  cfg.dp.batch_size = 200;
  return cfg;
}

ExperimentConfig ExperimentConfig::backdoor_default() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kBackdoor;
  cfg.output_dir = "runs/backdoor";
  cfg.dataset.test_normal = 1000;
  cfg.arch = nn::ModelArch::classifier({8, 16}, 10, {64});
  cfg.dp.sigmas = {std::nullopt, 0.0, 0.5};
  cfg.dp.clip_bound = 1.0;
  cfg.dp.learning_rate = 0.3;
  cfg.dp.epochs = 40;
  cfg.dp.batch_size = 100;
  return cfg;
}

ExperimentConfig ExperimentConfig::uaerm_default() {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::kUaerm;
  cfg.output_dir = "runs/uaerm";
  cfg.dataset.test_normal = 500;
  cfg.dataset.test_outlier = 500;
  cfg.arch = nn::ModelArch::dense_autoencoder({784, 128, 32, 128, 784});
  cfg.dp.clip_bound = 0.05;
  cfg.dp.learning_rate = 50.0;
  cfg.dp.batch_size = 200;
  cfg.seeds = {1};
  return cfg;
}

}  // namespace dpad::harness
