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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dpad/harness/config.hpp"

namespace dpad::harness {

// One table cell of an experiment run. Optional metrics stay empty when a
// cell diverges or a metric is undefined (single-class record sets).
struct ResultRow {
  std::string cell;  // grid coordinates as a stable id
  std::optional<double> sigma;
  double clip_bound = 0.0;
  bool clipping = false;
  double ratio = 0.0;  // r_o or r_p
  std::uint64_t seed = 0;
  std::string mode;       // detector family (topk / prob / loss)
  double threshold = 0.0; // k or T_p where applicable
  std::optional<double> od_aupr, nd_aupr;
  std::optional<double> aupr, auroc;
  std::optional<double> benign_accuracy, success_rate;
  std::optional<long> fp, fn, tp, tn;
  std::optional<double> precision, recall, f_measure;
  std::optional<double> epsilon;
  std::optional<double> gap;        // uaerm
  std::optional<std::size_t> subset_size;
  std::optional<double> final_loss;
  std::string status = "ok";  // ok | diverged
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::kOutlier;
  std::vector<ResultRow> rows;
};

// The four experiment families. All randomness derives from config seeds;
// identical configs produce identical results rows. A non-empty log_dir
// receives one epoch JSONL per training run.
ExperimentResult run_outlier_experiment(const ExperimentConfig& cfg,
                                        const std::string& log_dir = "");
ExperimentResult run_sequence_experiment(const ExperimentConfig& cfg,
                                         const std::string& log_dir = "");
ExperimentResult run_backdoor_experiment(const ExperimentConfig& cfg,
                                         const std::string& log_dir = "");
ExperimentResult run_uaerm_experiment(const ExperimentConfig& cfg,
                                      const std::string& log_dir = "");

// Dispatch on cfg.kind; when `persist` is set, writes manifest.json,
// results.csv, summary.csv and per-run epoch logs under cfg.output_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool persist = true);

}  // namespace dpad::harness
