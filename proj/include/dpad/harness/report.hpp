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

#include <string>

#include "dpad/dp/trainer.hpp"
#include "dpad/harness/experiments.hpp"

namespace dpad::harness {

// Deterministic float formatting used by every CSV writer.
std::string format_metric(double v);
std::string format_optional(const std::optional<double>& v);

// results.csv: one row per (cell x seed x detector setting).
void write_results_csv(const ExperimentResult& result, const std::string& path);

// summary.csv: per-cell aggregates (mean/min/max over seeds).
void write_summary_csv(const ExperimentResult& result, const std::string& path);

// Reproduction manifest: config, seeds, artifact version.
void write_manifest(const ExperimentConfig& cfg, const std::string& path);

// Per-epoch JSONL (epoch, mean loss, epsilon, seconds) for one training run.
void write_epoch_log(const dp::TrainReport& report, const std::string& path);

// Pivot of results.csv into one table per metric (sigma rows, ratio columns).
void write_pivot_table(const ExperimentResult& result, const std::string& path);

ExperimentResult read_results_csv(const std::string& path, ExperimentKind kind);

}  // namespace dpad::harness
