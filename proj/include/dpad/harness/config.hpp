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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpad/dp/trainer.hpp"
#include "dpad/nn/arch.hpp"

namespace dpad::harness {

enum class ExperimentKind { kOutlier, kSequence, kBackdoor, kUaerm };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

// Data sources. "synth-digits" / "synth-glyphs" select the built-in
// generators; "idx:<images>[:<labels>]" loads IDX files;
// "text:<sessions>[:<labels>]" loads a parsed session corpus.
struct DatasetSpec {
  std::string normal_source = "synth-digits";
  std::string outlier_source = "synth-glyphs";
  std::size_t train_size = 6000;
  std::size_t test_normal = 1000;
  std::size_t test_outlier = 1000;
  std::vector<double> r_o_grid = {0.05};
  std::vector<double> r_p_grid = {0.01};
  int train_sessions = 2000;
  int test_normal_sessions = 1000;
  int test_abnormal_sessions = 200;
  double train_contamination = 0.02;  // abnormal sessions hidden in training data
  std::uint64_t data_seed = 99;
};

struct DpGridSpec {
  // One entry per noise setting; empty optional is the no-DP baseline and
  // 0.0 is the clipping-only ablation.
  std::vector<std::optional<double>> sigmas = {std::nullopt, 0.0, 1.0, 5.0};
  double clip_bound = 1.0;
  std::vector<double> clip_bound_grid;  // backdoor C sweep; empty = skip
  double c_sweep_sigma = 0.5;
  double learning_rate = 0.15;
  int batch_size = 200;
  int epochs = 20;
  double delta = 1e-5;
  dp::Sampling sampling = dp::Sampling::kShuffledMinibatch;
};

struct DetectionSpec {
  std::vector<int> k_grid = {1, 2, 3, 4, 6};
  std::vector<double> tp_grid = {1e-2, 1e-3, 1e-4};
  std::vector<double> tau_grid;
};

struct UaermSpec {
  std::vector<std::size_t> subset_sizes = {1000, 3000, 6000};
  std::vector<double> sigmas = {0.5, 1.0, 5.0};
  int subsets_per_cell = 3;
  int repeats_per_subset = 3;
  int epochs = 10;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kOutlier;
  std::string output_dir = "run";
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  DatasetSpec dataset;
  nn::ModelArch arch;
  DpGridSpec dp;
  DetectionSpec detection;
  UaermSpec uaerm;

  void validate() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);

  // Desk-scale defaults per experiment family.
  static ExperimentConfig outlier_default();
  static ExperimentConfig sequence_default();
  static ExperimentConfig backdoor_default();
  static ExperimentConfig uaerm_default();
};

}  // namespace dpad::harness
