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
#include <span>
#include <string>
#include <vector>

#include "dpad/nn/network.hpp"
#include "dpad/privacy/privacy.hpp"
#include "dpad/rng.hpp"

namespace dpad::dp {

enum class Sampling {
  kShuffledMinibatch,  // epoch-wise shuffle, fixed-size consecutive batches
  kPoisson,            // each example joins a step independently with rate B/N
};

std::string to_string(Sampling s);
Sampling sampling_from_string(const std::string& s);

// Trainer configuration. Unset clip bound and noise scale give the plain
// SGD baseline; clip bound with sigma = 0 applies clipping only.
struct DpConfig {
  std::optional<double> clip_bound;   // C
  std::optional<double> noise_scale;  // sigma (noise stddev on the batch sum is sigma*C)
  double learning_rate = 0.15;
  int batch_size = 200;
  int epochs = 20;
  std::uint64_t seed = 1;
  Sampling sampling = Sampling::kShuffledMinibatch;

  bool clipping_on() const { return clip_bound.has_value(); }
  bool noise_on() const { return noise_scale.has_value() && *noise_scale > 0.0; }

  // Throws InputError when inconsistent with itself or the dataset size.
  void validate(std::size_t dataset_size) const;
};

// g * min(1, C / ||g||2). Norm-zero input passes through untouched.
std::vector<double> clip_gradient(std::span<const double> g, double clip_bound);

// In-place variant; returns the scale that was applied.
double clip_gradient_inplace(std::span<double> g, double clip_bound);

// (sum of rows + z) / B where z has i.i.d. N(0, (sigma*C)^2) entries drawn
// from `noise`. Every row must already satisfy the clip bound; rows with
// norm above C + 1e-9 raise ContractError.
std::vector<double> noisy_aggregate(const nn::GradientBatch& batch, double sigma,
                                    double clip_bound, Rng& noise);

// One noisy-SGD parameter update on a mini-batch. With clip bound and noise
// scale unset this is exactly one plain mini-batch SGD step. Returns the
// mean loss over the batch. Raises TrainingError (and restores the incoming
// parameters) when the update produces non-finite values.
double dp_sgd_step(nn::Model& model, std::span<const nn::Sample> batch,
                   const DpConfig& cfg, Rng& noise);

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double epsilon = 0.0;
  double seconds = 0.0;
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  nn::Model model;  // final parameters; on divergence, the last finite epoch state
  double epsilon = 0.0;
  long steps = 0;
  bool diverged = false;
  int diverged_epoch = -1;  // epoch in which divergence occurred
  double wall_seconds = 0.0;
  std::string sampling_mode;
};

// Runs epochs * ceil(N / B) steps. The accountant template provides
// (q, delta, order grid); the trainer fills sigma and advances the step
// count once per step while noise is active. Divergence stops the run and
// reports the last finite state instead of raising.
TrainReport train(nn::Model model, std::span<const nn::Sample> data, const DpConfig& cfg,
                  privacy::AccountantState accountant);

}  // namespace dpad::dp
