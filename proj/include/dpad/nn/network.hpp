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

#include <span>
#include <vector>

#include "dpad/nn/model.hpp"
#include "dpad/nn/sample.hpp"

namespace dpad::nn {

// Per-example flattened gradients for one mini-batch. Row i is the gradient
// of the loss on sample i alone; rows never interact.
struct GradientBatch {
  std::size_t batch_size = 0;
  std::size_t param_count = 0;
  std::vector<double> rows;  // batch_size * param_count, row-major

  std::span<double> row(std::size_t i) {
    return {rows.data() + i * param_count, param_count};
  }
  std::span<const double> row(std::size_t i) const {
    return {rows.data() + i * param_count, param_count};
  }
};

// l(h, z): non-negative loss of the model on one sample. Pure.
double forward_loss(const Model& model, const Sample& sample, LossKind kind);

// Gradient of forward_loss on one sample, written into `grad` (flattened
// layout, accumulated: caller zeroes). Returns the loss.
double example_gradient(const Model& model, const Sample& sample, LossKind kind,
                        std::span<double> grad);

// One flattened gradient row per sample.
GradientBatch per_example_gradients(const Model& model, std::span<const Sample> batch,
                                    LossKind kind);

// Next-token distribution of an lstm-lm model; entries sum to one.
std::vector<double> predict_distribution(const Model& model, std::span<const int> history);

// Class probabilities of a classifier model on one sample (label ignored).
std::vector<double> predict_classes(const Model& model, const Sample& sample);

// Loss kind a family trains with.
LossKind default_loss(ArchKind kind);

}  // namespace dpad::nn
