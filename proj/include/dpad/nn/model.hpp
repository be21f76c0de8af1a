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
#include <span>
#include <string>
#include <vector>

#include "dpad/nn/arch.hpp"
#include "dpad/nn/tensor.hpp"

namespace dpad::nn {

// A model is its architecture plus an ordered list of named parameter
// tensors. The order is fixed at construction and defines the flattened
// parameter vector layout used by gradients, updates and checkpoints.
class Model {
 public:
  Model() = default;
  Model(ModelArch arch, std::vector<std::string> names, std::vector<Tensor> tensors);

  const ModelArch& arch() const { return arch_; }
  std::size_t param_count() const { return param_count_; }
  std::size_t tensor_count() const { return tensors_.size(); }

  const std::string& name(std::size_t i) const { return names_[i]; }
  Tensor& tensor(std::size_t i) { return tensors_[i]; }
  const Tensor& tensor(std::size_t i) const { return tensors_[i]; }
  Tensor& tensor(const std::string& name);
  const Tensor& tensor(const std::string& name) const;

  // Offset of tensor i inside the flattened parameter vector.
  std::size_t offset(std::size_t i) const { return offsets_[i]; }

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> flat);

  // params <- params - lr * delta, delta in flattened layout.
  void apply_update(std::span<const double> delta, double lr);

  bool all_finite() const;

  // 64-bit FNV-1a over the flattened parameter bytes.
  std::uint64_t content_hash() const;

 private:
  ModelArch arch_;
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::vector<std::size_t> offsets_;
  std::size_t param_count_ = 0;
};

// Deterministic construction: identical (arch, seed) yields bit-identical
// parameters. Weights draw from U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases
// start at zero; LSTM forget-gate biases start at one.
Model build_model(const ModelArch& arch, std::uint64_t seed);

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace dpad::nn
