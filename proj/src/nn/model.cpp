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

#include "dpad/nn/model.hpp"

#include <cmath>
#include <cstring>

#include "dpad/error.hpp"
#include "dpad/rng.hpp"

namespace dpad::nn {

namespace {

struct ParamSpec {
  std::string name;
  std::vector<std::size_t> shape;
  std::size_t fan_in;
};

// Fixed parameter order per family; gradient layout and checkpoints rely
// on it.
std::vector<ParamSpec> param_specs(const ModelArch& a) {
  std::vector<ParamSpec> specs;
  auto add = [&](std::string name, std::vector<std::size_t> shape, std::size_t fan_in) {
    specs.push_back({std::move(name), std::move(shape), fan_in});
  };
  const auto K = static_cast<std::size_t>(a.kernel);
  switch (a.kind) {
    case ArchKind::kDenseAutoencoder: {
      for (std::size_t l = 0; l + 1 < a.widths.size(); ++l) {
        auto in = static_cast<std::size_t>(a.widths[l]);
        auto out = static_cast<std::size_t>(a.widths[l + 1]);
        std::string tag = "l" + std::to_string(l);
        add(tag + ".w", {out, in}, in);
        add(tag + ".b", {out}, in);
      }
      break;
    }
    case ArchKind::kConvAutoencoder: {
      const std::size_t c1 = a.channels[0], c2 = a.channels[1], c3 = a.channels[2];
      add("enc1.w", {c1, 1, K, K}, K * K);
      add("enc1.b", {c1}, K * K);
      add("enc2.w", {c2, c1, K, K}, c1 * K * K);
      add("enc2.b", {c2}, c1 * K * K);
      add("enc3.w", {c3, c2, K, K}, c2 * K * K);
      add("enc3.b", {c3}, c2 * K * K);
      add("dec1.w", {c2, c3, K, K}, c3 * K * K);
      add("dec1.b", {c2}, c3 * K * K);
      add("dec2.w", {c1, c2, K, K}, c2 * K * K);
      add("dec2.b", {c1}, c2 * K * K);
      add("dec3.w", {1, c1, K, K}, c1 * K * K);
      add("dec3.b", {1}, c1 * K * K);
      break;
    }
    case ArchKind::kClassifier: {
      const std::size_t c1 = a.channels[0], c2 = a.channels[1];
      const std::size_t flat = c2 * (a.input_rows / 4) * (a.input_cols / 4);
      add("conv1.w", {c1, 1, K, K}, K * K);
      add("conv1.b", {c1}, K * K);
      add("conv2.w", {c2, c1, K, K}, c1 * K * K);
      add("conv2.b", {c2}, c1 * K * K);
      std::size_t in = flat;
      for (std::size_t l = 0; l < a.widths.size(); ++l) {
        auto w = static_cast<std::size_t>(a.widths[l]);
        std::string tag = "fc" + std::to_string(l + 1);
        add(tag + ".w", {w, in}, in);
        add(tag + ".b", {w}, in);
        in = w;
      }
      add("out.w", {static_cast<std::size_t>(a.num_classes), in}, in);
      add("out.b", {static_cast<std::size_t>(a.num_classes)}, in);
      break;
    }
    case ArchKind::kLstmLm: {
      std::size_t in = a.vocab;
      for (std::size_t l = 0; l < a.lstm_units.size(); ++l) {
        auto u = static_cast<std::size_t>(a.lstm_units[l]);
        std::string tag = "lstm" + std::to_string(l);
        add(tag + ".wx", {4 * u, in}, in + u);
        add(tag + ".wh", {4 * u, u}, in + u);
        add(tag + ".b", {4 * u}, in + u);
        in = u;
      }
      add("out.w", {static_cast<std::size_t>(a.vocab), in}, in);
      add("out.b", {static_cast<std::size_t>(a.vocab)}, in);
      break;
    }
  }
  return specs;
}

}  // namespace

Model::Model(ModelArch arch, std::vector<std::string> names, std::vector<Tensor> tensors)
    : arch_(std::move(arch)), names_(std::move(names)), tensors_(std::move(tensors)) {
  offsets_.resize(tensors_.size());
  param_count_ = 0;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    offsets_[i] = param_count_;
    param_count_ += tensors_[i].size();
  }
}

Tensor& Model::tensor(const std::string& name) {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return tensors_[i];
  throw InputError("no parameter tensor named '" + name + "'");
}

const Tensor& Model::tensor(const std::string& name) const {
  return const_cast<Model*>(this)->tensor(name);
}

std::vector<double> Model::flatten() const {
  std::vector<double> flat(param_count_);
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    std::memcpy(flat.data() + offsets_[i], tensors_[i].data(),
                tensors_[i].size() * sizeof(double));
  return flat;
}

void Model::unflatten(std::span<const double> flat) {
  if (flat.size() != param_count_)
    throw InputError("flattened parameter size mismatch");
  for (std::size_t i = 0; i < tensors_.size(); ++i)
    std::memcpy(tensors_[i].data(), flat.data() + offsets_[i],
                tensors_[i].size() * sizeof(double));
}

void Model::apply_update(std::span<const double> delta, double lr) {
  if (delta.size() != param_count_)
    throw InputError("update size does not match parameter count");
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    double* p = tensors_[i].data();
    const double* d = delta.data() + offsets_[i];
    const std::size_t n = tensors_[i].size();
    for (std::size_t k = 0; k < n; ++k) p[k] -= lr * d[k];
  }
}

bool Model::all_finite() const {
  for (const Tensor& t : tensors_)
    if (!t.all_finite()) return false;
  return true;
}

std::uint64_t fnv1a64(const void* data, std::size_t bytes, std::uint64_t h) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Model::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor& t : tensors_)
    h = fnv1a64(t.data(), t.size() * sizeof(double), h);
  return h;
}

Model build_model(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  auto specs = param_specs(arch);
  std::vector<std::string> names;
  std::vector<Tensor> tensors;
  names.reserve(specs.size());
  tensors.reserve(specs.size());

  Rng rng(mix_seed(seed, 0x6d6f64656cULL));
  for (const ParamSpec& spec : specs) {
    Tensor t(spec.shape);
    const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
    for (double& v : t.values) v = rng.uniform(-bound, bound);
    const bool is_bias = spec.shape.size() == 1;
    if (is_bias && spec.name.rfind("lstm", 0) == 0) {
      // Forget-gate bias starts near one so early cell state persists.
      const std::size_t u = spec.shape[0] / 4;
      for (std::size_t k = u; k < 2 * u; ++k) t.values[k] += 1.0;
    }
    names.push_back(spec.name);
    tensors.push_back(std::move(t));
  }
  return Model(std::move(arch), std::move(names), std::move(tensors));
}

}  // namespace dpad::nn
