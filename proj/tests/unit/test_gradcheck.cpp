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

#include <doctest.h>

#include "dpad/nn/network.hpp"
#include "dpad/rng.hpp"
#include "support/oracles.hpp"

using namespace dpad;
using nn::LossKind;
using nn::ModelArch;
using nn::Sample;

namespace {

Sample image_sample(int pixels, Rng& rng, int label_range = 0) {
  Sample s;
  s.input.resize(pixels);
  for (double& v : s.input) v = rng.uniform01();
  if (label_range > 0) s.label = static_cast<int>(rng.uniform_below(label_range));
  return s;
}

Sample token_sample(int vocab, int history, Rng& rng) {
  Sample s;
  s.history.resize(history);
  for (int& t : s.history) t = static_cast<int>(rng.uniform_below(vocab));
  s.next_token = static_cast<int>(rng.uniform_below(vocab));
  return s;
}

}  // namespace

TEST_CASE("dense autoencoder gradients match central finite differences") {
  Rng rng(101);
  for (int inst = 0; inst < 8; ++inst) {
    auto m = nn::build_model(ModelArch::dense_autoencoder({10, 6, 3, 6, 10}), 500 + inst);
    const Sample s = image_sample(10, rng);
    const auto r = oracles::finite_difference_check(m, s, LossKind::kReconstructionMse);
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("conv autoencoder gradients match central finite differences") {
  Rng rng(202);
  auto arch = ModelArch::conv_autoencoder({2, 2, 1});
  arch.input_rows = 8;
  arch.input_cols = 8;
  for (int inst = 0; inst < 4; ++inst) {
    auto m = nn::build_model(arch, 600 + inst);
    const Sample s = image_sample(64, rng);
    const auto r = oracles::finite_difference_check(m, s, LossKind::kReconstructionMse);
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("classifier gradients match central finite differences") {
  Rng rng(303);
  auto with_hidden = ModelArch::classifier({2, 3}, 5, {6});
  with_hidden.input_rows = with_hidden.input_cols = 8;
  auto plain = ModelArch::classifier({2, 3}, 5, {});
  plain.input_rows = plain.input_cols = 8;
  for (int inst = 0; inst < 6; ++inst) {
    auto m = nn::build_model(inst % 2 ? plain : with_hidden, 700 + inst);
    const Sample s = image_sample(64, rng, 5);
    const auto r = oracles::finite_difference_check(m, s, LossKind::kCrossEntropy);
    CHECK(r.max_rel_error <= 1e-4);
  }
}

TEST_CASE("lstm gradients match central finite differences (1 and 2 layers)") {
  Rng rng(404);
  for (int inst = 0; inst < 4; ++inst) {
    auto m = nn::build_model(ModelArch::lstm_lm(6, 5, {7}), 800 + inst);
    const Sample s = token_sample(6, 5, rng);
    const auto r = oracles::finite_difference_check(m, s, LossKind::kCrossEntropy);
    CHECK(r.max_rel_error <= 1e-4);
  }
  for (int inst = 0; inst < 3; ++inst) {
    auto m = nn::build_model(ModelArch::lstm_lm(5, 4, {6, 4}), 900 + inst);
    const Sample s = token_sample(5, 4, rng);
    const auto r = oracles::finite_difference_check(m, s, LossKind::kCrossEntropy);
    CHECK(r.max_rel_error <= 1e-4);
  }
}
