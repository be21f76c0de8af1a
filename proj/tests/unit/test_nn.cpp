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

#include <cmath>

#include "dpad/error.hpp"
#include "dpad/nn/network.hpp"
#include "dpad/rng.hpp"

using namespace dpad;
using nn::ArchKind;
using nn::LossKind;
using nn::Model;
using nn::ModelArch;
using nn::Sample;

namespace {

Sample random_image_sample(int pixels, std::uint64_t seed, int label = 0) {
  Rng rng(seed);
  Sample s;
  s.input.resize(pixels);
  for (double& v : s.input) v = rng.uniform01();
  s.label = label;
  return s;
}

}  // namespace

TEST_CASE("identical (arch, seed) builds bit-identical parameters") {
  const auto arch = ModelArch::dense_autoencoder({784, 128, 32, 128, 784});
  const Model a = nn::build_model(arch, 7);
  const Model b = nn::build_model(arch, 7);
  CHECK(a.content_hash() == b.content_hash());
  CHECK(a.flatten() == b.flatten());
}

TEST_CASE("different seeds build different parameters") {
  const auto arch = ModelArch::classifier({4, 6}, 10);
  CHECK(nn::build_model(arch, 3).content_hash() != nn::build_model(arch, 4).content_hash());
}

TEST_CASE("lstm output layer width equals the vocabulary") {
  const auto arch = ModelArch::lstm_lm(29, 10, {16});
  const Model m = nn::build_model(arch, 1);
  CHECK(m.tensor("out.w").shape[0] == 29);
  CHECK(m.tensor("out.b").shape[0] == 29);
}

TEST_CASE("mirror-width violation is a construction error") {
  ModelArch arch;
  arch.kind = ArchKind::kDenseAutoencoder;
  arch.widths = {784, 128, 32, 64, 784};
  CHECK_THROWS_AS(arch.validate(), ArchError);
  CHECK_THROWS_AS(nn::build_model(arch, 1), ArchError);
}

TEST_CASE("one-unit autoencoder forward loss matches hand arithmetic") {
  // hidden a = relu(1 * x) = 1, output y = sigmoid(0) = 0.5, loss (0.5 - 1)^2
  const auto arch = ModelArch::dense_autoencoder({1, 1, 1});
  Model m = nn::build_model(arch, 1);
  m.tensor("l0.w").values = {1.0};
  m.tensor("l0.b").values = {0.0};
  m.tensor("l1.w").values = {0.0};
  m.tensor("l1.b").values = {0.0};
  Sample s;
  s.input = {1.0};
  CHECK(nn::forward_loss(m, s, LossKind::kReconstructionMse) == doctest::Approx(0.25));

  // by hand: dL/dy = 2(y - x) = -1, output dz = -1 * y(1-y) = -0.25,
  // d l1.w = dz * a = -0.25, d l1.b = -0.25; nothing reaches layer 0 (w = 0)
  std::vector<double> grad(m.param_count(), 0.0);
  nn::example_gradient(m, s, LossKind::kReconstructionMse, grad);
  CHECK(grad[0] == doctest::Approx(0.0));   // l0.w
  CHECK(grad[1] == doctest::Approx(0.0));   // l0.b
  CHECK(grad[2] == doctest::Approx(-0.25)); // l1.w
  CHECK(grad[3] == doctest::Approx(-0.25)); // l1.b
}

TEST_CASE("perfect reconstruction yields zero loss") {
  // identity encoder, zero decoder: y = sigmoid(0) = 0.5 = x exactly
  const auto arch = ModelArch::dense_autoencoder({2, 2, 2});
  Model m = nn::build_model(arch, 1);
  m.tensor("l0.w").values = {1, 0, 0, 1};
  m.tensor("l0.b").values = {0, 0};
  m.tensor("l1.w").values = {0, 0, 0, 0};
  m.tensor("l1.b").values = {0, 0};
  Sample s;
  s.input = {0.5, 0.5};
  CHECK(nn::forward_loss(m, s, LossKind::kReconstructionMse) == doctest::Approx(0.0));
}

TEST_CASE("cross-entropy of a certain correct prediction is zero") {
  const auto arch = ModelArch::classifier({2, 2}, 4);
  Model m = nn::build_model(arch, 5);
  Sample s = random_image_sample(28 * 28, 2, 1);
  // drive the logit of the true class far up
  auto& w = m.tensor("out.b");
  w.values.assign(w.size(), 0.0);
  w.values[1] = 200.0;
  CHECK(nn::forward_loss(m, s, LossKind::kCrossEntropy) == doctest::Approx(0.0));
}

TEST_CASE("loss is non-negative for both kinds on random inputs") {
  const auto ae = nn::build_model(ModelArch::dense_autoencoder({16, 8, 4, 8, 16}), 3);
  const auto clf = nn::build_model(
      [] {
        auto a = ModelArch::classifier({2, 3}, 5);
        a.input_rows = 8;
        a.input_cols = 8;
        return a;
      }(),
      4);
  for (std::uint64_t i = 0; i < 25; ++i) {
    Sample s16 = random_image_sample(16, 100 + i);
    CHECK(nn::forward_loss(ae, s16, LossKind::kReconstructionMse) >= 0.0);
    Sample s64 = random_image_sample(64, 200 + i, static_cast<int>(i % 5));
    CHECK(nn::forward_loss(clf, s64, LossKind::kCrossEntropy) >= 0.0);
  }
}

TEST_CASE("shape mismatch raises an input error") {
  const auto m = nn::build_model(ModelArch::dense_autoencoder({16, 8, 16}), 3);
  Sample s = random_image_sample(15, 1);
  CHECK_THROWS_AS(nn::forward_loss(m, s, LossKind::kReconstructionMse), InputError);
}

TEST_CASE("loss kind must match the family") {
  const auto m = nn::build_model(ModelArch::dense_autoencoder({16, 8, 16}), 3);
  Sample s = random_image_sample(16, 1);
  CHECK_THROWS_AS(nn::forward_loss(m, s, LossKind::kCrossEntropy), InputError);
}

TEST_CASE("predict_distribution sums to one and respects the vocabulary") {
  const auto m = nn::build_model(ModelArch::lstm_lm(12, 6, {10}), 9);
  std::vector<int> history = {0, 3, 5, 7, 11, 2};
  const auto dist = nn::predict_distribution(m, history);
  REQUIRE(dist.size() == 12);
  double sum = 0.0;
  for (double p : dist) {
    CHECK(p >= 0.0);
    sum += p;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-9);

  std::vector<int> bad = {0, 3, 5, 7, 12, 2};  // token 12 out of vocabulary
  CHECK_THROWS_AS(nn::predict_distribution(m, bad), InputError);
  std::vector<int> short_history = {0, 3};
  CHECK_THROWS_AS(nn::predict_distribution(m, short_history), InputError);
}

TEST_CASE("zeroed output layer gives the uniform distribution") {
  auto m = nn::build_model(ModelArch::lstm_lm(8, 4, {6}), 2);
  m.tensor("out.w").values.assign(m.tensor("out.w").size(), 0.0);
  m.tensor("out.b").values.assign(m.tensor("out.b").size(), 0.0);
  std::vector<int> history = {1, 2, 3, 4};
  const auto dist = nn::predict_distribution(m, history);
  for (double p : dist) CHECK(p == doctest::Approx(1.0 / 8.0));
}

TEST_CASE("per-example gradients: batch of one equals the single gradient") {
  const auto m = nn::build_model(ModelArch::dense_autoencoder({12, 6, 12}), 8);
  const Sample s = random_image_sample(12, 77);
  std::vector<double> single(m.param_count(), 0.0);
  nn::example_gradient(m, s, LossKind::kReconstructionMse, single);
  const auto batch = nn::per_example_gradients(m, std::vector<Sample>{s},
                                               LossKind::kReconstructionMse);
  REQUIRE(batch.batch_size == 1);
  for (std::size_t i = 0; i < single.size(); ++i) CHECK(batch.row(0)[i] == single[i]);
}

TEST_CASE("per-example gradients are independent of batch order") {
  const auto m = nn::build_model(ModelArch::dense_autoencoder({12, 6, 12}), 8);
  std::vector<Sample> batch;
  for (std::uint64_t i = 0; i < 5; ++i) batch.push_back(random_image_sample(12, 300 + i));
  const auto fwd = nn::per_example_gradients(m, batch, LossKind::kReconstructionMse);
  std::vector<Sample> reversed(batch.rbegin(), batch.rend());
  const auto rev = nn::per_example_gradients(m, reversed, LossKind::kReconstructionMse);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto a = fwd.row(i);
    const auto b = rev.row(batch.size() - 1 - i);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(a[k] == b[k]);
  }
}

TEST_CASE("empty batch raises an input error") {
  const auto m = nn::build_model(ModelArch::dense_autoencoder({12, 6, 12}), 8);
  std::vector<Sample> empty;
  CHECK_THROWS_AS(nn::per_example_gradients(m, empty, LossKind::kReconstructionMse),
                  InputError);
}

TEST_CASE("trained toy automaton: A always followed by B becomes near-certain") {
  // tokens: A=0, B=1, vocabulary {0,1}; training pairs alternate ABAB...
  const auto arch = ModelArch::lstm_lm(2, 4, {8});
  Model m = nn::build_model(arch, 4);
  std::vector<Sample> pairs;
  for (int i = 0; i < 8; ++i) {
    Sample s;
    s.history = (i % 2 == 0) ? std::vector<int>{0, 1, 0, 1} : std::vector<int>{1, 0, 1, 0};
    s.next_token = (i % 2 == 0) ? 0 : 1;
    pairs.push_back(std::move(s));
  }
  // plain gradient descent, no DP machinery, straight on the kernel
  std::vector<double> grad(m.param_count());
  for (int step = 0; step < 300; ++step) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> row(m.param_count());
    for (const auto& s : pairs) {
      std::fill(row.begin(), row.end(), 0.0);
      nn::example_gradient(m, s, LossKind::kCrossEntropy, row);
      for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += row[k] / pairs.size();
    }
    m.apply_update(grad, 1.0);
  }
  std::vector<int> history = {0, 1, 0, 1};  // ...ends in B? no: ends in 1=B -> next A
  const auto dist = nn::predict_distribution(m, history);
  CHECK(dist[0] > 0.9);
  std::vector<int> history2 = {1, 0, 1, 0};  // ends in A -> next B
  const auto dist2 = nn::predict_distribution(m, history2);
  CHECK(dist2[1] > 0.9);
}
