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

#include "dpad/dp/trainer.hpp"
#include "dpad/error.hpp"
#include "dpad/rng.hpp"

using namespace dpad;
using dp::DpConfig;
using nn::LossKind;
using nn::ModelArch;
using nn::Sample;

namespace {

double norm2(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<Sample> random_samples(int n, int pixels, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  for (int i = 0; i < n; ++i) {
    Sample s;
    s.input.resize(pixels);
    for (double& v : s.input) v = rng.uniform01();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

TEST_CASE("clip_gradient scales (3,4) to (0.6,0.8) at C=1") {
  const auto out = dp::clip_gradient(std::vector<double>{3.0, 4.0}, 1.0);
  CHECK(out[0] == doctest::Approx(0.6));
  CHECK(out[1] == doctest::Approx(0.8));
}

TEST_CASE("clip_gradient leaves short vectors untouched and fixes zero") {
  const std::vector<double> g = {0.1, -0.2, 0.05};
  CHECK(dp::clip_gradient(g, 1.0) == g);
  const std::vector<double> z = {0.0, 0.0};
  CHECK(dp::clip_gradient(z, 1.0) == z);
}

TEST_CASE("clipping is idempotent and respects the norm bound") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> g(1 + rng.uniform_below(20));
    for (double& x : g) x = rng.normal(0, 3);
    const double c = 0.1 + 2.0 * rng.uniform01();
    const auto once = dp::clip_gradient(g, c);
    CHECK(norm2(once) <= c + 1e-12);
    CHECK(dp::clip_gradient(once, c) == once);
  }
}

TEST_CASE("clip scale equivariance: clip(a g, a C) == a clip(g, C)") {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> g(4);
    for (double& x : g) x = rng.normal(0, 2);
    const double c = 0.5 + rng.uniform01();
    const double a = 0.25 + 3.0 * rng.uniform01();
    std::vector<double> ag = g;
    for (double& x : ag) x *= a;
    const auto left = dp::clip_gradient(ag, a * c);
    const auto right = dp::clip_gradient(g, c);
    for (std::size_t k = 0; k < g.size(); ++k)
      CHECK(left[k] == doctest::Approx(a * right[k]).epsilon(1e-12));
  }
}

TEST_CASE("non-finite gradient entries are rejected") {
  std::vector<double> g = {1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(dp::clip_gradient(g, 1.0), InputError);
}

TEST_CASE("noisy_aggregate with sigma 0 is the exact mean of clipped rows") {
  nn::GradientBatch batch;
  batch.batch_size = 2;
  batch.param_count = 3;
  batch.rows = {0.1, 0.2, 0.3, -0.1, 0.0, 0.5};
  Rng rng(1);
  const auto agg = dp::noisy_aggregate(batch, 0.0, 1.0, rng);
  CHECK(agg[0] == doctest::Approx(0.0));
  CHECK(agg[1] == doctest::Approx(0.1));
  CHECK(agg[2] == doctest::Approx(0.4));
}

TEST_CASE("noisy_aggregate is deterministic for a fixed seed") {
  nn::GradientBatch batch;
  batch.batch_size = 1;
  batch.param_count = 4;
  batch.rows = {0.1, -0.1, 0.2, 0.0};
  Rng a(9), b(9);
  CHECK(dp::noisy_aggregate(batch, 1.5, 0.5, a) == dp::noisy_aggregate(batch, 1.5, 0.5, b));
}

TEST_CASE("noisy_aggregate rejects unclipped rows") {
  nn::GradientBatch batch;
  batch.batch_size = 1;
  batch.param_count = 2;
  batch.rows = {3.0, 4.0};  // norm 5 > C
  Rng rng(2);
  CHECK_THROWS_AS(dp::noisy_aggregate(batch, 1.0, 1.0, rng), ContractError);
}

TEST_CASE("noise variance matches (sigma C / B)^2 per coordinate") {
  // Monte-Carlo oracle: with zero gradients the aggregate is pure noise.
  nn::GradientBatch batch;
  batch.batch_size = 10;
  batch.param_count = 4;
  batch.rows.assign(40, 0.0);
  Rng rng(77);
  const int draws = 100000;
  std::vector<double> sq(4, 0.0);
  for (int i = 0; i < draws; ++i) {
    const auto agg = dp::noisy_aggregate(batch, 1.0, 1.0, rng);
    for (int k = 0; k < 4; ++k) sq[k] += agg[k] * agg[k];
  }
  for (int k = 0; k < 4; ++k) {
    const double var = sq[k] / draws;
    CHECK(var == doctest::Approx(0.01).epsilon(0.05));
  }
}

TEST_CASE("update through aggregation reproduces w - lr * g") {
  // gradient 4.0 on a single weight, C = 10 (no clipping), sigma = 0:
  // one step with lr 0.1 moves w from 2.0 to 1.6
  auto m = nn::build_model(ModelArch::dense_autoencoder({1, 1, 1}), 1);
  m.tensor("l0.w").values = {2.0};
  nn::GradientBatch batch;
  batch.batch_size = 1;
  batch.param_count = 4;
  batch.rows = {4.0, 0.0, 0.0, 0.0};
  Rng rng(3);
  const auto agg = dp::noisy_aggregate(batch, 0.0, 10.0, rng);
  m.apply_update(agg, 0.1);
  CHECK(m.tensor("l0.w").values[0] == doctest::Approx(1.6));
}

TEST_CASE("dp_sgd_step with no clip and no noise equals plain SGD bit-for-bit") {
  const auto arch = ModelArch::dense_autoencoder({12, 6, 12});
  const auto batch = random_samples(8, 12, 21);

  auto a = nn::build_model(arch, 3);
  DpConfig cfg;
  cfg.learning_rate = 0.2;
  cfg.batch_size = 8;
  Rng noise(1);
  dp::dp_sgd_step(a, batch, cfg, noise);

  // plain SGD by hand on the same kernel
  auto b = nn::build_model(arch, 3);
  std::vector<double> mean(b.param_count(), 0.0);
  const auto grads = nn::per_example_gradients(b, batch, LossKind::kReconstructionMse);
  for (std::size_t i = 0; i < grads.batch_size; ++i) {
    const auto row = grads.row(i);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += row[k];
  }
  for (double& v : mean) v /= static_cast<double>(batch.size());
  b.apply_update(mean, 0.2);

  CHECK(a.flatten() == b.flatten());
}

TEST_CASE("clipping-only step equals SGD on clipped gradients") {
  const auto arch = ModelArch::dense_autoencoder({10, 5, 10});
  const auto batch = random_samples(6, 10, 22);

  auto a = nn::build_model(arch, 4);
  DpConfig cfg;
  cfg.clip_bound = 0.01;
  cfg.noise_scale = 0.0;  // clipping bound only
  cfg.learning_rate = 0.3;
  cfg.batch_size = 6;
  Rng noise(1);
  dp::dp_sgd_step(a, batch, cfg, noise);

  auto b = nn::build_model(arch, 4);
  const auto grads = nn::per_example_gradients(b, batch, LossKind::kReconstructionMse);
  std::vector<double> mean(b.param_count(), 0.0);
  for (std::size_t i = 0; i < grads.batch_size; ++i) {
    const auto clipped = dp::clip_gradient(grads.row(i), 0.01);
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += clipped[k];
  }
  for (double& v : mean) v /= static_cast<double>(batch.size());
  b.apply_update(mean, 0.3);

  CHECK(a.flatten() == b.flatten());
}

TEST_CASE("training for zero epochs changes nothing and reports epsilon 0") {
  const auto arch = ModelArch::dense_autoencoder({10, 5, 10});
  const auto data = random_samples(20, 10, 30);
  DpConfig cfg;
  cfg.clip_bound = 1.0;
  cfg.noise_scale = 1.0;
  cfg.epochs = 0;
  cfg.batch_size = 10;
  privacy::AccountantState acct;
  acct.q = 0.5;
  acct.delta = 1e-5;
  const auto before = nn::build_model(arch, 5).flatten();
  const auto report = dp::train(nn::build_model(arch, 5), data, cfg, acct);
  CHECK(report.model.flatten() == before);
  CHECK(report.epsilon == 0.0);
  CHECK(report.steps == 0);
}

TEST_CASE("training is end-to-end deterministic") {
  const auto arch = ModelArch::dense_autoencoder({12, 6, 12});
  const auto data = random_samples(30, 12, 31);
  DpConfig cfg;
  cfg.clip_bound = 0.05;
  cfg.noise_scale = 1.0;
  cfg.epochs = 3;
  cfg.batch_size = 10;
  cfg.seed = 99;
  privacy::AccountantState acct;
  acct.q = 1.0 / 3.0;
  acct.delta = 1e-5;
  const auto r1 = dp::train(nn::build_model(arch, 5), data, cfg, acct);
  const auto r2 = dp::train(nn::build_model(arch, 5), data, cfg, acct);
  CHECK(r1.model.flatten() == r2.model.flatten());
  CHECK(r1.epsilon == r2.epsilon);
  CHECK(r1.steps == r2.steps);
}

TEST_CASE("epsilon is non-decreasing over epochs and decreasing in sigma") {
  const auto arch = ModelArch::dense_autoencoder({12, 6, 12});
  const auto data = random_samples(30, 12, 32);
  privacy::AccountantState acct;
  acct.q = 1.0 / 3.0;
  acct.delta = 1e-5;

  DpConfig cfg;
  cfg.clip_bound = 0.05;
  cfg.noise_scale = 1.0;
  cfg.epochs = 4;
  cfg.batch_size = 10;
  const auto report = dp::train(nn::build_model(arch, 5), data, cfg, acct);
  for (std::size_t e = 1; e < report.epochs.size(); ++e)
    CHECK(report.epochs[e].epsilon >= report.epochs[e - 1].epsilon);

  DpConfig noisier = cfg;
  noisier.noise_scale = 2.0;
  const auto quieter = dp::train(nn::build_model(arch, 5), data, noisier, acct);
  CHECK(quieter.epsilon <= report.epsilon);
}

TEST_CASE("poisson sampling trains and accounts per step") {
  const auto arch = ModelArch::dense_autoencoder({10, 5, 10});
  const auto data = random_samples(40, 10, 33);
  DpConfig cfg;
  cfg.clip_bound = 0.05;
  cfg.noise_scale = 1.0;
  cfg.epochs = 2;
  cfg.batch_size = 10;
  cfg.sampling = dp::Sampling::kPoisson;
  privacy::AccountantState acct;
  acct.q = 0.25;
  acct.delta = 1e-5;
  const auto report = dp::train(nn::build_model(arch, 5), data, cfg, acct);
  CHECK(report.steps == 8);  // 2 epochs x ceil(40/10)
  CHECK(report.sampling_mode == "poisson");
  CHECK(std::isfinite(report.epsilon));
}

TEST_CASE("invalid configurations are rejected") {
  DpConfig cfg;
  cfg.noise_scale = 1.0;  // sigma without C
  CHECK_THROWS_AS(cfg.validate(100), InputError);
  DpConfig cfg2;
  cfg2.batch_size = 300;
  CHECK_THROWS_AS(cfg2.validate(100), InputError);
  DpConfig cfg3;
  cfg3.learning_rate = 0.0;
  CHECK_THROWS_AS(cfg3.validate(100), InputError);
}
