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

#include "dpad/dp/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <thread>

#include "dpad/error.hpp"

namespace dpad::dp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Examples per accumulation chunk. Fixed so the floating-point reduction
// order never depends on the number of worker threads.
constexpr std::size_t kChunk = 16;

double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct StepWorkspace {
  std::vector<std::vector<double>> chunk_sums;
  std::vector<double> row;           // single-thread scratch
  std::vector<std::vector<double>> rows;  // one scratch row per worker
  std::vector<double> aggregate;
};

// Sum of (optionally clipped) per-example gradients over the batch, chunk
// by chunk in index order. Returns the summed per-example loss. Chunks are
// distributed over a few workers; the combine order is fixed by chunk index.
double accumulate_clipped(const nn::Model& model, std::span<const nn::Sample> batch,
                          nn::LossKind kind, std::optional<double> clip,
                          StepWorkspace& ws) {
  const std::size_t d = model.param_count();
  const std::size_t n_chunks = (batch.size() + kChunk - 1) / kChunk;
  ws.chunk_sums.resize(n_chunks);

  std::vector<double> chunk_loss(n_chunks, 0.0);
  auto run_chunk = [&](std::size_t c, std::vector<double>& row) {
    auto& sum = ws.chunk_sums[c];
    sum.assign(d, 0.0);
    const std::size_t lo = c * kChunk;
    const std::size_t hi = std::min(batch.size(), lo + kChunk);
    double loss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      std::fill(row.begin(), row.end(), 0.0);
      loss += nn::example_gradient(model, batch[i], kind, row);
      if (clip) clip_gradient_inplace(row, *clip);
      for (std::size_t k = 0; k < d; ++k) sum[k] += row[k];
    }
    chunk_loss[c] = loss;
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_workers = std::min<std::size_t>(hw, n_chunks);
  if (n_workers <= 1) {
    ws.row.assign(d, 0.0);
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c, ws.row);
  } else {
    ws.rows.resize(n_workers);
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      workers.emplace_back([&, w]() {
        ws.rows[w].assign(d, 0.0);
        try {
          for (std::size_t c = w; c < n_chunks; c += n_workers) run_chunk(c, ws.rows[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ws.aggregate.assign(d, 0.0);
  for (std::size_t c = 0; c < n_chunks; ++c) {
    const auto& sum = ws.chunk_sums[c];
    for (std::size_t k = 0; k < d; ++k) ws.aggregate[k] += sum[k];
  }
  double total_loss = 0.0;
  for (double l : chunk_loss) total_loss += l;
  return total_loss;
}

// Shared step logic: accumulate, noise, normalize, update. `divisor` is the
// batch size to average by (actual size for shuffled batches, nominal size
// under Poisson sampling). Returns the batch mean loss.
double fused_step(nn::Model& model, std::span<const nn::Sample> batch, nn::LossKind kind,
                  const DpConfig& cfg, double divisor, Rng& noise, StepWorkspace& ws) {
  double loss_sum = 0.0;
  if (!batch.empty()) {
    loss_sum = accumulate_clipped(model, batch, kind, cfg.clip_bound, ws);
  } else {
    ws.aggregate.assign(model.param_count(), 0.0);
  }
  if (cfg.noise_on()) {
    const double stddev = *cfg.noise_scale * *cfg.clip_bound;
    for (double& v : ws.aggregate) v += noise.normal() * stddev;
  }
  for (double& v : ws.aggregate) v /= divisor;
  model.apply_update(ws.aggregate, cfg.learning_rate);
  return batch.empty() ? 0.0 : loss_sum / static_cast<double>(batch.size());
}

}  // namespace

std::string to_string(Sampling s) {
  return s == Sampling::kShuffledMinibatch ? "shuffled-minibatch" : "poisson";
}

Sampling sampling_from_string(const std::string& s) {
  if (s == "shuffled-minibatch") return Sampling::kShuffledMinibatch;
  if (s == "poisson") return Sampling::kPoisson;
  throw InputError("unknown sampling mode: " + s);
}

void DpConfig::validate(std::size_t dataset_size) const {
  if (noise_scale && !clip_bound)
    throw InputError("noise scale requires a clipping bound");
  if (noise_scale && *noise_scale < 0.0) throw InputError("noise scale must be >= 0");
  if (clip_bound && !(*clip_bound > 0.0)) throw InputError("clipping bound must be > 0");
  if (!(learning_rate > 0.0)) throw InputError("learning rate must be > 0");
  if (batch_size <= 0 || static_cast<std::size_t>(batch_size) > dataset_size)
    throw InputError("batch size must lie in [1, dataset size]");
  if (epochs < 0) throw InputError("epoch count must be >= 0");
}

std::vector<double> clip_gradient(std::span<const double> g, double clip_bound) {
  std::vector<double> out(g.begin(), g.end());
  clip_gradient_inplace(out, clip_bound);
  return out;
}

double clip_gradient_inplace(std::span<double> g, double clip_bound) {
  if (!(clip_bound > 0.0)) throw InputError("clipping bound must be > 0");
  double sq = 0.0;
  for (double x : g) {
    if (!std::isfinite(x)) throw InputError("clip_gradient: non-finite gradient entry");
    sq += x * x;
  }
  const double norm = std::sqrt(sq);
  // the relative slack keeps clipping exactly idempotent under fp rounding
  if (norm <= clip_bound * (1.0 + 1e-12) || norm == 0.0) return 1.0;
  const double scale = clip_bound / norm;
  for (double& x : g) x *= scale;
  return scale;
}

std::vector<double> noisy_aggregate(const nn::GradientBatch& batch, double sigma,
                                    double clip_bound, Rng& noise) {
  if (batch.batch_size == 0) throw InputError("noisy_aggregate: empty batch");
  if (sigma < 0.0) throw InputError("noisy_aggregate: sigma must be >= 0");
  for (std::size_t i = 0; i < batch.batch_size; ++i) {
    if (l2_norm(batch.row(i)) > clip_bound + 1e-9)
      throw ContractError("noisy_aggregate: row " + std::to_string(i) +
                          " exceeds the clip bound");
  }
  std::vector<double> agg(batch.param_count, 0.0);
  for (std::size_t i = 0; i < batch.batch_size; ++i) {
    const auto row = batch.row(i);
    for (std::size_t k = 0; k < batch.param_count; ++k) agg[k] += row[k];
  }
  if (sigma > 0.0) {
    const double stddev = sigma * clip_bound;
    for (double& v : agg) v += noise.normal() * stddev;
  }
  const auto b = static_cast<double>(batch.batch_size);
  for (double& v : agg) v /= b;
  return agg;
}

double dp_sgd_step(nn::Model& model, std::span<const nn::Sample> batch,
                   const DpConfig& cfg, Rng& noise) {
  if (batch.empty()) throw InputError("dp_sgd_step: empty batch");
  cfg.validate(std::max<std::size_t>(batch.size(), cfg.batch_size));
  const nn::LossKind kind = nn::default_loss(model.arch().kind);

  const std::vector<double> snapshot = model.flatten();
  StepWorkspace ws;
  const double loss =
      fused_step(model, batch, kind, cfg, static_cast<double>(batch.size()), noise, ws);
  if (!std::isfinite(loss) || !model.all_finite()) {
    model.unflatten(snapshot);
    throw TrainingError("dp_sgd_step: non-finite loss or parameters", -1);
  }
  return loss;
}

TrainReport train(nn::Model model, std::span<const nn::Sample> data, const DpConfig& cfg,
                  privacy::AccountantState accountant) {
  if (data.empty()) throw InputError("train: empty dataset");
  cfg.validate(data.size());
  const nn::LossKind kind = nn::default_loss(model.arch().kind);
  const auto t0 = std::chrono::steady_clock::now();

  const std::size_t n = data.size();
  const auto b = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t steps_per_epoch = (n + b - 1) / b;

  accountant.sigma = cfg.noise_on() ? *cfg.noise_scale : 0.0;
  accountant.steps = 0;

  // Separate streams: data order must not perturb noise and vice versa.
  Rng order_rng(mix_seed(cfg.seed, 0x0dd37ULL));
  NoiseStream noise_stream(mix_seed(cfg.seed, 0x770153ULL));

  auto epsilon_now = [&]() -> double {
    if (cfg.noise_on()) return privacy::accountant_epsilon(accountant);
    // No noise: nothing is hidden once at least one step ran.
    return accountant.steps == 0 ? 0.0 : kInf;
  };

  TrainReport report;
  report.sampling_mode = to_string(cfg.sampling);

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<nn::Sample> batch_storage;
  batch_storage.reserve(b + b / 2);
  StepWorkspace ws;

  std::vector<double> last_finite = model.flatten();
  long step_index = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto e0 = std::chrono::steady_clock::now();
    double loss_sum = 0.0;
    std::size_t examples_seen = 0;
    bool epoch_diverged = false;

    if (cfg.sampling == Sampling::kShuffledMinibatch) order_rng.shuffle(order);

    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      batch_storage.clear();
      if (cfg.sampling == Sampling::kShuffledMinibatch) {
        const std::size_t lo = s * b;
        const std::size_t hi = std::min(n, lo + b);
        for (std::size_t i = lo; i < hi; ++i) batch_storage.push_back(data[order[i]]);
      } else {
        const double q = static_cast<double>(b) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
          if (order_rng.uniform01() < q) batch_storage.push_back(data[i]);
      }

      const double divisor = cfg.sampling == Sampling::kPoisson
                                 ? static_cast<double>(b)
                                 : static_cast<double>(std::max<std::size_t>(
                                       1, batch_storage.size()));
      Rng noise = noise_stream.at_step(static_cast<std::uint64_t>(step_index));
      const double loss = fused_step(model, batch_storage, kind, cfg, divisor, noise, ws);
      ++step_index;
      if (cfg.noise_on()) ++accountant.steps;

      loss_sum += loss * static_cast<double>(batch_storage.size());
      examples_seen += batch_storage.size();

      if (!std::isfinite(loss) || !model.all_finite()) {
        epoch_diverged = true;
        break;
      }
    }

    const double eps = epsilon_now();
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - e0).count();
    const double mean_loss =
        examples_seen > 0 ? loss_sum / static_cast<double>(examples_seen)
                          : std::numeric_limits<double>::quiet_NaN();
    report.epochs.push_back({epoch, mean_loss, eps, secs});

    if (epoch_diverged) {
      report.diverged = true;
      report.diverged_epoch = epoch;
      model.unflatten(last_finite);
      break;
    }
    last_finite = model.flatten();
  }

  report.steps = step_index;
  report.epsilon = epsilon_now();
  report.model = std::move(model);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

}  // namespace dpad::dp
