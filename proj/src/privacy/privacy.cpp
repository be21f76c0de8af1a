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

#include "dpad/privacy/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpad/error.hpp"

namespace dpad::privacy {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_binom(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// log sum exp over a small term list.
double logsumexp(const std::vector<double>& t) {
  double m = -kInf;
  for (double v : t) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : t) s += std::exp(v - m);
  return m + std::log(s);
}

// Renyi bound at integer order alpha >= 2 via the binomial moment sum
//   sum_k C(alpha,k) (1-q)^(alpha-k) q^k exp(k(k-1)/(2 sigma^2))
// evaluated in log space.
double rdp_integer_order(double q, double sigma, long alpha) {
  if (q == 1.0) return static_cast<double>(alpha) / (2.0 * sigma * sigma);
  const double logq = std::log(q);
  const double log1mq = std::log1p(-q);
  const double a = static_cast<double>(alpha);
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(alpha) + 1);
  for (long k = 0; k <= alpha; ++k) {
    const double kd = static_cast<double>(k);
    terms.push_back(log_binom(a, kd) + (a - kd) * log1mq + kd * logq +
                    kd * (kd - 1.0) / (2.0 * sigma * sigma));
  }
  const double lse = logsumexp(terms);
  return std::max(0.0, lse / (a - 1.0));
}

// Log-moment at integer lambda = alpha - 1; lambda 0 is exactly zero.
double log_moment_integer(double q, double sigma, long lambda) {
  if (lambda == 0) return 0.0;
  return static_cast<double>(lambda) * rdp_integer_order(q, sigma, lambda + 1);
}

}  // namespace

double gaussian_sigma(const MechanismSpec& spec) {
  if (!(spec.sensitivity > 0.0))
    throw DomainError("gaussian_sigma: sensitivity must be positive");
  if (!(spec.delta > 0.0 && spec.delta < 1.0))
    throw DomainError("gaussian_sigma: delta must lie in (0, 1)");
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0))
    throw DomainError("gaussian_sigma: the closed form holds only for epsilon in (0, 1)");
  return spec.sensitivity / spec.epsilon * std::sqrt(2.0 * std::log(1.25 / spec.delta));
}

double rdp_subsampled_gaussian(double q, double sigma, double alpha) {
  if (!(q > 0.0 && q <= 1.0))
    throw DomainError("rdp_subsampled_gaussian: q must lie in (0, 1]");
  if (!(sigma > 0.0)) throw DomainError("rdp_subsampled_gaussian: sigma must be positive");
  if (!(alpha > 1.0)) throw DomainError("rdp_subsampled_gaussian: order must exceed 1");

  const double rounded = std::round(alpha);
  if (std::abs(alpha - rounded) < 1e-12)
    return rdp_integer_order(q, sigma, static_cast<long>(rounded));

  const double lambda = alpha - 1.0;
  const long lo = static_cast<long>(std::floor(lambda));
  const double frac = lambda - static_cast<double>(lo);
  const double lm_lo = log_moment_integer(q, sigma, lo);
  const double lm_hi = log_moment_integer(q, sigma, lo + 1);
  const double lm = lm_lo + frac * (lm_hi - lm_lo);
  return std::max(0.0, lm / lambda);
}

std::vector<double> AccountantState::default_orders() {
  std::vector<double> orders = {1.25, 1.5, 1.75};
  for (int a = 2; a <= 64; ++a) orders.push_back(static_cast<double>(a));
  return orders;
}

double accountant_epsilon(const AccountantState& state) {
  if (state.steps < 0) throw DomainError("accountant: negative step count");
  if (state.steps == 0) return 0.0;
  if (!(state.q > 0.0 && state.q <= 1.0))
    throw DomainError("accountant: q must lie in (0, 1]");
  if (!(state.sigma > 0.0)) throw DomainError("accountant: sigma must be positive");
  if (!(state.delta > 0.0 && state.delta < 1.0))
    throw DomainError("accountant: delta must lie in (0, 1)");

  const double log_inv_delta = std::log(1.0 / state.delta);
  double best = kInf;
  for (double alpha : state.orders) {
    if (!(alpha > 1.0)) continue;
    const double bound = rdp_subsampled_gaussian(state.q, state.sigma, alpha);
    if (!std::isfinite(bound)) continue;  // order overflowed; drop it from the grid
    const double eps =
        static_cast<double>(state.steps) * bound + log_inv_delta / (alpha - 1.0);
    best = std::min(best, eps);
  }
  return best;
}

double outlier_gap_bound(const GapBoundInputs& in) {
  const double eps_term = std::exp(in.epsilon) - 1.0 + in.delta;
  const double concentration =
      std::sqrt(static_cast<double>(in.clean_count) * eps_term * eps_term / 2.0 *
                std::log(2.0 / in.gamma));
  const double c = static_cast<double>(in.outlier_count);
  const double e_ce = std::exp(c * in.epsilon);
  const double penalty = in.uaerm_rate + concentration + e_ce - 1.0 + c * e_ce * in.delta;
  return in.outlier_gap - 2.0 * penalty;
}

double uaerm_gap(std::span<const double> avg_losses, std::span<const double> oracle_losses) {
  if (avg_losses.size() != oracle_losses.size())
    throw InputError("uaerm_gap: loss vectors differ in length");
  double gap = 0.0;
  for (std::size_t i = 0; i < avg_losses.size(); ++i) {
    if (!std::isfinite(avg_losses[i]) || !std::isfinite(oracle_losses[i]))
      throw InputError("uaerm_gap: non-finite loss at index " + std::to_string(i));
    gap = std::max(gap, std::abs(avg_losses[i] - oracle_losses[i]));
  }
  return gap;
}

UaermMeasurement UaermMeasurement::make(std::vector<double> avg, std::vector<double> oracle) {
  UaermMeasurement m;
  m.max_gap = uaerm_gap(avg, oracle);
  m.avg_losses = std::move(avg);
  m.oracle_losses = std::move(oracle);
  return m;
}

}  // namespace dpad::privacy
