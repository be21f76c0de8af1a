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
#include <vector>

namespace dpad::privacy {

// Gaussian mechanism calibration inputs. The closed form requires
// epsilon strictly inside (0, 1).
struct MechanismSpec {
  double sensitivity;  // L2 sensitivity
  double epsilon;
  double delta;
};

// Minimum Gaussian noise scale for (epsilon, delta)-DP at the given
// sensitivity: sigma = (sensitivity / epsilon) * sqrt(2 ln(1.25 / delta)).
// Throws DomainError for epsilon outside (0, 1).
double gaussian_sigma(const MechanismSpec& spec);

// Per-step Renyi divergence bound of the subsampled Gaussian mechanism at
// order alpha (sampling rate q, noise multiplier sigma). Integer orders use
// the binomial moment sum evaluated in log space; fractional orders
// interpolate the log-moment linearly between integer neighbours, which
// stays an upper bound because log-moments are convex in the order.
// At q = 1 the value reduces to alpha / (2 sigma^2).
double rdp_subsampled_gaussian(double q, double sigma, double alpha);

// Composition state for one training run: `steps` identical subsampled
// Gaussian releases at rate q and noise scale sigma, converted to epsilon
// at the fixed delta over the order grid.
struct AccountantState {
  double q = 0.0;
  double sigma = 0.0;
  double delta = 1e-5;
  long steps = 0;
  std::vector<double> orders = default_orders();

  static std::vector<double> default_orders();  // {1.25, 1.5, 1.75, 2, 3, ..., 64}
};

// epsilon = min over the order grid of steps * bound(alpha) + ln(1/delta)/(alpha-1).
// Zero steps give exactly zero; values beyond double range come back +inf.
double accountant_epsilon(const AccountantState& state);

// Inputs of the outlier loss-gap lower bound. The loss is assumed bounded
// in [0, 1]; `chance` (gamma) is the failure probability of the bound.
struct GapBoundInputs {
  double outlier_gap = 0.0;  // T
  double uaerm_rate = 0.0;   // xi
  long clean_count = 1;      // n
  double epsilon = 0.0;
  double delta = 0.0;
  long outlier_count = 0;  // c
  double gamma = 0.05;
};

// T - 2 (xi + sqrt(n (e^eps - 1 + delta)^2 / 2 * ln(2/gamma)) + e^{c eps} - 1
//        + c e^{c eps} delta).
// May be negative (vacuous); returned as-is.
double outlier_gap_bound(const GapBoundInputs& in);

// Largest per-sample absolute difference between the averaged losses of
// randomized models and the oracle losses over the same test set.
double uaerm_gap(std::span<const double> avg_losses, std::span<const double> oracle_losses);

// Empirical gap measurement: both loss vectors plus the max gap.
struct UaermMeasurement {
  std::vector<double> avg_losses;
  std::vector<double> oracle_losses;
  double max_gap = 0.0;

  static UaermMeasurement make(std::vector<double> avg, std::vector<double> oracle);
};

}  // namespace dpad::privacy
