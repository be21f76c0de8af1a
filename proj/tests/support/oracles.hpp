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
//
// Independent reference computations the tests check the library against.
// Everything here deliberately avoids the library's own code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dpad/nn/network.hpp"

namespace oracles {

// ---------------------------------------------------------------------------
// central finite differences over every model parameter
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

// Compares example_gradient against (l(p+h) - l(p-h)) / 2h per parameter.
inline GradCheckResult finite_difference_check(dpad::nn::Model& model,
                                               const dpad::nn::Sample& sample,
                                               dpad::nn::LossKind kind,
                                               double step = 1e-5) {
  std::vector<double> analytic(model.param_count(), 0.0);
  dpad::nn::example_gradient(model, sample, kind, analytic);

  std::vector<double> flat = model.flatten();
  GradCheckResult result;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const double keep = flat[i];
    flat[i] = keep + step;
    model.unflatten(flat);
    const double up = dpad::nn::forward_loss(model, sample, kind);
    flat[i] = keep - step;
    model.unflatten(flat);
    const double down = dpad::nn::forward_loss(model, sample, kind);
    flat[i] = keep;
    const double fd = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(fd), 1e-4});
    const double rel = std::abs(analytic[i] - fd) / denom;
    if (rel > result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst_index = i;
    }
  }
  model.unflatten(flat);
  return result;
}

// ---------------------------------------------------------------------------
// subsampled-Gaussian moment bound, naive high-precision summation
// ---------------------------------------------------------------------------

inline long double binom_ld(int n, int k) {
  long double r = 1.0L;
  for (int i = 1; i <= k; ++i) r = r * static_cast<long double>(n - k + i) / i;
  return r;
}

// sum_k C(a,k) (1-q)^(a-k) q^k exp(k(k-1)/(2 sigma^2)), then log / (a-1).
inline double rdp_binomial_oracle(double q, double sigma, int alpha) {
  long double sum = 0.0L;
  for (int k = 0; k <= alpha; ++k) {
    const long double term = binom_ld(alpha, k) *
                             std::pow(static_cast<long double>(1.0 - q), alpha - k) *
                             std::pow(static_cast<long double>(q), k) *
                             std::exp(static_cast<long double>(k) * (k - 1) /
                                      (2.0L * sigma * sigma));
    sum += term;
  }
  return static_cast<double>(std::log(sum) / (alpha - 1));
}

// ---------------------------------------------------------------------------
// ranking-metric oracles
// ---------------------------------------------------------------------------

struct LabeledScore {
  double score;
  bool positive;
};

// P(score_pos > score_neg) + 0.5 P(equal) over all positive/negative pairs.
inline double auroc_pairwise_oracle(const std::vector<LabeledScore>& records,
                                    bool higher_is_anomalous) {
  double wins = 0.0;
  long pairs = 0;
  for (const auto& p : records) {
    if (!p.positive) continue;
    for (const auto& n : records) {
      if (n.positive) continue;
      ++pairs;
      const double sp = higher_is_anomalous ? p.score : -p.score;
      const double sn = higher_is_anomalous ? n.score : -n.score;
      if (sp > sn)
        wins += 1.0;
      else if (sp == sn)
        wins += 0.5;
    }
  }
  return wins / static_cast<double>(pairs);
}

// Average precision by explicit threshold enumeration: every distinct score
// is a threshold; counts recomputed from scratch per threshold.
inline double aupr_threshold_oracle(const std::vector<LabeledScore>& records,
                                    bool higher_is_anomalous) {
  std::vector<double> thresholds;
  for (const auto& r : records)
    thresholds.push_back(higher_is_anomalous ? r.score : -r.score);
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  long total_pos = 0;
  for (const auto& r : records) total_pos += r.positive ? 1 : 0;

  double ap = 0.0;
  long tp_prev = 0;
  for (double tau : thresholds) {
    long tp = 0, fp = 0;
    for (const auto& r : records) {
      const double s = higher_is_anomalous ? r.score : -r.score;
      if (s >= tau) (r.positive ? tp : fp)++;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    ap += static_cast<double>(tp - tp_prev) / static_cast<double>(total_pos) * precision;
    tp_prev = tp;
  }
  return ap;
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracles
