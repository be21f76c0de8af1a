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
// Acceptance gate: one checkable criterion per section, each printed as a
// single pass/fail line. Run everything (no argument) or one criterion
// (--criterion N). Thresholds are fixed here, not configurable.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpad/data/forge.hpp"
#include "dpad/data/sessions.hpp"
#include "dpad/dp/trainer.hpp"
#include "dpad/harness/experiments.hpp"
#include "dpad/harness/report.hpp"
#include "dpad/metrics/metrics.hpp"
#include "dpad/nn/network.hpp"
#include "dpad/privacy/privacy.hpp"
#include "dpad/rng.hpp"
#include "support/oracles.hpp"

namespace {

using namespace dpad;
namespace fs = std::filesystem;

int failures = 0;

void report(int criterion, bool pass, const std::string& name, const std::string& detail) {
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion << ": " << name
            << " — " << detail << std::endl;
  if (!pass) ++failures;
}

std::string fmt(double v) { return harness::format_metric(v); }

// ---------------------------------------------------------------------------
// 1. closed-form Gaussian calibration
// ---------------------------------------------------------------------------
void criterion_1() {
  const double sigma = privacy::gaussian_sigma({1.0, 0.5, 1e-5});
  const long double oracle = (1.0L / 0.5L) * std::sqrt(2.0L * std::log(1.25L / 1e-5L));
  const bool pass = std::abs(sigma - 9.689610) <= 1e-5 &&
                    std::abs(sigma - static_cast<double>(oracle)) <= 1e-12;
  report(1, pass, "Gaussian mechanism calibration",
         "sigma(delta=1, eps=0.5, delta=1e-5) = " + fmt(sigma) + ", target 9.689610 +/- 1e-5");
}

// ---------------------------------------------------------------------------
// 2. accountant golden values and monotonicity
// ---------------------------------------------------------------------------
void criterion_2() {
  privacy::AccountantState st;
  st.q = 200.0 / 60000.0;
  st.delta = 1e-5;
  st.steps = 18000;
  const struct {
    double sigma, expected;
  } golden[] = {{0.5, 22.23}, {1.0, 3.09}, {5.0, 0.44}, {10.0, 0.25}};

  bool pass = true;
  std::ostringstream detail;
  for (const auto& g : golden) {
    st.sigma = g.sigma;
    const double eps = privacy::accountant_epsilon(st);
    const bool ok = std::abs(eps - g.expected) <= 0.25 * g.expected;
    pass = pass && ok;
    detail << "sigma=" << g.sigma << ": eps=" << fmt(eps) << " (target " << g.expected
           << " +/-25%" << (ok ? "" : " MISS") << ") ";
  }

  Rng rng(20240205);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    privacy::AccountantState s;
    s.q = 0.0005 + 0.3 * rng.uniform01();
    s.sigma = 0.4 + 6.0 * rng.uniform01();
    s.delta = std::pow(10.0, -7.0 + 3.0 * rng.uniform01());
    s.steps = 1 + static_cast<long>(rng.uniform_below(30000));
    const double base = privacy::accountant_epsilon(s);
    auto t = s;
    t.steps += 1 + static_cast<long>(rng.uniform_below(10000));
    if (privacy::accountant_epsilon(t) < base - 1e-12) ++violations;
    t = s;
    t.q = std::min(1.0, s.q * 1.7);
    if (privacy::accountant_epsilon(t) < base - 1e-12) ++violations;
    t = s;
    t.sigma *= 1.6;
    if (privacy::accountant_epsilon(t) > base + 1e-12) ++violations;
    t = s;
    t.delta = std::min(0.1, s.delta * 50);
    if (privacy::accountant_epsilon(t) > base + 1e-12) ++violations;
  }
  pass = pass && violations == 0;
  detail << "| monotonicity violations over 1000 triples: " << violations;
  report(2, pass, "moments-accountant golden values", detail.str());
}

// ---------------------------------------------------------------------------
// 3. per-layer gradient correctness, 100 randomized instances
// ---------------------------------------------------------------------------
void criterion_3() {
  Rng rng(777);
  double worst = 0.0;
  int instances = 0;

  auto image_sample = [&](int pixels, int label_range) {
    nn::Sample s;
    s.input.resize(pixels);
    for (double& v : s.input) v = rng.uniform01();
    if (label_range > 0) s.label = static_cast<int>(rng.uniform_below(label_range));
    return s;
  };

  // dense (30): dense + sigmoid + mse paths
  for (int i = 0; i < 30; ++i) {
    auto m = nn::build_model(nn::ModelArch::dense_autoencoder({10, 6, 3, 6, 10}), 1000 + i);
    const auto s = image_sample(10, 0);
    worst = std::max(worst,
                     oracles::finite_difference_check(m, s, nn::LossKind::kReconstructionMse)
                         .max_rel_error);
    ++instances;
  }
  // conv + max-pool + upsample (20)
  auto conv_arch = nn::ModelArch::conv_autoencoder({2, 2, 1});
  conv_arch.input_rows = conv_arch.input_cols = 8;
  for (int i = 0; i < 20; ++i) {
    auto m = nn::build_model(conv_arch, 2000 + i);
    const auto s = image_sample(64, 0);
    worst = std::max(worst,
                     oracles::finite_difference_check(m, s, nn::LossKind::kReconstructionMse)
                         .max_rel_error);
    ++instances;
  }
  // conv + max-pool + dense + softmax/cross-entropy (25)
  auto clf_hidden = nn::ModelArch::classifier({2, 3}, 5, {6});
  clf_hidden.input_rows = clf_hidden.input_cols = 8;
  auto clf_plain = nn::ModelArch::classifier({2, 3}, 5, {});
  clf_plain.input_rows = clf_plain.input_cols = 8;
  for (int i = 0; i < 25; ++i) {
    auto m = nn::build_model(i % 2 ? clf_plain : clf_hidden, 3000 + i);
    const auto s = image_sample(64, 5);
    worst = std::max(
        worst,
        oracles::finite_difference_check(m, s, nn::LossKind::kCrossEntropy).max_rel_error);
    ++instances;
  }
  // lstm cells, single and stacked (25)
  for (int i = 0; i < 25; ++i) {
    const bool stacked = i % 2 == 1;
    auto m = nn::build_model(stacked ? nn::ModelArch::lstm_lm(5, 4, {6, 4})
                                     : nn::ModelArch::lstm_lm(6, 5, {7}),
                             4000 + i);
    nn::Sample s;
    const int vocab = stacked ? 5 : 6;
    const int history = stacked ? 4 : 5;
    s.history.resize(history);
    for (int& t : s.history) t = static_cast<int>(rng.uniform_below(vocab));
    s.next_token = static_cast<int>(rng.uniform_below(vocab));
    worst = std::max(
        worst,
        oracles::finite_difference_check(m, s, nn::LossKind::kCrossEntropy).max_rel_error);
    ++instances;
  }

  const bool pass = worst <= 1e-4 && instances == 100;
  report(3, pass, "finite-difference gradient checks",
         std::to_string(instances) + " instances, max relative error " + fmt(worst) +
             " (bound 1e-4)");
}

// ---------------------------------------------------------------------------
// 4. metric oracle equivalence
// ---------------------------------------------------------------------------
void criterion_4() {
  Rng rng(31337);
  double worst_roc = 0.0, worst_pr = 0.0;
  for (int i = 0; i < 500; ++i) {
    metrics::ScoreSet s;
    s.direction = rng.uniform01() < 0.5 ? metrics::Direction::kHigherIsAnomalous
                                        : metrics::Direction::kLowerIsAnomalous;
    const std::size_t n = 2 + rng.uniform_below(199);
    for (std::size_t k = 0; k < n; ++k)
      s.records.push_back({static_cast<std::int64_t>(k),
                           std::floor(rng.uniform01() * 25.0) / 25.0,
                           rng.uniform01() < 0.35});
    bool has_pos = false, has_neg = false;
    for (const auto& r : s.records) (r.positive ? has_pos : has_neg) = true;
    if (!has_pos) s.records.push_back({991, 0.4, true});
    if (!has_neg) s.records.push_back({992, 0.6, false});

    std::vector<oracles::LabeledScore> labeled;
    for (const auto& r : s.records) labeled.push_back({r.score, r.positive});
    const bool higher = s.direction == metrics::Direction::kHigherIsAnomalous;
    worst_roc = std::max(
        worst_roc,
        std::abs(metrics::auroc(s) - oracles::auroc_pairwise_oracle(labeled, higher)));
    worst_pr = std::max(
        worst_pr,
        std::abs(metrics::aupr(s) - oracles::aupr_threshold_oracle(labeled, higher)));
  }

  const auto stats = metrics::confusion_stats({8, 2, 0, 2});
  const bool hand = *stats.precision == 0.8 && *stats.recall == 0.8 &&
                    std::abs(*stats.f_measure - 0.8) < 1e-15;

  const bool pass = worst_roc <= 1e-12 && worst_pr <= 1e-12 && hand;
  report(4, pass, "metric oracle equivalence",
         "max |AUROC - pairwise oracle| = " + fmt(worst_roc) +
             ", max |AUPR - threshold oracle| = " + fmt(worst_pr) +
             ", hand precision/recall/F " + (hand ? "exact" : "WRONG"));
}

// ---------------------------------------------------------------------------
// 5. outlier gap lower bound
// ---------------------------------------------------------------------------
void criterion_5() {
  privacy::GapBoundInputs origin;
  origin.outlier_gap = 0.3;
  origin.uaerm_rate = 0.0;
  origin.epsilon = 0.0;
  origin.delta = 0.0;
  origin.outlier_count = 7;
  origin.clean_count = 1234;
  origin.gamma = 0.2;
  const bool origin_ok = privacy::outlier_gap_bound(origin) == 0.3;

  privacy::GapBoundInputs point;
  point.outlier_gap = 1.0;
  point.uaerm_rate = 0.1;
  point.clean_count = 100;
  point.epsilon = 0.01;
  point.delta = 1e-5;
  point.outlier_count = 1;
  point.gamma = 0.05;
  const double v = privacy::outlier_gap_bound(point);
  const bool point_ok = std::abs(v - 0.50662) <= 1e-4;

  Rng rng(5150);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    privacy::GapBoundInputs in;
    in.outlier_gap = rng.uniform01();
    in.uaerm_rate = 0.3 * rng.uniform01();
    in.clean_count = 1 + static_cast<long>(rng.uniform_below(3000));
    in.epsilon = 0.3 * rng.uniform01();
    in.delta = 1e-6 + 1e-4 * rng.uniform01();
    in.outlier_count = static_cast<long>(rng.uniform_below(15));
    in.gamma = 0.01 + 0.6 * rng.uniform01();
    const double base = privacy::outlier_gap_bound(in);
    auto t = in;
    t.uaerm_rate += rng.uniform01();
    if (privacy::outlier_gap_bound(t) > base + 1e-12) ++violations;
    t = in;
    t.epsilon += rng.uniform01();
    if (privacy::outlier_gap_bound(t) > base + 1e-12) ++violations;
    t = in;
    t.delta += 1e-3 * rng.uniform01();
    if (privacy::outlier_gap_bound(t) > base + 1e-12) ++violations;
    t = in;
    t.outlier_count += 1 + static_cast<long>(rng.uniform_below(5));
    if (privacy::outlier_gap_bound(t) > base + 1e-12) ++violations;
  }

  const bool pass = origin_ok && point_ok && violations == 0;
  report(5, pass, "loss-gap lower bound",
         "origin exact: " + std::string(origin_ok ? "yes" : "NO") +
             ", reference point = " + fmt(v) + " (target 0.50662 +/- 1e-4), " +
             std::to_string(violations) + " monotonicity violations over 1000 tuples");
}

// ---------------------------------------------------------------------------
// desk-scale experiment criteria
// ---------------------------------------------------------------------------

struct CellMean {
  double sum = 0.0;
  int n = 0;
  double mean() const { return n ? sum / n : std::nan(""); }
};

void criterion_6() {
  auto cfg = harness::ExperimentConfig::outlier_default();
  cfg.dataset.train_size = 6000;
  cfg.dataset.r_o_grid = {0.05};
  cfg.dp.epochs = 20;
  cfg.dp.batch_size = 200;
  cfg.dp.sigmas = {std::nullopt, 0.0, 1.0, 5.0};
  cfg.seeds = {1, 2, 3};

  const auto result = harness::run_outlier_experiment(cfg);
  std::map<std::string, CellMean> od, nd;
  for (const auto& row : result.rows) {
    if (row.status != "ok") continue;
    const std::string key = row.sigma ? fmt(*row.sigma) : "NA";
    if (row.od_aupr) {
      od[key].sum += *row.od_aupr;
      od[key].n += 1;
    }
    if (row.nd_aupr) {
      nd[key].sum += *row.nd_aupr;
      nd[key].n += 1;
    }
  }
  const double od_base = od["NA"].mean(), nd_base = nd["NA"].mean();
  const double od_best = std::max(od["1"].mean(), od["5"].mean());
  const double nd_best = std::max(nd["1"].mean(), nd["5"].mean());
  const bool pass = od_best >= od_base + 0.05 && nd_best >= nd_base + 0.05;
  report(6, pass, "outlier/novelty detection trend",
         "OD AUPR baseline " + fmt(od_base) + " vs best DP " + fmt(od_best) +
             "; ND baseline " + fmt(nd_base) + " vs best DP " + fmt(nd_best) +
             " (need +0.05 on both)");
}

void criterion_7() {
  auto cfg = harness::ExperimentConfig::backdoor_default();
  cfg.dataset.train_size = 6000;
  cfg.dataset.test_normal = 1000;
  cfg.dataset.r_p_grid = {0.01};
  cfg.dp.clip_bound = 1.0;
  cfg.dp.sigmas = {std::nullopt, 0.5};
  cfg.seeds = {1, 2, 3};

  const auto result = harness::run_backdoor_experiment(cfg);
  CellMean base_succ, dp_succ, base_acc, dp_acc, dp_auroc;
  for (const auto& row : result.rows) {
    if (row.status != "ok") continue;
    const bool dp = row.sigma.has_value() && *row.sigma == 0.5;
    const bool baseline = !row.sigma.has_value();
    if (baseline && row.success_rate) {
      base_succ.sum += *row.success_rate;
      base_succ.n += 1;
    }
    if (baseline && row.benign_accuracy) {
      base_acc.sum += *row.benign_accuracy;
      base_acc.n += 1;
    }
    if (dp && row.success_rate) {
      dp_succ.sum += *row.success_rate;
      dp_succ.n += 1;
    }
    if (dp && row.benign_accuracy) {
      dp_acc.sum += *row.benign_accuracy;
      dp_acc.n += 1;
    }
    if (dp && row.auroc) {
      dp_auroc.sum += *row.auroc;
      dp_auroc.n += 1;
    }
  }
  const bool pass = base_succ.mean() >= 80.0 && dp_succ.mean() <= 10.0 &&
                    base_acc.mean() - dp_acc.mean() <= 5.0 && dp_auroc.mean() >= 0.90;
  report(7, pass, "backdoor attack defense",
         "success " + fmt(base_succ.mean()) + "% -> " + fmt(dp_succ.mean()) +
             "% (need >=80 -> <=10); benign " + fmt(base_acc.mean()) + "% -> " +
             fmt(dp_acc.mean()) + "% (drop <=5); detection AUROC " + fmt(dp_auroc.mean()) +
             " (need >=0.90)");
}

void criterion_8() {
  auto cfg = harness::ExperimentConfig::sequence_default();
  cfg.dp.sigmas = {std::nullopt, 1.0};
  cfg.seeds = {1, 2, 3};

  const auto result = harness::run_sequence_experiment(cfg);
  // fixed mid-grid k
  const auto& ks = cfg.detection.k_grid;
  const int mid_k = ks[ks.size() / 2];

  CellMean base_fn, dp_fn, base_f, dp_f;
  for (const auto& row : result.rows) {
    if (row.status != "ok" || row.mode != "topk" || row.threshold != mid_k) continue;
    const bool dp = row.sigma.has_value() && *row.sigma == 1.0;
    if (!row.fn) continue;
    if (dp) {
      dp_fn.sum += static_cast<double>(*row.fn);
      dp_fn.n += 1;
      if (row.f_measure) {
        dp_f.sum += *row.f_measure;
        dp_f.n += 1;
      }
    } else if (!row.sigma) {
      base_fn.sum += static_cast<double>(*row.fn);
      base_fn.n += 1;
      if (row.f_measure) {
        base_f.sum += *row.f_measure;
        base_f.n += 1;
      }
    }
  }
  const bool pass = dp_fn.mean() <= 0.5 * base_fn.mean() &&
                    dp_f.mean() >= base_f.mean() - 0.02;
  report(8, pass, "sequence false-negative reduction",
         "k=" + std::to_string(mid_k) + ": session FN " + fmt(base_fn.mean()) + " -> " +
             fmt(dp_fn.mean()) + " (need <=50%); F " + fmt(base_f.mean()) + " -> " +
             fmt(dp_f.mean()) + " (drop <=0.02)");
}

void criterion_9() {
  auto cfg = harness::ExperimentConfig::uaerm_default();
  cfg.uaerm.subset_sizes = {1000, 3000, 6000};
  cfg.uaerm.sigmas = {0.5, 1.0, 5.0};
  cfg.uaerm.subsets_per_cell = 3;
  cfg.uaerm.repeats_per_subset = 3;

  const auto result = harness::run_uaerm_experiment(cfg);
  // cell[sigma][n] = gap
  std::map<double, std::map<double, double>> rows_by_sigma, rows_by_n;
  std::vector<double> gaps;
  for (const auto& row : result.rows) {
    if (row.status != "ok" || !row.gap) continue;
    rows_by_sigma[*row.sigma][static_cast<double>(*row.subset_size)] = *row.gap;
    rows_by_n[static_cast<double>(*row.subset_size)][*row.sigma] = *row.gap;
    gaps.push_back(*row.gap);
  }
  // per-axis correlation: hold the other axis fixed, rank-correlate each
  // row against the axis, then average the row correlations
  auto axis_rho = [](const std::map<double, std::map<double, double>>& rows) {
    double sum = 0.0;
    int count = 0;
    for (const auto& [fixed, row] : rows) {
      std::vector<double> axis, gap;
      for (const auto& [value, g] : row) {
        axis.push_back(value);
        gap.push_back(g);
      }
      sum += oracles::spearman(axis, gap);
      ++count;
    }
    return count ? sum / count : 0.0;
  };
  bool pass = false;
  double rho_n = 0.0, rho_sigma = 0.0;
  if (gaps.size() == 9 && rows_by_sigma.size() == 3 && rows_by_n.size() == 3) {
    rho_n = axis_rho(rows_by_sigma);
    rho_sigma = axis_rho(rows_by_n);
    pass = rho_n <= -0.7 && rho_sigma >= 0.7;
  }
  std::ostringstream detail;
  detail << "gap grid (" << gaps.size() << " cells): spearman(n) = " << fmt(rho_n)
         << " (need <= -0.7), spearman(sigma) = " << fmt(rho_sigma) << " (need >= 0.7) [";
  for (double g : gaps) detail << ' ' << fmt(g);
  detail << " ]";
  report(9, pass, "uaerm gap direction", detail.str());
}

void criterion_10() {
  auto cfg = harness::ExperimentConfig::outlier_default();
  cfg.arch = nn::ModelArch::dense_autoencoder({784, 32, 8, 32, 784});
  cfg.dataset.train_size = 600;
  cfg.dataset.test_normal = 100;
  cfg.dataset.test_outlier = 50;
  cfg.dataset.r_o_grid = {0.1};
  cfg.dp.epochs = 2;
  cfg.dp.batch_size = 100;
  cfg.dp.sigmas = {std::nullopt, 1.0};
  cfg.seeds = {1, 2};

  const auto dir_a = fs::temp_directory_path() / "dpad_accept_rerun_a";
  const auto dir_b = fs::temp_directory_path() / "dpad_accept_rerun_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  cfg.output_dir = dir_a.string();
  harness::run_experiment(cfg, true);
  // second run from the persisted manifest, as a consumer would
  std::ifstream mf(dir_a / "manifest.json");
  nlohmann::json manifest;
  mf >> manifest;
  auto cfg2 = harness::ExperimentConfig::from_json(manifest.at("config"));
  cfg2.output_dir = dir_b.string();
  harness::run_experiment(cfg2, true);

  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return std::string{std::istreambuf_iterator<char>(is), {}};
  };
  const bool results_ok =
      !slurp(dir_a / "results.csv").empty() &&
      slurp(dir_a / "results.csv") == slurp(dir_b / "results.csv");
  const bool summary_ok = slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv");
  const bool table_ok = slurp(dir_a / "table.csv") == slurp(dir_b / "table.csv");
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);

  const bool pass = results_ok && summary_ok && table_ok;
  report(10, pass, "manifest reruns are byte-identical",
         std::string("results.csv ") + (results_ok ? "identical" : "DIFFER") +
             ", summary.csv " + (summary_ok ? "identical" : "DIFFER") + ", table.csv " +
             (table_ok ? "identical" : "DIFFER"));
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) only = std::atoi(argv[i + 1]);
  }
  const auto want = [&](int k) { return only == 0 || only == k; };

  try {
    if (want(1)) criterion_1();
    if (want(2)) criterion_2();
    if (want(3)) criterion_3();
    if (want(4)) criterion_4();
    if (want(5)) criterion_5();
    if (want(6)) criterion_6();
    if (want(7)) criterion_7();
    if (want(8)) criterion_8();
    if (want(9)) criterion_9();
    if (want(10)) criterion_10();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] unhandled error: " << e.what() << std::endl;
    return 1;
  }
  if (failures) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
