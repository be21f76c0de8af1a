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

#include "dpad/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>

#include "dpad/data/forge.hpp"
#include "dpad/data/sessions.hpp"
#include "dpad/error.hpp"
#include "dpad/harness/report.hpp"
#include "dpad/metrics/metrics.hpp"

namespace dpad::harness {

namespace {

namespace fs = std::filesystem;

std::string sigma_tag(const std::optional<double>& sigma) {
  if (!sigma) return "NA";
  std::string s = format_metric(*sigma);
  return s;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == '=' || c == ',' || c == '/' || c == ' ') c = '_';
  return s;
}

void maybe_log(const dp::TrainReport& report, const std::string& log_dir,
               const std::string& tag) {
  if (log_dir.empty()) return;
  fs::create_directories(log_dir);
  write_epoch_log(report, log_dir + "/" + sanitize(tag) + ".jsonl");
}

// Stratified subsample by label, proportional to the label counts.
data::ImageDataset subsample_stratified(const data::ImageDataset& ds, std::size_t n,
                                        std::uint64_t seed) {
  if (n >= ds.size()) return ds;
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < ds.size(); ++i) by_label[ds.labels[i]].push_back(i);

  Rng rng(mix_seed(seed, 0x57247ULL));
  std::vector<std::size_t> chosen;
  for (auto& [label, idx] : by_label) {
    const auto want = static_cast<std::size_t>(std::floor(
        static_cast<double>(n) * static_cast<double>(idx.size()) / ds.size() + 0.5));
    const auto pick = rng.sample_without_replacement(idx.size(), want);
    for (std::size_t p : pick) chosen.push_back(idx[p]);
  }
  // rounding drift: trim or top up arbitrarily but deterministically
  rng.shuffle(chosen);
  while (chosen.size() > n) chosen.pop_back();
  for (std::size_t i = 0; chosen.size() < n && i < ds.size(); ++i) chosen.push_back(i);
  std::sort(chosen.begin(), chosen.end());

  data::ImageDataset out;
  out.rows = ds.rows;
  out.cols = ds.cols;
  out.meta = ds.meta;
  for (std::size_t i : chosen) out.append_from(ds, i, ds.flags[i]);
  return out;
}

// "synth-digits", "synth-glyphs" or "idx:<images>[:<labels>]".
data::ImageDataset resolve_images(const std::string& source, std::size_t n,
                                  std::uint64_t seed) {
  if (source == "synth-digits") return data::synth_digits(n, seed);
  if (source == "synth-glyphs") return data::synth_glyphs(n, seed);
  if (source.rfind("idx:", 0) == 0) {
    const std::string rest = source.substr(4);
    const auto colon = rest.find(':');
    data::ImageDataset ds =
        colon == std::string::npos
            ? data::load_idx(rest)
            : data::load_idx(rest.substr(0, colon), rest.substr(colon + 1));
    return subsample_stratified(ds, n, seed);
  }
  throw InputError("unknown image source '" + source + "'");
}

dp::DpConfig make_dp_config(const ExperimentConfig& cfg, std::optional<double> sigma,
                            double clip_bound, std::uint64_t seed, int epochs) {
  dp::DpConfig c;
  if (sigma) {
    c.clip_bound = clip_bound;
    c.noise_scale = sigma;
  }
  c.learning_rate = cfg.dp.learning_rate;
  c.batch_size = cfg.dp.batch_size;
  c.epochs = epochs;
  c.seed = seed;
  c.sampling = cfg.dp.sampling;
  return c;
}

privacy::AccountantState make_accountant(const ExperimentConfig& cfg, std::size_t n) {
  privacy::AccountantState acct;
  acct.q = static_cast<double>(cfg.dp.batch_size) / static_cast<double>(n);
  if (acct.q > 1.0) acct.q = 1.0;
  acct.delta = cfg.dp.delta;
  return acct;
}

std::optional<double> try_aupr(const metrics::ScoreSet& scores) {
  try {
    return metrics::aupr(scores);
  } catch (const InputError&) {
    return std::nullopt;  // single-class record set
  }
}

std::optional<double> try_auroc(const metrics::ScoreSet& scores) {
  try {
    return metrics::auroc(scores);
  } catch (const InputError&) {
    return std::nullopt;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// outlier / novelty detection with autoencoders
// ---------------------------------------------------------------------------

ExperimentResult run_outlier_experiment(const ExperimentConfig& cfg,
                                        const std::string& log_dir) {
  cfg.validate();
  const auto& ds = cfg.dataset;

  std::size_t max_outliers = 0;
  for (double r : ds.r_o_grid)
    max_outliers = std::max(max_outliers, data::ratio_count(ds.train_size, r));

  const auto normal_pool =
      resolve_images(ds.normal_source, ds.train_size, mix_seed(ds.data_seed, 1));
  const auto outlier_pool = resolve_images(
      ds.outlier_source, std::max<std::size_t>(max_outliers, 1), mix_seed(ds.data_seed, 2));
  const auto nd_test = data::build_nd_test(
      resolve_images(ds.normal_source, ds.test_normal, mix_seed(ds.data_seed, 3)),
      resolve_images(ds.outlier_source, ds.test_outlier, mix_seed(ds.data_seed, 4)));

  ExperimentResult result;
  result.kind = ExperimentKind::kOutlier;

  for (double r_o : ds.r_o_grid) {
    for (const auto& sigma : cfg.dp.sigmas) {
      for (std::uint64_t seed : cfg.seeds) {
        const auto mix = data::build_outlier_mix(normal_pool, outlier_pool, r_o,
                                                 ds.train_size, mix_seed(ds.data_seed, seed));
        auto samples = data::to_samples(mix);

        auto dp_cfg = make_dp_config(cfg, sigma, cfg.dp.clip_bound, seed, cfg.dp.epochs);
        auto report = dp::train(nn::build_model(cfg.arch, seed), samples, dp_cfg,
                                make_accountant(cfg, samples.size()));

        ResultRow row;
        row.cell = "ro=" + format_metric(r_o) + ",sigma=" + sigma_tag(sigma);
        row.sigma = sigma;
        row.clip_bound = sigma ? cfg.dp.clip_bound : 0.0;
        row.clipping = sigma.has_value();
        row.ratio = r_o;
        row.seed = seed;
        row.mode = "loss";
        row.epsilon = report.epsilon;
        row.final_loss = report.epochs.empty() ? std::optional<double>{}
                                               : report.epochs.back().mean_loss;
        if (report.diverged) {
          row.status = "diverged";
        } else {
          row.od_aupr = try_aupr(metrics::score_losses(
              report.model, mix, nn::LossKind::kReconstructionMse));
          row.nd_aupr = try_aupr(metrics::score_losses(
              report.model, nd_test, nn::LossKind::kReconstructionMse));
        }
        maybe_log(report, log_dir, row.cell + ",seed=" + std::to_string(seed));
        result.rows.push_back(std::move(row));
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// backdoor poisoning attack and defense
// ---------------------------------------------------------------------------

namespace {

struct BackdoorCell {
  std::optional<double> sigma;
  double clip_bound;
  double r_p;
};

ResultRow run_backdoor_cell(const ExperimentConfig& cfg, const BackdoorCell& cell,
                            std::uint64_t seed, const data::ImageDataset& clean_train,
                            const data::ImageDataset& clean_test,
                            const data::ImageDataset& poisoned_test,
                            const data::PoisonSpec& spec, const std::string& log_dir) {
  const auto poisoned_train =
      data::poison(clean_train, cell.r_p, spec, mix_seed(cfg.dataset.data_seed, seed));
  auto samples = data::to_samples(poisoned_train);

  auto dp_cfg = make_dp_config(cfg, cell.sigma, cell.clip_bound, seed, cfg.dp.epochs);
  auto report = dp::train(nn::build_model(cfg.arch, seed), samples, dp_cfg,
                          make_accountant(cfg, samples.size()));

  ResultRow row;
  row.cell = "rp=" + format_metric(cell.r_p) + ",sigma=" + sigma_tag(cell.sigma) +
             ",C=" + format_metric(cell.clip_bound);
  row.sigma = cell.sigma;
  row.clip_bound = cell.sigma ? cell.clip_bound : 0.0;
  row.clipping = cell.sigma.has_value();
  row.ratio = cell.r_p;
  row.seed = seed;
  row.mode = "loss";
  row.epsilon = report.epsilon;
  row.final_loss =
      report.epochs.empty() ? std::optional<double>{} : report.epochs.back().mean_loss;
  maybe_log(report, log_dir, row.cell + ",seed=" + std::to_string(seed));
  if (report.diverged) {
    row.status = "diverged";
    return row;
  }

  auto argmax = [](const std::vector<double>& p) {
    return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  };
  long benign_hits = 0;
  for (std::size_t i = 0; i < clean_test.size(); ++i) {
    const auto s = clean_test.to_sample(i);
    if (argmax(nn::predict_classes(report.model, s)) == s.label) ++benign_hits;
  }
  row.benign_accuracy = 100.0 * benign_hits / static_cast<double>(clean_test.size());

  long attack_hits = 0;
  for (std::size_t i = 0; i < poisoned_test.size(); ++i) {
    const auto s = poisoned_test.to_sample(i);
    if (argmax(nn::predict_classes(report.model, s)) == s.label) ++attack_hits;
  }
  row.success_rate = 100.0 * attack_hits / static_cast<double>(poisoned_test.size());

  const auto scores =
      metrics::score_losses(report.model, poisoned_train, nn::LossKind::kCrossEntropy);
  row.aupr = try_aupr(scores);
  row.auroc = try_auroc(scores);
  return row;
}

}  // namespace

ExperimentResult run_backdoor_experiment(const ExperimentConfig& cfg,
                                         const std::string& log_dir) {
  cfg.validate();
  const auto& ds = cfg.dataset;
  const data::PoisonSpec spec;

  const auto clean_train =
      resolve_images(ds.normal_source, ds.train_size, mix_seed(ds.data_seed, 1));
  const auto clean_test =
      resolve_images(ds.normal_source, ds.test_normal, mix_seed(ds.data_seed, 3));
  const auto poisoned_test = data::poison(clean_test, 1.0, spec, 0);

  std::vector<BackdoorCell> cells;
  for (double r_p : ds.r_p_grid)
    for (const auto& sigma : cfg.dp.sigmas)
      cells.push_back({sigma, cfg.dp.clip_bound, r_p});
  for (double r_p : ds.r_p_grid)
    for (double c : cfg.dp.clip_bound_grid)
      cells.push_back({cfg.dp.c_sweep_sigma, c, r_p});

  ExperimentResult result;
  result.kind = ExperimentKind::kBackdoor;
  for (const auto& cell : cells)
    for (std::uint64_t seed : cfg.seeds)
      result.rows.push_back(run_backdoor_cell(cfg, cell, seed, clean_train, clean_test,
                                              poisoned_test, spec, log_dir));
  return result;
}

// ---------------------------------------------------------------------------
// sequence anomaly detection
// ---------------------------------------------------------------------------

namespace {

struct SessionEval {
  // verdict per (session, k) and per (session, tp); plus min probability
  std::vector<std::vector<std::uint8_t>> topk_anomalous;  // [k_index][session]
  std::vector<std::vector<std::uint8_t>> prob_anomalous;  // [tp_index][session]
  std::vector<double> min_prob;                           // [session]
};

SessionEval evaluate_sessions(const nn::Model& model, const data::SequenceCorpus& corpus,
                              int history, const std::vector<int>& k_grid,
                              const std::vector<double>& tp_grid) {
  SessionEval ev;
  const std::size_t n = corpus.size();
  ev.topk_anomalous.assign(k_grid.size(), std::vector<std::uint8_t>(n, 0));
  ev.prob_anomalous.assign(tp_grid.size(), std::vector<std::uint8_t>(n, 0));
  ev.min_prob.assign(n, 1.0);

  const auto pairs = data::window_sequences(corpus, history, true);
  for (const auto& pair : pairs) {
    const auto dist = nn::predict_distribution(model, pair.history);
    const double p_actual = dist[static_cast<std::size_t>(pair.next)];
    ev.min_prob[pair.session] = std::min(ev.min_prob[pair.session], p_actual);
    for (std::size_t ki = 0; ki < k_grid.size(); ++ki) {
      const auto verdict = metrics::topk_detect(dist, pair.next, k_grid[ki]);
      if (verdict.anomalous) ev.topk_anomalous[ki][pair.session] = 1;
    }
    for (std::size_t ti = 0; ti < tp_grid.size(); ++ti)
      if (p_actual < tp_grid[ti]) ev.prob_anomalous[ti][pair.session] = 1;
  }
  return ev;
}

metrics::ConfusionCounts session_confusion(const std::vector<std::uint8_t>& anomalous,
                                           const std::vector<std::uint8_t>& labels) {
  metrics::ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool verdict = anomalous[i] != 0;
    const bool truth = labels[i] != 0;
    if (verdict)
      (truth ? c.tp : c.fp)++;
    else
      (truth ? c.fn : c.tn)++;
  }
  return c;
}

}  // namespace

ExperimentResult run_sequence_experiment(const ExperimentConfig& cfg,
                                         const std::string& log_dir) {
  cfg.validate();
  const auto& ds = cfg.dataset;

  data::SequenceCorpus train_corpus, test_corpus;
  if (ds.normal_source.rfind("text:", 0) == 0) {
    auto parse = [](const std::string& src) {
      const std::string rest = src.substr(5);
      const auto colon = rest.find(':');
      return colon == std::string::npos
                 ? data::load_sequences(rest)
                 : data::load_sequences(rest.substr(0, colon), rest.substr(colon + 1));
    };
    train_corpus = parse(ds.normal_source);
    if (ds.outlier_source.rfind("text:", 0) != 0)
      throw InputError("sequence test corpus must also be a text source");
    test_corpus = parse(ds.outlier_source);
  } else {
    const auto lm = data::SyntheticLogModel::workflow29();
    const auto contam = static_cast<int>(
        data::ratio_count(static_cast<std::size_t>(ds.train_sessions), ds.train_contamination));
    train_corpus =
        data::gen_sessions(lm, ds.train_sessions, contam, mix_seed(ds.data_seed, 11));
    test_corpus = data::gen_sessions(lm, ds.test_normal_sessions, ds.test_abnormal_sessions,
                                     mix_seed(ds.data_seed, 12));
  }

  const int vocab = std::max(train_corpus.vocab, test_corpus.vocab) + 1;  // + pad token
  nn::ModelArch arch = cfg.arch;
  arch.vocab = vocab;
  arch.validate();

  const auto pairs = data::window_sequences(train_corpus, arch.history, true);
  std::vector<nn::Sample> samples;
  samples.reserve(pairs.size());
  for (const auto& p : pairs) {
    nn::Sample s;
    s.history = p.history;
    s.next_token = p.next;
    samples.push_back(std::move(s));
  }

  ExperimentResult result;
  result.kind = ExperimentKind::kSequence;

  for (const auto& sigma : cfg.dp.sigmas) {
    for (std::uint64_t seed : cfg.seeds) {
      auto dp_cfg = make_dp_config(cfg, sigma, cfg.dp.clip_bound, seed, cfg.dp.epochs);
      auto report = dp::train(nn::build_model(arch, seed), samples, dp_cfg,
                              make_accountant(cfg, samples.size()));
      const std::string cell_base = "sigma=" + sigma_tag(sigma);
      maybe_log(report, log_dir, cell_base + ",seed=" + std::to_string(seed));

      if (report.diverged) {
        ResultRow row;
        row.cell = cell_base;
        row.sigma = sigma;
        row.seed = seed;
        row.status = "diverged";
        result.rows.push_back(std::move(row));
        continue;
      }

      const auto ev = evaluate_sessions(report.model, test_corpus, arch.history,
                                        cfg.detection.k_grid, cfg.detection.tp_grid);

      auto push_counts = [&](const std::string& mode, double threshold,
                             const metrics::ConfusionCounts& counts) {
        ResultRow row;
        row.cell = cell_base + "," + mode + "=" + format_metric(threshold);
        row.sigma = sigma;
        row.clip_bound = sigma ? cfg.dp.clip_bound : 0.0;
        row.clipping = sigma.has_value();
        row.seed = seed;
        row.mode = mode;
        row.threshold = threshold;
        row.tp = counts.tp;
        row.fp = counts.fp;
        row.tn = counts.tn;
        row.fn = counts.fn;
        const auto stats = metrics::confusion_stats(counts);
        row.precision = stats.precision;
        row.recall = stats.recall;
        row.f_measure = stats.f_measure;
        row.epsilon = report.epsilon;
        row.final_loss = report.epochs.empty() ? std::optional<double>{}
                                               : report.epochs.back().mean_loss;
        result.rows.push_back(std::move(row));
      };

      for (std::size_t ki = 0; ki < cfg.detection.k_grid.size(); ++ki)
        push_counts("topk", cfg.detection.k_grid[ki],
                    session_confusion(ev.topk_anomalous[ki], test_corpus.labels));
      for (std::size_t ti = 0; ti < cfg.detection.tp_grid.size(); ++ti)
        push_counts("prob", cfg.detection.tp_grid[ti],
                    session_confusion(ev.prob_anomalous[ti], test_corpus.labels));

      // session-level score: smallest predicted probability in the session
      metrics::ScoreSet session_scores;
      session_scores.direction = metrics::Direction::kLowerIsAnomalous;
      for (std::size_t i = 0; i < test_corpus.size(); ++i)
        session_scores.records.push_back(
            {static_cast<std::int64_t>(i), ev.min_prob[i], test_corpus.labels[i] != 0});
      ResultRow row;
      row.cell = cell_base + ",score";
      row.sigma = sigma;
      row.clip_bound = sigma ? cfg.dp.clip_bound : 0.0;
      row.clipping = sigma.has_value();
      row.seed = seed;
      row.mode = "score";
      row.auroc = try_auroc(session_scores);
      row.aupr = try_aupr(session_scores);
      row.epsilon = report.epsilon;
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// uaerm gap measurement
// ---------------------------------------------------------------------------

ExperimentResult run_uaerm_experiment(const ExperimentConfig& cfg,
                                      const std::string& log_dir) {
  cfg.validate();
  const auto& ds = cfg.dataset;
  const auto& u = cfg.uaerm;
  if (u.subset_sizes.empty() || u.sigmas.empty())
    throw InputError("uaerm grid must not be empty");

  const std::size_t full_n =
      *std::max_element(u.subset_sizes.begin(), u.subset_sizes.end());
  const auto clean_train = resolve_images(ds.normal_source, full_n, mix_seed(ds.data_seed, 1));
  const auto test = data::build_nd_test(
      resolve_images(ds.normal_source, ds.test_normal, mix_seed(ds.data_seed, 3)),
      resolve_images(ds.outlier_source, ds.test_outlier, mix_seed(ds.data_seed, 4)));
  const auto test_samples = data::to_samples(test);
  const auto train_samples = data::to_samples(clean_train);

  auto per_sample_losses = [&](const nn::Model& model) {
    std::vector<double> out(test_samples.size());
    for (std::size_t i = 0; i < test_samples.size(); ++i)
      out[i] = nn::forward_loss(model, test_samples[i], nn::LossKind::kReconstructionMse);
    return out;
  };

  // Oracle: trained on all clean data without noise.
  auto oracle_cfg = make_dp_config(cfg, std::nullopt, cfg.dp.clip_bound, cfg.seeds[0],
                                   u.epochs);
  auto oracle_report = dp::train(nn::build_model(cfg.arch, cfg.seeds[0]), train_samples,
                                 oracle_cfg, make_accountant(cfg, train_samples.size()));
  if (oracle_report.diverged) throw TrainingError("uaerm oracle training diverged", -1);
  const auto oracle_losses = per_sample_losses(oracle_report.model);
  maybe_log(oracle_report, log_dir, "oracle");

  // Every cell runs the same number of SGD steps (u.epochs at the largest
  // subset size); the subset size then varies only the amount of data, not
  // the amount of injected noise.
  const long target_steps = static_cast<long>(u.epochs) *
                            static_cast<long>((full_n + cfg.dp.batch_size - 1) /
                                              cfg.dp.batch_size);

  ExperimentResult result;
  result.kind = ExperimentKind::kUaerm;

  for (std::size_t n : u.subset_sizes) {
    for (double sigma : u.sigmas) {
      std::vector<double> sum_losses(test_samples.size(), 0.0);
      int models_ok = 0;
      double eps_last = 0.0;
      for (int j = 0; j < u.subsets_per_cell; ++j) {
        Rng subset_rng(mix_seed(ds.data_seed, 1000 + 17 * static_cast<std::uint64_t>(n) +
                                                  static_cast<std::uint64_t>(j)));
        const auto idx = subset_rng.sample_without_replacement(train_samples.size(), n);
        std::vector<nn::Sample> subset;
        subset.reserve(idx.size());
        for (std::size_t i : idx) subset.push_back(train_samples[i]);

        for (int r = 0; r < u.repeats_per_subset; ++r) {
          const std::uint64_t run_seed =
              mix_seed(cfg.seeds[0], 7919ULL * static_cast<std::uint64_t>(j) +
                                         static_cast<std::uint64_t>(r) + 31ULL * n);
          const int batch = std::min<int>(cfg.dp.batch_size, static_cast<int>(n));
          const long steps_per_epoch = static_cast<long>((n + batch - 1) / batch);
          const int epochs = static_cast<int>(
              (target_steps + steps_per_epoch - 1) / steps_per_epoch);
          auto dp_cfg = make_dp_config(cfg, sigma, cfg.dp.clip_bound, run_seed, epochs);
          dp_cfg.batch_size = batch;
          auto report = dp::train(nn::build_model(cfg.arch, run_seed), subset, dp_cfg,
                                  make_accountant(cfg, subset.size()));
          maybe_log(report, log_dir,
                    "n=" + std::to_string(n) + ",sigma=" + format_metric(sigma) +
                        ",subset=" + std::to_string(j) + ",rep=" + std::to_string(r));
          if (report.diverged) continue;
          const auto losses = per_sample_losses(report.model);
          for (std::size_t i = 0; i < losses.size(); ++i) sum_losses[i] += losses[i];
          ++models_ok;
          eps_last = report.epsilon;
        }
      }

      ResultRow row;
      row.cell = "n=" + std::to_string(n) + ",sigma=" + format_metric(sigma);
      row.sigma = sigma;
      row.clip_bound = cfg.dp.clip_bound;
      row.clipping = true;
      row.seed = cfg.seeds[0];
      row.mode = "gap";
      row.subset_size = n;
      row.epsilon = eps_last;
      if (models_ok == 0) {
        row.status = "diverged";
      } else {
        std::vector<double> avg(sum_losses.size());
        for (std::size_t i = 0; i < avg.size(); ++i)
          avg[i] = sum_losses[i] / static_cast<double>(models_ok);
        row.gap = privacy::uaerm_gap(avg, oracle_losses);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool persist) {
  cfg.validate();
  std::string log_dir;
  if (persist) {
    fs::create_directories(cfg.output_dir);
    log_dir = cfg.output_dir + "/epochs";
    write_manifest(cfg, cfg.output_dir + "/manifest.json");
  }

  ExperimentResult result;
  switch (cfg.kind) {
    case ExperimentKind::kOutlier: result = run_outlier_experiment(cfg, log_dir); break;
    case ExperimentKind::kSequence: result = run_sequence_experiment(cfg, log_dir); break;
    case ExperimentKind::kBackdoor: result = run_backdoor_experiment(cfg, log_dir); break;
    case ExperimentKind::kUaerm: result = run_uaerm_experiment(cfg, log_dir); break;
  }

  if (persist) {
    write_results_csv(result, cfg.output_dir + "/results.csv");
    write_summary_csv(result, cfg.output_dir + "/summary.csv");
    write_pivot_table(result, cfg.output_dir + "/table.csv");
  }
  return result;
}

}  // namespace dpad::harness
