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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpad/data/forge.hpp"
#include "dpad/data/sessions.hpp"
#include "dpad/dp/trainer.hpp"
#include "dpad/error.hpp"
#include "dpad/harness/experiments.hpp"
#include "dpad/harness/report.hpp"
#include "dpad/metrics/metrics.hpp"
#include "dpad/nn/checkpoint.hpp"
#include "dpad/privacy/privacy.hpp"
#include "dpad/version.hpp"

namespace {

using nlohmann::json;

struct AccountantArgs {
  double q = 0.0, sigma = 0.0, delta = 1e-5;
  long steps = 0;
  bool as_json = false;
};

struct BoundArgs {
  dpad::privacy::GapBoundInputs in;
  bool as_json = false;
};

int run_accountant(const AccountantArgs& a) {
  dpad::privacy::AccountantState state;
  state.q = a.q;
  state.sigma = a.sigma;
  state.delta = a.delta;
  state.steps = a.steps;
  const double eps = dpad::privacy::accountant_epsilon(state);
  if (a.as_json) {
    json j{{"q", a.q}, {"sigma", a.sigma}, {"steps", a.steps}, {"delta", a.delta}};
    j["epsilon"] = std::isfinite(eps) ? json(eps) : json("inf");
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "epsilon = " << dpad::harness::format_metric(eps) << "  (q="
              << a.q << ", sigma=" << a.sigma << ", steps=" << a.steps
              << ", delta=" << a.delta << ")\n";
  }
  return 0;
}

int run_bound(const BoundArgs& b) {
  const double value = dpad::privacy::outlier_gap_bound(b.in);
  if (b.as_json) {
    json j{{"T", b.in.outlier_gap},   {"xi", b.in.uaerm_rate},
           {"n", b.in.clean_count},   {"epsilon", b.in.epsilon},
           {"delta", b.in.delta},     {"c", b.in.outlier_count},
           {"gamma", b.in.gamma},     {"bound", value}};
    std::cout << j.dump() << '\n';
  } else {
    std::cout << "loss-gap lower bound = " << dpad::harness::format_metric(value) << '\n';
  }
  return 0;
}

dpad::data::ImageDataset load_images_arg(const std::string& images,
                                         const std::string& labels,
                                         const std::string& flags) {
  auto ds = dpad::data::load_idx(images, labels);
  if (!flags.empty()) dpad::data::read_flags(ds, flags);
  return ds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentially private training and anomaly detection workbench"};
  app.set_version_flag("--version", dpad::kVersion);
  app.require_subcommand(1);

  // ---- accountant ----
  AccountantArgs acct;
  auto* cmd_acct = app.add_subcommand("accountant", "compose the privacy budget epsilon");
  cmd_acct->add_option("--q", acct.q, "sampling rate B/N")->required();
  cmd_acct->add_option("--sigma", acct.sigma, "noise scale")->required();
  cmd_acct->add_option("--steps", acct.steps, "SGD step count")->required();
  cmd_acct->add_option("--delta", acct.delta, "delta");
  cmd_acct->add_flag("--json", acct.as_json, "machine-readable output");

  // ---- bound ----
  BoundArgs bound;
  auto* cmd_bound = app.add_subcommand("bound", "outlier loss-gap lower bound");
  cmd_bound->add_option("--T", bound.in.outlier_gap, "outlier loss gap T")->required();
  cmd_bound->add_option("--xi", bound.in.uaerm_rate, "uaerm rate xi");
  cmd_bound->add_option("--n", bound.in.clean_count, "clean sample count");
  cmd_bound->add_option("--epsilon", bound.in.epsilon, "privacy epsilon");
  cmd_bound->add_option("--delta", bound.in.delta, "privacy delta");
  cmd_bound->add_option("--c", bound.in.outlier_count, "outlier count");
  cmd_bound->add_option("--gamma", bound.in.gamma, "failure probability");
  cmd_bound->add_flag("--json", bound.as_json, "machine-readable output");

  // ---- dataset build ----
  auto* cmd_ds = app.add_subcommand("dataset", "dataset construction");
  auto* cmd_build = cmd_ds->add_subcommand("build", "build a dataset");
  std::string build_kind, out_images, out_labels, out_flags, out_sessions;
  std::string src_normal_images, src_normal_labels, src_outlier_images, src_outlier_labels;
  std::size_t n_count = 1000, total = 6000;
  double ratio = 0.05;
  std::uint64_t seed = 1;
  int n_normal = 2000, n_abnormal = 200;
  cmd_build->add_option("kind", build_kind,
                        "synth-digits | synth-glyphs | outlier-mix | nd-test | poison | sessions")
      ->required();
  cmd_build->add_option("--out-images", out_images);
  cmd_build->add_option("--out-labels", out_labels);
  cmd_build->add_option("--out-flags", out_flags);
  cmd_build->add_option("--out-sessions", out_sessions);
  cmd_build->add_option("--normal-images", src_normal_images);
  cmd_build->add_option("--normal-labels", src_normal_labels);
  cmd_build->add_option("--outlier-images", src_outlier_images);
  cmd_build->add_option("--outlier-labels", src_outlier_labels);
  cmd_build->add_option("--n", n_count, "sample count for synthetic sources");
  cmd_build->add_option("--total", total, "mix size");
  cmd_build->add_option("--ratio", ratio, "r_o or r_p");
  cmd_build->add_option("--seed", seed);
  cmd_build->add_option("--normal-sessions", n_normal);
  cmd_build->add_option("--abnormal-sessions", n_abnormal);

  // ---- train ----
  auto* cmd_train = app.add_subcommand("train", "train one model");
  std::string t_images, t_labels, t_flags, t_sessions, t_session_labels;
  std::string t_arch = "dense-autoencoder", t_out = "model.ckpt", t_report;
  std::vector<int> t_widths = {784, 128, 32, 128, 784};
  std::vector<int> t_channels;
  std::vector<int> t_units = {48};
  int t_history = 10, t_batch = 200, t_epochs = 20;
  double t_lr = 0.15, t_delta = 1e-5;
  std::optional<double> t_sigma, t_clip;
  std::uint64_t t_seed = 1;
  std::string t_sampling = "shuffled-minibatch";
  cmd_train->add_option("--images", t_images, "IDX image file");
  cmd_train->add_option("--labels", t_labels, "IDX label file");
  cmd_train->add_option("--flags", t_flags, "provenance sidecar");
  cmd_train->add_option("--sessions", t_sessions, "session text corpus");
  cmd_train->add_option("--session-labels", t_session_labels);
  cmd_train->add_option("--arch", t_arch,
                        "dense-autoencoder | conv-autoencoder | classifier | lstm-lm");
  cmd_train->add_option("--widths", t_widths)->delimiter(',');
  cmd_train->add_option("--channels", t_channels)->delimiter(',');
  cmd_train->add_option("--lstm-units", t_units)->delimiter(',');
  cmd_train->add_option("--history", t_history);
  cmd_train->add_option("--sigma", [&t_sigma](const std::vector<std::string>& v) {
    t_sigma = std::stod(v[0]);
    return true;
  }, "noise scale (omit for the plain baseline)");
  cmd_train->add_option("--clip", [&t_clip](const std::vector<std::string>& v) {
    t_clip = std::stod(v[0]);
    return true;
  }, "clipping bound C");
  cmd_train->add_option("--lr", t_lr);
  cmd_train->add_option("--batch", t_batch);
  cmd_train->add_option("--epochs", t_epochs);
  cmd_train->add_option("--seed", t_seed);
  cmd_train->add_option("--delta", t_delta);
  cmd_train->add_option("--sampling", t_sampling, "shuffled-minibatch | poisson");
  cmd_train->add_option("--out", t_out, "checkpoint path");
  cmd_train->add_option("--report", t_report, "epoch JSONL path");

  // ---- score ----
  auto* cmd_score = app.add_subcommand("score", "score a dataset by model loss");
  std::string s_model, s_images, s_labels, s_flags, s_out = "scores.csv";
  cmd_score->add_option("--model", s_model)->required();
  cmd_score->add_option("--images", s_images)->required();
  cmd_score->add_option("--labels", s_labels);
  cmd_score->add_option("--flags", s_flags);
  cmd_score->add_option("--out", s_out);

  // ---- detect ----
  auto* cmd_detect = app.add_subcommand("detect", "threshold detection over scores");
  std::string d_scores, d_direction = "higher";
  double d_tau = 0.0;
  cmd_detect->add_option("--scores", d_scores)->required();
  cmd_detect->add_option("--tau", d_tau)->required();
  cmd_detect->add_option("--direction", d_direction, "higher | lower");

  // ---- eval ----
  auto* cmd_eval = app.add_subcommand("eval", "threshold-free metrics over scores");
  std::string e_scores, e_direction = "higher", e_curve_out;
  cmd_eval->add_option("--scores", e_scores)->required();
  cmd_eval->add_option("--direction", e_direction, "higher | lower");
  cmd_eval->add_option("--pr-curve", e_curve_out, "write the PR curve as CSV");

  // ---- experiment ----
  auto* cmd_exp = app.add_subcommand("experiment", "config-driven experiment grids");
  auto* cmd_run = cmd_exp->add_subcommand("run", "run a manifest/config");
  std::string x_config, x_out_override, x_preset;
  cmd_run->add_option("--config", x_config, "config or manifest JSON");
  cmd_run->add_option("--preset", x_preset, "outlier | sequence | backdoor | uaerm");
  cmd_run->add_option("--out", x_out_override, "override output directory");

  // ---- report ----
  auto* cmd_report = app.add_subcommand("report", "re-render tables from results.csv");
  std::string r_dir, r_kind = "outlier";
  cmd_report->add_option("--run", r_dir, "experiment output directory")->required();
  cmd_report->add_option("--kind", r_kind);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_acct) return run_accountant(acct);
    if (*cmd_bound) return run_bound(bound);

    if (*cmd_build) {
      using namespace dpad::data;
      if (build_kind == "synth-digits" || build_kind == "synth-glyphs") {
        const auto ds = build_kind == "synth-digits" ? synth_digits(n_count, seed)
                                                     : synth_glyphs(n_count, seed);
        if (out_images.empty()) throw dpad::InputError("--out-images required");
        write_idx(ds, out_images, out_labels);
        if (!out_flags.empty()) write_flags(ds, out_flags);
      } else if (build_kind == "outlier-mix") {
        const auto normal = load_images_arg(src_normal_images, src_normal_labels, "");
        const auto outliers = load_images_arg(src_outlier_images, src_outlier_labels, "");
        const auto mix = build_outlier_mix(normal, outliers, ratio, total, seed);
        write_idx(mix, out_images, out_labels);
        if (!out_flags.empty()) write_flags(mix, out_flags);
      } else if (build_kind == "nd-test") {
        const auto normal = load_images_arg(src_normal_images, src_normal_labels, "");
        const auto outliers = load_images_arg(src_outlier_images, src_outlier_labels, "");
        const auto ds = build_nd_test(normal, outliers);
        write_idx(ds, out_images, out_labels);
        if (!out_flags.empty()) write_flags(ds, out_flags);
      } else if (build_kind == "poison") {
        const auto clean = load_images_arg(src_normal_images, src_normal_labels, "");
        const auto ds = poison(clean, ratio, PoisonSpec{}, seed);
        write_idx(ds, out_images, out_labels);
        if (!out_flags.empty()) write_flags(ds, out_flags);
      } else if (build_kind == "sessions") {
        const auto corpus = gen_sessions(SyntheticLogModel::workflow29(), n_normal,
                                         n_abnormal, seed);
        if (out_sessions.empty()) throw dpad::InputError("--out-sessions required");
        write_sequences(corpus, out_sessions, out_labels);
      } else {
        throw dpad::InputError("unknown dataset kind '" + build_kind + "'");
      }
      return 0;
    }

    if (*cmd_train) {
      dpad::nn::ModelArch arch;
      std::vector<dpad::nn::Sample> samples;
      const auto kind = dpad::nn::arch_kind_from_string(t_arch);
      if (kind == dpad::nn::ArchKind::kLstmLm) {
        const auto corpus = dpad::data::load_sequences(t_sessions, t_session_labels);
        arch = dpad::nn::ModelArch::lstm_lm(corpus.vocab + 1, t_history, t_units);
        for (const auto& p : dpad::data::window_sequences(corpus, t_history, true)) {
          dpad::nn::Sample s;
          s.history = p.history;
          s.next_token = p.next;
          samples.push_back(std::move(s));
        }
      } else {
        const auto ds = load_images_arg(t_images, t_labels, t_flags);
        if (kind == dpad::nn::ArchKind::kDenseAutoencoder)
          arch = dpad::nn::ModelArch::dense_autoencoder(t_widths);
        else if (kind == dpad::nn::ArchKind::kConvAutoencoder)
          arch = dpad::nn::ModelArch::conv_autoencoder(
              t_channels.empty() ? std::vector<int>{8, 4, 2} : t_channels);
        else
          arch = dpad::nn::ModelArch::classifier(
              t_channels.empty() ? std::vector<int>{8, 16} : t_channels);
        samples = dpad::data::to_samples(ds);
      }

      dpad::dp::DpConfig cfg;
      cfg.clip_bound = t_clip;
      cfg.noise_scale = t_sigma;
      cfg.learning_rate = t_lr;
      cfg.batch_size = t_batch;
      cfg.epochs = t_epochs;
      cfg.seed = t_seed;
      cfg.sampling = dpad::dp::sampling_from_string(t_sampling);

      dpad::privacy::AccountantState acct_state;
      acct_state.q = static_cast<double>(t_batch) / static_cast<double>(samples.size());
      if (acct_state.q > 1.0) acct_state.q = 1.0;
      acct_state.delta = t_delta;

      const auto report = dpad::dp::train(dpad::nn::build_model(arch, t_seed), samples,
                                          cfg, acct_state);
      dpad::nn::save_checkpoint(report.model, t_out);
      if (!t_report.empty()) dpad::harness::write_epoch_log(report, t_report);
      std::cout << "trained " << t_arch << " on " << samples.size() << " samples, "
                << report.steps << " steps, epsilon = "
                << dpad::harness::format_metric(report.epsilon)
                << (report.diverged ? " [diverged]" : "") << '\n';
      return report.diverged ? 2 : 0;
    }

    if (*cmd_score) {
      const auto model = dpad::nn::load_checkpoint(s_model);
      const auto ds = load_images_arg(s_images, s_labels, s_flags);
      const auto kind = dpad::nn::default_loss(model.arch().kind);
      const auto scores = dpad::metrics::score_losses(model, ds, kind);
      dpad::metrics::write_scores_csv(scores, s_out);
      std::cout << "wrote " << scores.records.size() << " score records to " << s_out
                << '\n';
      return 0;
    }

    if (*cmd_detect) {
      const auto dir = d_direction == "lower"
                           ? dpad::metrics::Direction::kLowerIsAnomalous
                           : dpad::metrics::Direction::kHigherIsAnomalous;
      const auto scores = dpad::metrics::read_scores_csv(d_scores, dir);
      const auto counts = dpad::metrics::threshold_detect(scores, d_tau);
      const auto stats = dpad::metrics::confusion_stats(counts);
      auto show = [](const char* name, const std::optional<double>& v) {
        std::cout << name << " = " << (v ? dpad::harness::format_metric(*v) : "undefined")
                  << '\n';
      };
      std::cout << "TP=" << counts.tp << " FP=" << counts.fp << " TN=" << counts.tn
                << " FN=" << counts.fn << '\n';
      show("precision", stats.precision);
      show("recall", stats.recall);
      show("f_measure", stats.f_measure);
      return 0;
    }

    if (*cmd_eval) {
      const auto dir = e_direction == "lower"
                           ? dpad::metrics::Direction::kLowerIsAnomalous
                           : dpad::metrics::Direction::kHigherIsAnomalous;
      const auto scores = dpad::metrics::read_scores_csv(e_scores, dir);
      std::cout << "AUPR  = " << dpad::harness::format_metric(dpad::metrics::aupr(scores))
                << '\n'
                << "AUROC = " << dpad::harness::format_metric(dpad::metrics::auroc(scores))
                << '\n';
      if (!e_curve_out.empty())
        dpad::metrics::write_curve_csv(dpad::metrics::pr_curve(scores), e_curve_out);
      return 0;
    }

    if (*cmd_run) {
      dpad::harness::ExperimentConfig cfg;
      if (!x_config.empty()) {
        auto j = nlohmann::json::parse(std::ifstream(x_config));
        // accept either a bare config or a manifest wrapping one
        cfg = dpad::harness::ExperimentConfig::from_json(
            j.contains("config") ? j.at("config") : j);
      } else if (!x_preset.empty()) {
        const auto kind = dpad::harness::experiment_kind_from_string(x_preset);
        switch (kind) {
          case dpad::harness::ExperimentKind::kOutlier:
            cfg = dpad::harness::ExperimentConfig::outlier_default();
            break;
          case dpad::harness::ExperimentKind::kSequence:
            cfg = dpad::harness::ExperimentConfig::sequence_default();
            break;
          case dpad::harness::ExperimentKind::kBackdoor:
            cfg = dpad::harness::ExperimentConfig::backdoor_default();
            break;
          case dpad::harness::ExperimentKind::kUaerm:
            cfg = dpad::harness::ExperimentConfig::uaerm_default();
            break;
        }
      } else {
        throw dpad::InputError("experiment run needs --config or --preset");
      }
      if (!x_out_override.empty()) cfg.output_dir = x_out_override;

      const auto result = dpad::harness::run_experiment(cfg, true);
      long bad = 0;
      for (const auto& row : result.rows)
        if (row.status != "ok") {
          if (bad == 0) std::cerr << "cells with errors:\n";
          std::cerr << "  " << row.cell << " seed=" << row.seed << ": " << row.status
                    << '\n';
          ++bad;
        }
      std::cout << "wrote " << result.rows.size() << " result rows to " << cfg.output_dir
                << '\n';
      return bad > 0 ? 2 : 0;
    }

    if (*cmd_report) {
      const auto kind = dpad::harness::experiment_kind_from_string(r_kind);
      const auto result = dpad::harness::read_results_csv(r_dir + "/results.csv", kind);
      dpad::harness::write_pivot_table(result, r_dir + "/table.csv");
      std::ifstream table(r_dir + "/table.csv");
      std::cout << table.rdbuf();
      return 0;
    }
  } catch (const dpad::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
