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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpad/data/image_dataset.hpp"
#include "dpad/nn/network.hpp"

namespace dpad::metrics {

enum class Direction {
  kHigherIsAnomalous,  // losses
  kLowerIsAnomalous,   // predicted probabilities
};

struct ScoreRecord {
  std::int64_t id = 0;
  double score = 0.0;
  bool positive = false;  // ground truth: anomaly / poison
};

// One scored record set with a single scoring direction.
struct ScoreSet {
  Direction direction = Direction::kHigherIsAnomalous;
  std::vector<ScoreRecord> records;
};

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
  long total() const { return tp + fp + tn + fn; }
};

// Ratios with zero denominators surface as empty optionals, never as 0.
struct ConfusionStats {
  std::optional<double> precision, recall, f_measure, tpr, tnr, fpr;
};

// PR or ROC curve: points with non-decreasing x, plus the area.
struct Curve {
  std::vector<std::pair<double, double>> points;
  double area = 0.0;
};

struct TopKVerdict {
  int k = 0;
  std::vector<int> candidates;  // the k most probable tokens, descending
  int actual = 0;
  bool anomalous = false;
};

// Loss of the model on every dataset sample; truth comes from provenance
// flags, direction is higher-is-anomalous.
ScoreSet score_losses(const nn::Model& model, const data::ImageDataset& ds,
                      nn::LossKind kind);

// Positive verdict iff score >= tau (higher-is-anomalous) or score < tau
// (lower-is-anomalous).
ConfusionCounts threshold_detect(const ScoreSet& scores, double tau);

// Anomalous iff `actual` is not among the k most probable tokens. Equal
// probabilities rank by ascending token id.
TopKVerdict topk_detect(std::span<const double> dist, int actual, int k);

// A session is abnormal iff at least one entry is.
bool aggregate_session(std::span<const std::uint8_t> entry_anomalous);

ConfusionStats confusion_stats(const ConfusionCounts& counts);

// ROC via trapezoidal area over distinct thresholds (tie groups move
// together); PR via average precision (step-wise sum over positives).
// Both require at least one positive and one negative record.
Curve roc_curve(const ScoreSet& scores);
Curve pr_curve(const ScoreSet& scores);
double auroc(const ScoreSet& scores);
double aupr(const ScoreSet& scores);

// Two-column CSV (x,y) for external plotting.
void write_curve_csv(const Curve& curve, const std::string& path);

// Score records as "id,score,truth" CSV.
void write_scores_csv(const ScoreSet& scores, const std::string& path);
ScoreSet read_scores_csv(const std::string& path, Direction direction);

}  // namespace dpad::metrics
