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

#include "dpad/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dpad/error.hpp"

namespace dpad::metrics {

namespace {

// Records sorted most-anomalous first, independent of direction.
std::vector<const ScoreRecord*> rank_records(const ScoreSet& scores) {
  for (const auto& r : scores.records)
    if (!std::isfinite(r.score)) throw InputError("non-finite score in record set");
  std::vector<const ScoreRecord*> order;
  order.reserve(scores.records.size());
  for (const auto& r : scores.records) order.push_back(&r);
  const bool higher = scores.direction == Direction::kHigherIsAnomalous;
  std::stable_sort(order.begin(), order.end(),
                   [higher](const ScoreRecord* a, const ScoreRecord* b) {
                     return higher ? a->score > b->score : a->score < b->score;
                   });
  return order;
}

struct ClassTotals {
  long positives = 0, negatives = 0;
};

ClassTotals class_totals(const ScoreSet& scores) {
  ClassTotals t;
  for (const auto& r : scores.records) (r.positive ? t.positives : t.negatives)++;
  if (t.positives == 0 || t.negatives == 0)
    throw InputError("curve metrics need at least one positive and one negative");
  return t;
}

}  // namespace

ScoreSet score_losses(const nn::Model& model, const data::ImageDataset& ds,
                      nn::LossKind kind) {
  ScoreSet out;
  out.direction = Direction::kHigherIsAnomalous;
  out.records.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const nn::Sample s = ds.to_sample(i);
    ScoreRecord r;
    r.id = static_cast<std::int64_t>(i);
    r.score = nn::forward_loss(model, s, kind);
    r.positive = ds.flags[i] != data::Provenance::kNormal;
    out.records.push_back(r);
  }
  return out;
}

ConfusionCounts threshold_detect(const ScoreSet& scores, double tau) {
  if (!std::isfinite(tau)) {
    // +-infinity is allowed as a degenerate threshold; NaN is not.
    if (std::isnan(tau)) throw InputError("threshold must not be NaN");
  }
  const bool higher = scores.direction == Direction::kHigherIsAnomalous;
  ConfusionCounts counts;
  for (const auto& r : scores.records) {
    if (!std::isfinite(r.score)) throw InputError("non-finite score in record set");
    const bool verdict = higher ? r.score >= tau : r.score < tau;
    if (verdict)
      (r.positive ? counts.tp : counts.fp)++;
    else
      (r.positive ? counts.fn : counts.tn)++;
  }
  return counts;
}

TopKVerdict topk_detect(std::span<const double> dist, int actual, int k) {
  const auto v = static_cast<int>(dist.size());
  if (actual < 0 || actual >= v)
    throw InputError("actual token " + std::to_string(actual) + " outside vocabulary");
  if (k < 1 || k > v) throw InputError("k must lie in [1, vocabulary size]");

  std::vector<int> ids(dist.size());
  std::iota(ids.begin(), ids.end(), 0);
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;  // probability ties rank by ascending token id
  });

  TopKVerdict verdict;
  verdict.k = k;
  verdict.actual = actual;
  verdict.candidates.assign(ids.begin(), ids.begin() + k);
  verdict.anomalous =
      std::find(verdict.candidates.begin(), verdict.candidates.end(), actual) ==
      verdict.candidates.end();
  return verdict;
}

bool aggregate_session(std::span<const std::uint8_t> entry_anomalous) {
  if (entry_anomalous.empty()) throw InputError("session has no entries");
  for (auto e : entry_anomalous)
    if (e) return true;
  return false;
}

ConfusionStats confusion_stats(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
    throw InputError("negative confusion count");
  ConfusionStats s;
  auto ratio = [](long num, long den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.tpr = s.recall;
  s.tnr = ratio(c.tn, c.tn + c.fp);
  s.fpr = ratio(c.fp, c.fp + c.tn);
  if (s.precision && s.recall && (*s.precision + *s.recall) > 0.0)
    s.f_measure = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
  return s;
}

Curve roc_curve(const ScoreSet& scores) {
  const auto totals = class_totals(scores);
  const auto order = rank_records(scores);

  Curve curve;
  curve.points.emplace_back(0.0, 0.0);
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // advance one tie group at a time
    const double s = order[i]->score;
    while (i < order.size() && order[i]->score == s) {
      (order[i]->positive ? tp : fp)++;
      ++i;
    }
    curve.points.emplace_back(static_cast<double>(fp) / totals.negatives,
                              static_cast<double>(tp) / totals.positives);
  }
  double area = 0.0;
  for (std::size_t p = 1; p < curve.points.size(); ++p) {
    const auto& [x0, y0] = curve.points[p - 1];
    const auto& [x1, y1] = curve.points[p];
    area += (x1 - x0) * (y0 + y1) / 2.0;
  }
  curve.area = area;
  return curve;
}

Curve pr_curve(const ScoreSet& scores) {
  const auto totals = class_totals(scores);
  const auto order = rank_records(scores);

  Curve curve;
  double area = 0.0;
  long tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double s = order[i]->score;
    const long tp_before = tp;
    while (i < order.size() && order[i]->score == s) {
      (order[i]->positive ? tp : fp)++;
      ++i;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(totals.positives);
    curve.points.emplace_back(recall, precision);
    area += static_cast<double>(tp - tp_before) / static_cast<double>(totals.positives) *
            precision;
  }
  curve.area = area;
  return curve;
}

double auroc(const ScoreSet& scores) { return roc_curve(scores).area; }
double aupr(const ScoreSet& scores) { return pr_curve(scores).area; }

void write_curve_csv(const Curve& curve, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os.precision(17);
  for (const auto& [x, y] : curve.points) os << x << ',' << y << '\n';
}

void write_scores_csv(const ScoreSet& scores, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << "id,score,truth\n";
  os.precision(17);
  for (const auto& r : scores.records)
    os << r.id << ',' << r.score << ',' << (r.positive ? 1 : 0) << '\n';
}

ScoreSet read_scores_csv(const std::string& path, Direction direction) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  ScoreSet out;
  out.direction = direction;
  std::string line;
  if (!std::getline(is, line) || line.rfind("id,score,truth", 0) != 0)
    throw FormatError("'" + path + "': missing scores header");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ScoreRecord r;
    char comma;
    int truth;
    if (!(ls >> r.id >> comma >> r.score >> comma >> truth))
      throw FormatError("'" + path + "': bad record on line " + std::to_string(lineno));
    r.positive = truth != 0;
    out.records.push_back(r);
  }
  return out;
}

}  // namespace dpad::metrics
