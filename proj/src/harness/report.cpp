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

#include "dpad/harness/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dpad/error.hpp"
#include "dpad/version.hpp"

namespace dpad::harness {

namespace {

const char* kResultColumns =
    "cell,sigma,clip_bound,clipping,ratio,seed,mode,threshold,subset,od_aupr,nd_aupr,"
    "aupr,auroc,benign_accuracy,success_rate,tp,fp,tn,fn,precision,recall,f_measure,"
    "epsilon,gap,final_loss,status";

std::string format_long(const std::optional<long>& v) {
  return v ? std::to_string(*v) : std::string();
}

std::string csv_row(const ResultRow& r) {
  std::ostringstream os;
  os << r.cell << ',' << (r.sigma ? format_metric(*r.sigma) : "NA") << ','
     << format_metric(r.clip_bound) << ',' << (r.clipping ? 1 : 0) << ','
     << format_metric(r.ratio) << ',' << r.seed << ',' << r.mode << ','
     << format_metric(r.threshold) << ','
     << (r.subset_size ? std::to_string(*r.subset_size) : std::string()) << ','
     << format_optional(r.od_aupr) << ',' << format_optional(r.nd_aupr) << ','
     << format_optional(r.aupr) << ',' << format_optional(r.auroc) << ','
     << format_optional(r.benign_accuracy) << ',' << format_optional(r.success_rate) << ','
     << format_long(r.tp) << ',' << format_long(r.fp) << ',' << format_long(r.tn) << ','
     << format_long(r.fn) << ',' << format_optional(r.precision) << ','
     << format_optional(r.recall) << ',' << format_optional(r.f_measure) << ','
     << format_optional(r.epsilon) << ',' << format_optional(r.gap) << ','
     << format_optional(r.final_loss) << ',' << r.status;
  return os.str();
}

}  // namespace

std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_metric(*v) : std::string();
}

void write_results_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << kResultColumns << '\n';
  for (const auto& row : result.rows) os << csv_row(row) << '\n';
}

void write_summary_csv(const ExperimentResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << "cell,mode,threshold,metric,mean,min,max,n,n_diverged\n";

  struct Key {
    std::string cell, mode;
    double threshold;
    bool operator<(const Key& o) const {
      if (cell != o.cell) return cell < o.cell;
      if (mode != o.mode) return mode < o.mode;
      return threshold < o.threshold;
    }
  };
  std::map<Key, std::vector<const ResultRow*>> groups;
  for (const auto& row : result.rows)
    groups[{row.cell, row.mode, row.threshold}].push_back(&row);

  auto emit = [&](const Key& key, const char* metric, auto getter) {
    double sum = 0.0, lo = 0.0, hi = 0.0;
    int n = 0, diverged = 0;
    for (const ResultRow* r : groups[key]) {
      if (r->status != "ok") {
        ++diverged;
        continue;
      }
      const auto v = getter(*r);
      if (!v) continue;
      if (n == 0) {
        lo = hi = *v;
      } else {
        lo = std::min(lo, *v);
        hi = std::max(hi, *v);
      }
      sum += *v;
      ++n;
    }
    if (n == 0 && diverged == 0) return;
    os << key.cell << ',' << key.mode << ',' << format_metric(key.threshold) << ','
       << metric << ',' << (n ? format_metric(sum / n) : "") << ','
       << (n ? format_metric(lo) : "") << ',' << (n ? format_metric(hi) : "") << ',' << n
       << ',' << diverged << '\n';
  };

  for (const auto& [key, rows] : groups) {
    (void)rows;
    emit(key, "od_aupr", [](const ResultRow& r) { return r.od_aupr; });
    emit(key, "nd_aupr", [](const ResultRow& r) { return r.nd_aupr; });
    emit(key, "aupr", [](const ResultRow& r) { return r.aupr; });
    emit(key, "auroc", [](const ResultRow& r) { return r.auroc; });
    emit(key, "benign_accuracy", [](const ResultRow& r) { return r.benign_accuracy; });
    emit(key, "success_rate", [](const ResultRow& r) { return r.success_rate; });
    emit(key, "fp", [](const ResultRow& r) {
      return r.fp ? std::optional<double>(static_cast<double>(*r.fp)) : std::nullopt;
    });
    emit(key, "fn", [](const ResultRow& r) {
      return r.fn ? std::optional<double>(static_cast<double>(*r.fn)) : std::nullopt;
    });
    emit(key, "precision", [](const ResultRow& r) { return r.precision; });
    emit(key, "recall", [](const ResultRow& r) { return r.recall; });
    emit(key, "f_measure", [](const ResultRow& r) { return r.f_measure; });
    emit(key, "epsilon", [](const ResultRow& r) { return r.epsilon; });
    emit(key, "gap", [](const ResultRow& r) { return r.gap; });
  }
}

void write_manifest(const ExperimentConfig& cfg, const std::string& path) {
  nlohmann::json j;
  j["artifact"] = "dpad";
  j["version"] = kVersion;
  j["config"] = cfg.to_json();
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  os << j.dump(2) << '\n';
}

void write_epoch_log(const dp::TrainReport& report, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  for (const auto& e : report.epochs) {
    nlohmann::json j;
    j["epoch"] = e.epoch;
    j["mean_loss"] = e.mean_loss;
    j["epsilon"] = std::isfinite(e.epsilon) ? nlohmann::json(e.epsilon)
                                            : nlohmann::json("inf");
    j["seconds"] = e.seconds;
    os << j.dump() << '\n';
  }
}

void write_pivot_table(const ExperimentResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");

  // mean over seeds per (sigma/clip bound row, column key)
  struct Agg {
    double sum = 0.0;
    int n = 0;
  };
  auto pivot = [&](const char* title, auto col_of, auto val_of) {
    std::map<std::string, std::map<std::string, Agg>> table;
    std::vector<std::string> row_order, col_order;
    for (const auto& r : result.rows) {
      if (r.status != "ok") continue;
      const auto value = val_of(r);
      if (!value) continue;
      const std::string row_key =
          (r.sigma ? "sigma=" + format_metric(*r.sigma) : std::string("sigma=NA")) +
          (result.kind == ExperimentKind::kBackdoor
               ? ",C=" + format_metric(r.clip_bound)
               : std::string());
      const std::string col_key = col_of(r);
      if (table.find(row_key) == table.end()) row_order.push_back(row_key);
      if (table[row_key].find(col_key) == table[row_key].end() &&
          std::find(col_order.begin(), col_order.end(), col_key) == col_order.end())
        col_order.push_back(col_key);
      auto& agg = table[row_key][col_key];
      agg.sum += *value;
      agg.n += 1;
    }
    if (table.empty()) return;
    os << "# " << title << '\n';
    os << "row";
    for (const auto& c : col_order) os << ',' << c;
    os << '\n';
    for (const auto& rk : row_order) {
      os << rk;
      for (const auto& c : col_order) {
        os << ',';
        const auto it = table[rk].find(c);
        if (it != table[rk].end() && it->second.n > 0)
          os << format_metric(it->second.sum / it->second.n);
      }
      os << '\n';
    }
    os << '\n';
  };

  switch (result.kind) {
    case ExperimentKind::kOutlier:
      pivot("OD AUPR", [](const ResultRow& r) { return "ro=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.od_aupr; });
      pivot("ND AUPR", [](const ResultRow& r) { return "ro=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.nd_aupr; });
      break;
    case ExperimentKind::kBackdoor:
      pivot("detection AUPR", [](const ResultRow& r) { return "rp=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.aupr; });
      pivot("detection AUROC", [](const ResultRow& r) { return "rp=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.auroc; });
      pivot("benign accuracy", [](const ResultRow& r) { return "rp=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.benign_accuracy; });
      pivot("attack success rate", [](const ResultRow& r) { return "rp=" + format_metric(r.ratio); },
            [](const ResultRow& r) { return r.success_rate; });
      break;
    case ExperimentKind::kSequence:
      pivot("session false negatives",
            [](const ResultRow& r) { return r.mode + "=" + format_metric(r.threshold); },
            [](const ResultRow& r) {
              return r.fn ? std::optional<double>(static_cast<double>(*r.fn))
                          : std::nullopt;
            });
      pivot("session false positives",
            [](const ResultRow& r) { return r.mode + "=" + format_metric(r.threshold); },
            [](const ResultRow& r) {
              return r.fp ? std::optional<double>(static_cast<double>(*r.fp))
                          : std::nullopt;
            });
      pivot("session F-measure",
            [](const ResultRow& r) { return r.mode + "=" + format_metric(r.threshold); },
            [](const ResultRow& r) { return r.f_measure; });
      break;
    case ExperimentKind::kUaerm:
      pivot("uaerm gap",
            [](const ResultRow& r) {
              return "n=" + (r.subset_size ? std::to_string(*r.subset_size) : "?");
            },
            [](const ResultRow& r) { return r.gap; });
      break;
  }
}

ExperimentResult read_results_csv(const std::string& path, ExperimentKind kind) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  std::string header;
  if (!std::getline(is, header) || header != kResultColumns)
    throw FormatError("'" + path + "': unexpected results header");

  ExperimentResult result;
  result.kind = kind;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    // `cell` itself contains commas; re-split from the right instead
    const int fixed = 25;  // columns after cell
    if (static_cast<int>(fields.size()) < fixed + 1)
      throw FormatError("'" + path + "': short row");
    const std::size_t ncell = fields.size() - fixed;
    ResultRow row;
    row.cell = fields[0];
    for (std::size_t i = 1; i < ncell; ++i) row.cell += "," + fields[i];
    auto at = [&](int k) { return fields[ncell + static_cast<std::size_t>(k)]; };
    auto opt_d = [](const std::string& s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      if (s == "inf") return std::numeric_limits<double>::infinity();
      return std::stod(s);
    };
    auto opt_l = [](const std::string& s) -> std::optional<long> {
      if (s.empty()) return std::nullopt;
      return std::stol(s);
    };
    row.sigma = at(0) == "NA" ? std::nullopt : opt_d(at(0));
    row.clip_bound = std::stod(at(1));
    row.clipping = at(2) == "1";
    row.ratio = std::stod(at(3));
    row.seed = static_cast<std::uint64_t>(std::stoull(at(4)));
    row.mode = at(5);
    row.threshold = std::stod(at(6));
    if (!at(7).empty()) row.subset_size = static_cast<std::size_t>(std::stoull(at(7)));
    row.od_aupr = opt_d(at(8));
    row.nd_aupr = opt_d(at(9));
    row.aupr = opt_d(at(10));
    row.auroc = opt_d(at(11));
    row.benign_accuracy = opt_d(at(12));
    row.success_rate = opt_d(at(13));
    row.tp = opt_l(at(14));
    row.fp = opt_l(at(15));
    row.tn = opt_l(at(16));
    row.fn = opt_l(at(17));
    row.precision = opt_d(at(18));
    row.recall = opt_d(at(19));
    row.f_measure = opt_d(at(20));
    row.epsilon = opt_d(at(21));
    row.gap = opt_d(at(22));
    row.final_loss = opt_d(at(23));
    row.status = at(24);
    result.rows.push_back(std::move(row));
  }
  return result;
}

}  // namespace dpad::harness
