// Copyright 2026 The vilco Authors.
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

#include "vilco/evalkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vilco/error.hpp"

namespace vilco::eval {

double interval_iou(const data::Window& a, const data::Window& b) {
  if (!(a.start_s < a.end_s) || !(b.start_s < b.end_s)) {
    throw ConfigError("interval_iou: degenerate interval");
  }
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double uni = (a.end_s - a.start_s) + (b.end_s - b.start_s) - inter;
  return inter / uni;
}

double recall_at_k(const std::vector<std::vector<data::Window>>& predictions,
                   const std::vector<std::vector<data::Window>>& ground_truth, std::size_t k,
                   double iou_threshold) {
  if (ground_truth.empty()) throw ConfigError("recall_at_k: zero queries");
  if (predictions.size() != ground_truth.size()) {
    throw ConfigError("recall_at_k: prediction and ground-truth counts differ");
  }
  if (k == 0) throw ConfigError("recall_at_k: k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < ground_truth.size(); ++q) {
    const auto& preds = predictions[q];
    const std::size_t limit = std::min(k, preds.size());
    bool hit = false;
    for (std::size_t r = 0; r < limit && !hit; ++r) {
      for (const auto& gt : ground_truth[q]) {
        if (interval_iou(preds[r], gt) >= iou_threshold) {
          hit = true;
          break;
        }
      }
    }
    hits += hit ? 1 : 0;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ground_truth.size());
}

MetricsMatrix::MetricsMatrix(std::size_t n) : n_(n), cells_(n * (n + 1) / 2) {}

std::size_t MetricsMatrix::index(std::size_t i, std::size_t j) const {
  if (i < 1 || i > n_ || j < 1 || j > i) {
    throw ConfigError("metrics cell (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") outside the lower triangle of a " + std::to_string(n_) + "-task matrix");
  }
  return (i - 1) * i / 2 + (j - 1);
}

void MetricsMatrix::set(std::size_t i, std::size_t j, double value) {
  if (!(value >= 0.0 && value <= 100.0)) throw ConfigError("metric values are percentages in [0, 100]");
  cells_[index(i, j)] = value;
}

double MetricsMatrix::at(std::size_t i, std::size_t j) const {
  const auto& c = cells_[index(i, j)];
  if (!c) {
    throw ConfigError("metrics cell (" + std::to_string(i) + ", " + std::to_string(j) + ") unpopulated");
  }
  return *c;
}

bool MetricsMatrix::has(std::size_t i, std::size_t j) const { return cells_[index(i, j)].has_value(); }

std::size_t MetricsMatrix::complete_rows() const {
  std::size_t rows = 0;
  for (std::size_t i = 1; i <= n_; ++i) {
    for (std::size_t j = 1; j <= i; ++j)
      if (!has(i, j)) return rows;
    rows = i;
  }
  return rows;
}

nlohmann::json MetricsMatrix::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 1; i <= n_; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 1; j <= i; ++j) {
      if (has(i, j)) {
        row.push_back(at(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

MetricsMatrix MetricsMatrix::from_json(const nlohmann::json& j) {
  MetricsMatrix m(j.size());
  for (std::size_t i = 1; i <= j.size(); ++i) {
    const auto& row = j.at(i - 1);
    if (row.size() != i) throw ConfigError("metrics matrix JSON is not lower-triangular");
    for (std::size_t c = 1; c <= i; ++c)
      if (!row.at(c - 1).is_null()) m.set(i, c, row.at(c - 1).get<double>());
  }
  return m;
}

double avg_performance(const MetricsMatrix& m, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 1; j <= i; ++j) s += m.at(i, j);
  return s / static_cast<double>(i);
}

double backward_forgetting(const MetricsMatrix& m, std::size_t i) {
  if (i < 2) throw ConfigError("backward forgetting is undefined for the first task");
  double s = 0.0;
  for (std::size_t j = 1; j < i; ++j) s += m.at(j, j) - m.at(i, j);
  return s / static_cast<double>(i - 1);
}

void EvalConfig::validate() const {
  if (ks.empty() || ious.empty()) throw ConfigError("eval config needs k values and IoU thresholds");
  for (auto k : ks)
    if (k < 1) throw ConfigError("k must be >= 1");
  for (double m : ious)
    if (!(m > 0.0 && m <= 1.0)) throw ConfigError("IoU thresholds must lie in (0, 1]");
}

}  // namespace vilco::eval
