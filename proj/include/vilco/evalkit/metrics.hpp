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

#pragma once

#include <optional>
#include <vector>

#include <json.hpp>

#include "vilco/datastream/types.hpp"

namespace vilco::eval {

/// |a ∩ b| / |a ∪ b|. Throws ConfigError if either interval has start >= end.
double interval_iou(const data::Window& a, const data::Window& b);

/// Percent of queries with at least one of their top-k predictions reaching
/// IoU >= m against any of their ground-truth windows. `predictions[q]` must be
/// ranked by descending score.
double recall_at_k(const std::vector<std::vector<data::Window>>& predictions,
                   const std::vector<std::vector<data::Window>>& ground_truth, std::size_t k,
                   double iou_threshold);

/// Lower-triangular N x N matrix of percentages. Indices are 1-based:
/// at(i, j) is the score on task j after training through task i (j <= i).
class MetricsMatrix {
 public:
  MetricsMatrix() = default;
  explicit MetricsMatrix(std::size_t n);

  std::size_t size() const { return n_; }
  void set(std::size_t i, std::size_t j, double value);
  double at(std::size_t i, std::size_t j) const;
  bool has(std::size_t i, std::size_t j) const;
  /// Rows whose cells 1..i are all present.
  std::size_t complete_rows() const;

  nlohmann::json to_json() const;
  static MetricsMatrix from_json(const nlohmann::json& j);

  friend bool operator==(const MetricsMatrix&, const MetricsMatrix&) = default;

 private:
  std::size_t index(std::size_t i, std::size_t j) const;
  std::size_t n_ = 0;
  std::vector<std::optional<double>> cells_;
};

/// P_i = (1/i) * sum_{j<=i} p(i, j)
double avg_performance(const MetricsMatrix& m, std::size_t i);

/// BwF_i = (1/(i-1)) * sum_{j<i} (p(j, j) - p(i, j)); undefined for i = 1.
double backward_forgetting(const MetricsMatrix& m, std::size_t i);

struct EvalConfig {
  std::vector<std::size_t> ks{1, 5};
  std::vector<double> ious{0.3, 0.5};
  void validate() const;
};

}  // namespace vilco::eval
