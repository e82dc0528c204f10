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

// Brute-force reference implementations shared by unit and acceptance tests.

#include <algorithm>
#include <cstddef>
#include <random>
#include <vector>

#include "vilco/datastream/types.hpp"
#include "vilco/evalkit/metrics.hpp"

namespace oracle {

inline double iou(const vilco::data::Window& a, const vilco::data::Window& b) {
  const double inter = std::max(0.0, std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s));
  const double uni = (a.end_s - a.start_s) + (b.end_s - b.start_s) - inter;
  return inter / uni;
}

inline double recall(const std::vector<std::vector<vilco::data::Window>>& preds,
                     const std::vector<std::vector<vilco::data::Window>>& gts, std::size_t k, double m) {
  int hits = 0;
  for (std::size_t q = 0; q < preds.size(); ++q) {
    bool hit = false;
    for (std::size_t r = 0; r < preds[q].size(); ++r) {
      if (r >= k) break;
      for (const auto& g : gts[q]) hit = hit || iou(preds[q][r], g) >= m;
    }
    hits += hit;
  }
  return 100.0 * hits / static_cast<double>(preds.size());
}

using Dense = std::vector<std::vector<double>>;  // full N x N, upper part unused

inline double avg(const Dense& p, std::size_t i) {
  double s = 0;
  for (std::size_t j = 1; j <= i; ++j) s += p[i - 1][j - 1];
  return s / static_cast<double>(i);
}

inline double bwf(const Dense& p, std::size_t i) {
  double s = 0;
  for (std::size_t j = 1; j < i; ++j) s += p[j - 1][j - 1] - p[i - 1][j - 1];
  return s / static_cast<double>(i - 1);
}

inline vilco::data::Window random_window(std::mt19937_64& rng, double horizon) {
  std::uniform_real_distribution<double> u(0, horizon);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  if (b - a < 1e-3) b = a + 1e-3;
  return {a, b};
}

/// Runs `trials` random instances of every metric against the references;
/// returns the maximum absolute error seen.
inline double metric_oracle_sweep(std::size_t trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t nq = 1 + rng() % 6;
    std::vector<std::vector<vilco::data::Window>> preds(nq), gts(nq);
    for (std::size_t q = 0; q < nq; ++q) {
      for (std::size_t i = 0, n = rng() % 7; i < n; ++i) preds[q].push_back(random_window(rng, 10));
      for (std::size_t i = 0, n = 1 + rng() % 3; i < n; ++i) gts[q].push_back(random_window(rng, 10));
    }
    for (std::size_t k : {1u, 3u, 5u})
      for (double m : {0.1, 0.3, 0.5, 0.7})
        worst = std::max(worst, std::abs(vilco::eval::recall_at_k(preds, gts, k, m) - recall(preds, gts, k, m)));

    const std::size_t n = 1 + rng() % 6;
    Dense p(n, std::vector<double>(n));
    vilco::eval::MetricsMatrix mm(n);
    std::uniform_real_distribution<double> u(0, 100);
    for (std::size_t i = 1; i <= n; ++i)
      for (std::size_t j = 1; j <= i; ++j) {
        p[i - 1][j - 1] = u(rng);
        mm.set(i, j, p[i - 1][j - 1]);
      }
    for (std::size_t i = 1; i <= n; ++i) {
      worst = std::max(worst, std::abs(vilco::eval::avg_performance(mm, i) - avg(p, i)));
      if (i >= 2) worst = std::max(worst, std::abs(vilco::eval::backward_forgetting(mm, i) - bwf(p, i)));
    }
  }
  return worst;
}

}  // namespace oracle
