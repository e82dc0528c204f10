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

#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "vilco/error.hpp"
#include "vilco/evalkit/evaluate.hpp"
#include "vilco/evalkit/metrics.hpp"

using namespace vilco;
using data::Window;

TEST_CASE("interval_iou fixtures") {
  CHECK(eval::interval_iou({0, 2}, {0, 2}) == 1.0);
  CHECK(eval::interval_iou({0, 2}, {1, 3}) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(eval::interval_iou({0, 1}, {2, 3}) == 0.0);
  CHECK_THROWS_AS(eval::interval_iou({1, 1}, {0, 2}), ConfigError);
}

TEST_CASE("interval_iou is symmetric and bounded") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    auto a = oracle::random_window(rng, 5), b = oracle::random_window(rng, 5);
    const double x = eval::interval_iou(a, b);
    CHECK(x == eval::interval_iou(b, a));
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("recall_at_k fixtures") {
  CHECK(eval::recall_at_k({{{1, 2}}}, {{{1, 2}}}, 1, 0.5) == 100.0);
  const std::vector<std::vector<Window>> preds{{{50, 60}, {11, 19}}};
  const std::vector<std::vector<Window>> gts{{{10, 20}}};
  CHECK(eval::recall_at_k(preds, gts, 1, 0.5) == 0.0);
  CHECK(eval::recall_at_k(preds, gts, 5, 0.5) == 100.0);
  CHECK(eval::interval_iou({11, 19}, {10, 20}) == doctest::Approx(0.8));
  const std::vector<std::vector<Window>> p3{{{0, 1}}, {{0, 1}}, {{5, 6}}};
  const std::vector<std::vector<Window>> g3{{{0, 1}}, {{0, 1}}, {{0, 1}}};
  CHECK(eval::recall_at_k(p3, g3, 1, 0.5) == doctest::Approx(200.0 / 3));
  // A hit on any of several ground-truth windows counts.
  CHECK(eval::recall_at_k({{{7, 8}}}, {{{0, 1}, {7, 8}}}, 1, 0.5) == 100.0);
  CHECK_THROWS_AS(eval::recall_at_k({}, {}, 1, 0.5), ConfigError);
  CHECK_THROWS_AS(eval::recall_at_k({{}}, {{}, {}}, 1, 0.5), ConfigError);
}

TEST_CASE("recall_at_k monotone in k and m") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::vector<Window>> p(4), g(4);
    for (int q = 0; q < 4; ++q) {
      for (int i = 0; i < 6; ++i) p[q].push_back(oracle::random_window(rng, 10));
      g[q].push_back(oracle::random_window(rng, 10));
    }
    for (double m : {0.1, 0.3, 0.5}) {
      CHECK(eval::recall_at_k(p, g, 1, m) <= eval::recall_at_k(p, g, 3, m));
      CHECK(eval::recall_at_k(p, g, 3, m) <= eval::recall_at_k(p, g, 5, m));
    }
    for (std::size_t k : {1u, 5u}) {
      CHECK(eval::recall_at_k(p, g, k, 0.3) >= eval::recall_at_k(p, g, k, 0.5));
      CHECK(eval::recall_at_k(p, g, k, 0.5) >= eval::recall_at_k(p, g, k, 0.7));
    }
  }
}

TEST_CASE("avg_performance and backward_forgetting fixtures") {
  eval::MetricsMatrix m(3);
  m.set(1, 1, 50);
  CHECK(eval::avg_performance(m, 1) == 50.0);
  CHECK_THROWS(eval::backward_forgetting(m, 1));
  m.set(2, 1, 40);
  m.set(2, 2, 20);
  CHECK(eval::avg_performance(m, 2) == 30.0);

  eval::MetricsMatrix b(2);
  b.set(1, 1, 40);
  b.set(2, 1, 30);
  b.set(2, 2, 70);
  CHECK(eval::backward_forgetting(b, 2) == 10.0);

  eval::MetricsMatrix c(3);
  const double diag[] = {50, 40, 30};
  for (std::size_t i = 1; i <= 3; ++i) c.set(i, i, diag[i - 1]);
  c.set(2, 1, 45);
  c.set(3, 1, 35);
  c.set(3, 2, 38);
  CHECK(eval::backward_forgetting(c, 3) == 8.5);

  eval::MetricsMatrix k(4);
  for (std::size_t i = 1; i <= 4; ++i)
    for (std::size_t j = 1; j <= i; ++j) k.set(i, j, 12.5);
  for (std::size_t i = 1; i <= 4; ++i) CHECK(eval::avg_performance(k, i) == 12.5);
}

TEST_CASE("frozen model has zero forgetting") {
  eval::MetricsMatrix m(5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> col(5);
  for (auto& v : col) v = u(rng);
  for (std::size_t i = 1; i <= 5; ++i)
    for (std::size_t j = 1; j <= i; ++j) m.set(i, j, col[j - 1]);
  for (std::size_t i = 2; i <= 5; ++i) CHECK(eval::backward_forgetting(m, i) == 0.0);
}

TEST_CASE("metrics agree with brute-force references on 1000 random instances") {
  CHECK(oracle::metric_oracle_sweep(1000, 4) <= 1e-9);
}

TEST_CASE("MetricsMatrix: bounds, completeness and JSON round trip") {
  eval::MetricsMatrix m(3);
  CHECK_THROWS(m.set(1, 2, 5));
  CHECK_THROWS(m.set(4, 1, 5));
  CHECK_THROWS(m.set(1, 1, 101));
  CHECK_THROWS(m.at(2, 1));
  m.set(1, 1, 10);
  m.set(2, 2, 20);
  CHECK(m.complete_rows() == 1);
  m.set(2, 1, 5);
  CHECK(m.complete_rows() == 2);
  CHECK(eval::MetricsMatrix::from_json(m.to_json()) == m);
  CHECK(m.to_json()[2][0].is_null());
}

TEST_CASE("evaluate_task: oracle, null model and brute force, any thread count") {
  std::mt19937_64 rng(5);
  std::vector<data::TaskItem> items(23);
  std::map<std::string, std::vector<Window>> preds;
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].query.query_id = "q" + std::to_string(i);
    for (int w = 0; w < 2; ++w) items[i].query.windows.push_back(oracle::random_window(rng, 20));
    for (int r = 0; r < 6; ++r) preds[items[i].query.query_id].push_back(oracle::random_window(rng, 20));
  }
  eval::EvalConfig cfg;
  auto perfect = eval::evaluate_task([](const data::TaskItem& it) { return it.query.windows; }, items, cfg);
  for (const auto& [key, v] : perfect.recall) CHECK(v == 100.0);
  auto none = eval::evaluate_task([](const data::TaskItem&) { return std::vector<Window>{}; }, items, cfg);
  for (const auto& [key, v] : none.recall) CHECK(v == 0.0);

  std::vector<std::vector<Window>> p, g;
  for (const auto& it : items) {
    p.push_back(preds[it.query.query_id]);
    g.push_back(it.query.windows);
  }
  auto pred = [&](const data::TaskItem& it) { return preds.at(it.query.query_id); };
  for (std::size_t threads : {1u, 3u, 8u}) {
    auto s = eval::evaluate_task(pred, items, cfg, threads);
    for (std::size_t k : cfg.ks) {
      double mean = 0;
      for (double m : cfg.ious) {
        CHECK(s.at(k, m) == doctest::Approx(oracle::recall(p, g, k, m)).epsilon(1e-12));
        mean += s.at(k, m) / cfg.ious.size();
      }
      CHECK(s.mean_over_iou.at(k) == doctest::Approx(mean).epsilon(1e-12));
    }
  }
  CHECK(eval::metric_label(1, 0.3) == "R@1,IoU=0.3");
  CHECK(eval::metric_mean_label(5) == "R@5,mean");
}

TEST_CASE("evaluate_task propagates predictor errors") {
  std::vector<data::TaskItem> items(4);
  for (auto& it : items) it.query.windows = {{0, 1}};
  CHECK_THROWS_AS(eval::evaluate_task([](const data::TaskItem&) -> std::vector<Window> {
                    throw NumericalError("boom");
                  }, items, {}, 2),
                  NumericalError);
}
