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

#include <cmath>
#include <random>

#include "vilco/error.hpp"
#include "vilco/numkit/grad_check.hpp"
#include "vilco/numkit/layers.hpp"
#include "vilco/numkit/ops.hpp"
#include "vilco/numkit/optim.hpp"

using namespace vilco;
using namespace vilco::num;

TEST_CASE("softmax fixtures") {
  Tensor u = softmax(Tensor::vector({0, 0, 0}), 0);
  for (double v : u.data()) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));

  for (double x : {-50.0, 0.0, 3.5, 700.0}) {
    const double c = 1.25;
    Tensor s = softmax(Tensor::vector({x, x + c}), 0);
    CHECK(std::abs(s[0] - 1.0 / (1.0 + std::exp(c))) < 1e-12);
    CHECK(std::abs(s[1] - std::exp(c) / (1.0 + std::exp(c))) < 1e-12);
  }

  Tensor s = softmax(Tensor::vector({1, 2, 3}), 0);
  const double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  CHECK(std::abs(s[0] - std::exp(1.0) / z) < 1e-12);
  CHECK(std::abs(s[1] - std::exp(2.0) / z) < 1e-12);
  CHECK(std::abs(s[2] - std::exp(3.0) / z) < 1e-12);

  Tensor bad = Tensor::vector({1, NAN});
  CHECK_THROWS_AS(softmax(bad, 0), NumericalError);
  CHECK_THROWS_AS(softmax(Tensor::vector({1, 2}), 1), ShapeError);
}

TEST_CASE("softmax slices are simplex points along any axis") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Tensor x = randn(Shape{3, 4, 5}, rng, 20.0);
    for (std::size_t axis = 0; axis < 3; ++axis) {
      Tensor y = softmax(x, axis);
      const auto& s = y.shape();
      std::size_t inner = 1;
      for (std::size_t i = axis + 1; i < 3; ++i) inner *= s[i];
      const std::size_t outer = y.size() / (s[axis] * inner);
      for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t in = 0; in < inner; ++in) {
          double total = 0.0;
          for (std::size_t k = 0; k < s[axis]; ++k) {
            const double v = y[(o * s[axis] + k) * inner + in];
            CHECK(v >= 0.0);
            total += v;
          }
          CHECK(std::abs(total - 1.0) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("layer_norm fixtures") {
  Tensor one(Shape{3}, 1.0), zero(Shape{3});
  Tensor y = layer_norm(Tensor::vector({4, 4, 4}), one, zero, 1e-5);
  for (double v : y.data()) CHECK(v == 0.0);

  Tensor y2 = layer_norm(Tensor::vector({1, 3}), Tensor(Shape{2}, 1.0), Tensor(Shape{2}), 1e-12);
  CHECK(y2[0] == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(y2[1] == doctest::Approx(1.0).epsilon(1e-9));

  Tensor bias = Tensor::vector({0.5, -2.0, 3.0});
  Tensor y3 = layer_norm(Tensor::vector({1, 7, -2}), Tensor(Shape{3}), bias, 1e-5);
  CHECK(y3 == bias);

  CHECK_THROWS_AS(layer_norm(Tensor(Shape{2, 0}), Tensor(Shape{0}), Tensor(Shape{0}), 1e-5),
                  ShapeError);
  CHECK_THROWS_AS(layer_norm(Tensor::vector({1, 2}), one, zero, 1e-5), ShapeError);
}

TEST_CASE("attention: identical keys give uniform weights regardless of values") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g;
    Tensor keyrow = randn(Shape{1, 8}, rng);
    Tensor keys(Shape{5, 8});
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t j = 0; j < 8; ++j) keys.at(i, j) = keyrow[j];
    Tensor w;
    scaled_dot_attention(g.constant(randn(Shape{3, 8}, rng)), g.constant(keys),
                         g.constant(randn(Shape{5, 8}, rng, 10.0)), 2, &w);
    for (double v : w.data()) CHECK(v == doctest::Approx(0.2).epsilon(1e-12));
  }
}

TEST_CASE("attention: single position returns the value projection") {
  Rng rng(11);
  ParamSet ps;
  init_attention(ps, "att", 4, rng);
  Graph g(&ps);
  Tensor x = randn(Shape{1, 4}, rng);
  Var out = attention(g, "att", g.constant(x), g.constant(x), 2);
  // Expected: o(v(x)) evaluated directly.
  Tensor v = matmul(x, ps.value("att.v.w"));
  for (std::size_t j = 0; j < 4; ++j) v[j] += ps.value("att.v.b")[j];
  Tensor o = matmul(v, ps.value("att.o.w"));
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(out.value()[j] == doctest::Approx(o[j] + ps.value("att.o.b")[j]).epsilon(1e-12));
  }
}

TEST_CASE("attention: two-position hand evaluation") {
  // One head, d = 2, identity projections.
  Graph g;
  Tensor q = Tensor::matrix(2, 2, {1, 0, 0, 2});
  Tensor k = Tensor::matrix(2, 2, {1, 1, 0, 1});
  Tensor v = Tensor::matrix(2, 2, {1, 2, 3, 4});
  Tensor w;
  Var out = scaled_dot_attention(g.constant(q), g.constant(k), g.constant(v), 1, &w);
  const double r = 1.0 / std::sqrt(2.0);
  // row 0: scores [1, 0] * r; row 1: scores [2, 2] * r
  const double a0 = std::exp(r) / (std::exp(r) + 1.0);
  CHECK(w[0] == doctest::Approx(a0).epsilon(1e-12));
  CHECK(w[2] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(out.value().at(0, 0) == doctest::Approx(a0 * 1 + (1 - a0) * 3).epsilon(1e-12));
  CHECK(out.value().at(0, 1) == doctest::Approx(a0 * 2 + (1 - a0) * 4).epsilon(1e-12));
  CHECK(out.value().at(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(out.value().at(1, 1) == doctest::Approx(3.0).epsilon(1e-12));

  CHECK_THROWS_AS(scaled_dot_attention(g.constant(q), g.constant(k), g.constant(v), 3),
                  ShapeError);
  CHECK_THROWS_AS(
      scaled_dot_attention(g.constant(q), g.constant(Tensor(Shape{3, 2})), g.constant(v), 1),
      ShapeError);
}

TEST_CASE("adamw fixtures") {
  SUBCASE("zero gradient and zero decay is an exact identity") {
    Rng rng(5);
    ParamSet ps;
    ps.add("w", randn(Shape{4, 3}, rng));
    const Tensor before = ps.value("w");
    for (int i = 0; i < 5; ++i) adamw_step(ps, {.lr = 0.1, .weight_decay = 0.0});
    CHECK(ps.value("w") == before);
    CHECK(ps.step() == 5);
  }
  SUBCASE("one scalar step") {
    ParamSet ps;
    ps.add("t", Tensor::scalar(1.0));
    ps.grad("t")[0] = 1.0;
    adamw_step(ps, {.lr = 0.1, .weight_decay = 0.0, .beta1 = 0.9, .beta2 = 0.999, .eps = 1e-8});
    // m = 0.1, v = 0.001; bias-corrected both equal 1.
    const double m_hat = (0.1 * 1.0) / (1.0 - 0.9);
    const double v_hat = (0.001 * 1.0) / (1.0 - 0.999);
    CHECK(ps.value("t")[0] == doctest::Approx(1.0 - 0.1 * m_hat / (std::sqrt(v_hat) + 1e-8))
                                  .epsilon(1e-14));
  }
  SUBCASE("decay-only path") {
    ParamSet ps;
    ps.add("t", Tensor::vector({2.0, -0.5}));
    adamw_step(ps, {.lr = 0.1, .weight_decay = 0.5});
    CHECK(ps.value("t")[0] == 2.0 - 0.1 * 0.5 * 2.0);
    CHECK(ps.value("t")[1] == -0.5 - 0.1 * 0.5 * -0.5);
  }
  SUBCASE("negative hyperparameters rejected") {
    ParamSet ps;
    ps.add("t", Tensor::scalar(1.0));
    CHECK_THROWS_AS(adamw_step(ps, {.lr = -1.0}), ConfigError);
    CHECK_THROWS_AS(adamw_step(ps, {.lr = 0.1, .weight_decay = -0.1}), ConfigError);
  }
}

TEST_CASE("graph rejects non-finite values") {
  ParamSet ps;
  ps.add("w", Tensor::vector({1.0, 2.0}));
  Graph g(&ps);
  Var w = g.param("w");
  CHECK_THROWS_AS(scale(w, INFINITY), NumericalError);
  CHECK_THROWS_AS(g.constant(Tensor::vector({NAN})), NumericalError);
}

// ---------------------------------------------------------------------------
// grad_check

TEST_CASE("grad_check: linear loss agrees to machine precision") {
  Rng rng(1);
  ParamSet ps;
  ps.add("w", randn(Shape{1, 6}, rng));
  const Tensor x = randn(Shape{1, 6}, rng);
  auto report = grad_check([&](Graph& g) { return sum(mul(g.param("w"), g.constant(x))); }, ps,
                           1e-5, 1e-4);
  CHECK(report.passed);
  CHECK(report.worst < 1e-9);
}

TEST_CASE("grad_check: two-layer network with softmax cross-entropy") {
  Rng rng(2);
  ParamSet ps;
  init_linear(ps, "l1", 5, 7, rng);
  init_linear(ps, "l2", 7, 3, rng);
  const Tensor x = randn(Shape{4, 5}, rng);
  const std::vector<std::size_t> y{0, 2, 1, 2};
  auto report = grad_check(
      [&](Graph& g) {
        Var h = gelu(linear(g, "l1", g.constant(x)));
        return cross_entropy_rows(linear(g, "l2", h), y);
      },
      ps, 1e-5, 1e-4);
  CHECK(report.passed);
  CHECK(report.worst < 1e-4);
}

TEST_CASE("grad_check: corrupted gradient is caught") {
  Rng rng(3);
  ParamSet ps;
  ps.add("w", randn(Shape{3}, rng));
  auto corrupted = [](Var a) {
    Tensor out = a.value();
    for (auto& v : out.data()) v = v * v;
    return a.graph->push(std::move(out), {a}, [ia = a.id](Graph& g, int self) {
      for (std::size_t i = 0; i < g.grad(ia).size(); ++i)
        g.grad(ia)[i] += 3.0 * g.value(ia)[i] * g.grad(self)[i];  // should be 2x
    });
  };
  auto report = grad_check([&](Graph& g) { return sum(corrupted(g.param("w"))); }, ps, 1e-5, 1e-4);
  CHECK_FALSE(report.passed);
}

TEST_CASE("grad_check: non-deterministic loss is rejected") {
  ParamSet ps;
  ps.add("w", Tensor::vector({1.0}));
  int calls = 0;
  CHECK_THROWS_AS(grad_check(
                      [&](Graph& g) {
                        return scale(sum(g.param("w")), 1.0 + 0.1 * static_cast<double>(++calls));
                      },
                      ps, 1e-5, 1e-4),
                  Error);
  CHECK_THROWS_AS(grad_check([&](Graph& g) { return sum(g.param("w")); }, ps, 1e-2, 1e-4),
                  ConfigError);
}

// Every differentiable op, randomized shapes, 50 seeds.
TEST_CASE("property: every op passes grad_check on random shapes") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    const std::size_t n = dim(rng), m = dim(rng) + 1, heads = 1 + seed % 2;
    const std::size_t d = 2 * heads;
    const std::size_t t = 2 + dim(rng);
    ParamSet ps;
    ps.add("a", randn(Shape{n, m}, rng));
    ps.add("b", randn(Shape{m, n}, rng));
    ps.add("c", randn(Shape{n, m}, rng));
    ps.add("row", randn(Shape{m}, rng));
    ps.add("gain", randn(Shape{m}, rng));
    ps.add("q", randn(Shape{t, d}, rng));
    ps.add("k", randn(Shape{t + 1, d}, rng));
    ps.add("v", randn(Shape{t + 1, d}, rng));
    ps.add("cw", randn(Shape{3, d, 2}, rng, 0.5));
    ps.add("cb", randn(Shape{2}, rng));
    ps.add("off", randn(Shape{n, 2}, rng));
    Tensor focal_targets(Shape{n, m});
    for (std::size_t i = 0; i < focal_targets.size(); ++i) focal_targets[i] = (i + seed) % 3 == 0;
    Tensor iou_targets(Shape{n, 2});
    for (auto& x : iou_targets.data()) x = 0.2 + std::uniform_real_distribution<double>(0, 2)(rng);
    Tensor imp(Shape{n, m}), anchor = randn(Shape{n, m}, rng);
    for (auto& x : imp.data()) x = std::uniform_real_distribution<double>(0, 2)(rng);
    std::vector<std::size_t> targets(n);
    for (std::size_t i = 0; i < n; ++i) targets[i] = (i + seed) % m;

    auto loss = [&](Graph& g) {
      Var a = g.param("a"), b = g.param("b"), c = g.param("c");
      std::vector<Var> terms;
      terms.push_back(sum(mul(softmax_rows(a), c)));
      terms.push_back(sum(square(matmul(a, b))));
      terms.push_back(sum(mul(matmul_nt(a, c), transpose(matmul(c, b)))));
      terms.push_back(sum(mul(layer_norm(a, g.param("gain"), g.param("row"), 1e-5), c)));
      terms.push_back(sum(gelu(sub(add_row(a, g.param("row")), c))));
      terms.push_back(sum(softplus(add_scalar(a, 0.3))));
      terms.push_back(sum(mul(l2_normalize_rows(a), c)));
      terms.push_back(cross_entropy_rows(add(a, c), targets));
      terms.push_back(sigmoid_focal_loss_sum(a, focal_targets, 0.25, 2.0));
      terms.push_back(iou_loss_sum(add_scalar(softplus(g.param("off")), 0.05), iou_targets));
      terms.push_back(quadratic_penalty(c, imp, anchor, 0.7));
      Var att = scaled_dot_attention(g.param("q"), g.param("k"), g.param("v"), heads);
      terms.push_back(sum(square(att)));
      Var conv = conv1d(g.param("q"), g.param("cw"), g.param("cb"), 2);
      terms.push_back(sum(square(conv)));
      terms.push_back(sum(mean_rows(concat_rows({slice_rows(a, 0, n), gather_rows(c, {0, 0})}))));
      terms.push_back(mean(reshape(square(a), Shape{n * m})));
      Var total = terms.front();
      for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
      return total;
    };
    auto report = grad_check(loss, ps, 1e-5, 1e-4);
    INFO("seed " << seed << " worst param " << report.worst_param << " err " << report.worst);
    CHECK(report.passed);
  }
}
