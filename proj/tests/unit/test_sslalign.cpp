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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vilco/epimem/memory.hpp"
#include "vilco/error.hpp"
#include "vilco/numkit/grad_check.hpp"
#include "vilco/numkit/ops.hpp"
#include "vilco/sslalign/ssl.hpp"

using namespace vilco;
using num::Graph;
using num::Shape;
using num::Tensor;

namespace {

double total_of(const Tensor& v, const Tensor& t, const Tensor& nv, const Tensor& nt, double tau = 1.0) {
  Graph g;
  ssl::AlignmentBatch b;
  b.videos = g.constant(v);
  b.texts = g.constant(t);
  b.negative_videos = nv;
  b.negative_texts = nt;
  b.temperature = tau;
  return ssl::ssl_loss(b).total.value()[0];
}

Tensor empty(std::size_t d) { return Tensor(Shape{0, d}); }

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

mem::MemoryEntry narrated(std::vector<double> v, std::vector<double> t) {
  mem::MemoryEntry e;
  e.video_embedding = std::move(v);
  e.text_embedding = std::move(t);
  return e;
}

}  // namespace

TEST_CASE("ssl: single pair without negatives is exactly zero") {
  num::Rng rng(1);
  const Tensor v = num::randn(Shape{1, 5}, rng), t = num::randn(Shape{1, 5}, rng);
  CHECK(total_of(v, t, empty(5), empty(5)) == 0.0);
}

TEST_CASE("ssl: orthogonal two-pair case") {
  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  CHECK(total_of(eye, eye, empty(2), empty(2)) == doctest::Approx(4 * std::log1p(std::exp(-1.0)) / 2).epsilon(1e-14));
  CHECK(total_of(eye, eye, empty(2), empty(2)) == doctest::Approx(0.6265).epsilon(1e-4));
}

TEST_CASE("ssl: symmetric similarity gives equal directions") {
  num::Rng rng(2);
  const Tensor x = num::randn(Shape{4, 3}, rng);
  Graph g;
  ssl::AlignmentBatch b;
  b.videos = g.constant(x);
  b.texts = g.constant(x);
  b.negative_videos = empty(3);
  b.negative_texts = empty(3);
  auto l = ssl::ssl_loss(b);
  CHECK(l.v2t.value()[0] == l.t2v.value()[0]);
}

TEST_CASE("ssl: permutation invariance and negatives never lower the loss") {
  for (int seed = 0; seed < 60; ++seed) {
    num::Rng rng(seed);
    const std::size_t b = 1 + rng() % 5, d = 2 + rng() % 4, n = rng() % 4;
    const Tensor v = num::randn(Shape{b, d}, rng), t = num::randn(Shape{b, d}, rng);
    const Tensor nv = num::randn(Shape{n, d}, rng), nt = num::randn(Shape{n, d}, rng);
    const double tau = 0.2 + (rng() % 100) / 50.0;
    const double base = total_of(v, t, nv, nt, tau);

    std::vector<std::size_t> perm(b);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Tensor pv(Shape{b, d}), pt(Shape{b, d});
    for (std::size_t i = 0; i < b; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        pv.at(i, j) = v.at(perm[i], j);
        pt.at(i, j) = t.at(perm[i], j);
      }
    CHECK(total_of(pv, pt, nv, nt, tau) == doctest::Approx(base).epsilon(1e-12));

    Tensor nv2(Shape{n + 1, d}), nt2(Shape{n + 1, d});
    std::copy(nv.data().begin(), nv.data().end(), nv2.data().begin());
    std::copy(nt.data().begin(), nt.data().end(), nt2.data().begin());
    for (std::size_t j = 0; j < d; ++j) {
      nv2.at(n, j) = std::normal_distribution<double>()(rng);
      nt2.at(n, j) = std::normal_distribution<double>()(rng);
    }
    CHECK(total_of(v, t, nv2, nt2, tau) >= base);
  }
}

TEST_CASE("ssl: gradients pass finite differences") {
  for (int seed = 0; seed < 50; ++seed) {
    num::Rng rng(100 + seed);
    const std::size_t b = 1 + rng() % 4, d = 2 + rng() % 4, n = rng() % 3;
    num::ParamSet ps;
    ps.add("v", num::randn(Shape{b, d}, rng));
    ps.add("t", num::randn(Shape{b, d}, rng));
    const Tensor nv = num::randn(Shape{n, d}, rng), nt = num::randn(Shape{n, d}, rng);
    auto r = num::grad_check(
        [&](Graph& g) {
          ssl::AlignmentBatch ab;
          ab.videos = g.param("v");
          ab.texts = g.param("t");
          ab.negative_videos = nv;
          ab.negative_texts = nt;
          ab.temperature = 0.5;
          return ssl::ssl_loss(ab).total;
        },
        ps, 1e-5, 1e-4);
    CHECK(r.passed);
  }
}

TEST_CASE("build_alignment_batch: empty memory keeps only current pairs") {
  Graph g;
  std::vector<ssl::CurrentPair> cur(3);
  for (std::size_t i = 0; i < 3; ++i) {
    cur[i].video = g.constant(Tensor::matrix(1, 2, {double(i), 1}));
    if (i != 1) cur[i].text = g.constant(Tensor::matrix(1, 2, {1, double(i)}));
  }
  mem::ShortTermMemory m(4, 0);
  num::Rng rng(1);
  auto b = ssl::build_alignment_batch(cur, m, 5, 1, rng);
  CHECK(b.videos.value().rows() == 2);
  CHECK(b.skipped == 1);
  CHECK(b.negative_videos.rows() == 0);
  std::vector<ssl::CurrentPair> silent(1);
  silent[0].video = cur[0].video;
  CHECK_THROWS_AS(ssl::build_alignment_batch(silent, m, 5, 1, rng), ConfigError);
}

TEST_CASE("build_alignment_batch: negatives come from st_sample_negatives over past narrated tasks") {
  mem::ShortTermMemory m(20, 3);
  for (int t = 0; t < 3; ++t) {
    m.begin_task(t);
    for (int i = 0; i < 4; ++i) {
      auto e = narrated({double(t), double(i)}, {double(i), double(t) + 1});
      if (i == 3) e.text_embedding.clear();
      m.store(e);
    }
  }
  Graph g;
  std::vector<ssl::CurrentPair> cur(1);
  cur[0].video = g.constant(Tensor::matrix(1, 2, {1, 1}));
  cur[0].text = g.constant(Tensor::matrix(1, 2, {1, -1}));
  num::Rng a(8), b(8);
  auto batch = ssl::build_alignment_batch(cur, m, 2, 2, a);
  auto want = mem::st_sample_negatives(m, 2, {}, b, [](const mem::MemoryEntry& e) {
    return e.task_id < 2 && !e.text_embedding.empty();
  });
  REQUIRE(batch.negative_videos.rows() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(batch.negative_videos.at(i, 0) == want[i]->video_embedding[0]);
    CHECK(batch.negative_videos.at(i, 1) == want[i]->video_embedding[1]);
    CHECK(batch.negative_videos.at(i, 0) < 2);  // only tasks 0 and 1
  }
  num::Rng c(1);
  CHECK(ssl::build_alignment_batch(cur, m, 100, 2, c).negative_videos.rows() == 6);
}

TEST_CASE("a memory copy of a current positive is only a denominator term") {
  const std::vector<double> v1{1, 0.2}, t1{0.9, 0.1}, v2{-0.3, 1}, t2{0.1, 1.2};
  const Tensor v = Tensor::matrix(2, 2, {v1[0], v1[1], v2[0], v2[1]});
  const Tensor t = Tensor::matrix(2, 2, {t1[0], t1[1], t2[0], t2[1]});
  const Tensor nv = Tensor::matrix(1, 2, {v1[0], v1[1]}), nt = Tensor::matrix(1, 2, {t1[0], t1[1]});
  const double got = total_of(v, t, nv, nt);

  // v2t rows: positives on the diagonal, every text plus the negative text
  // in the denominator; t2v symmetric with videos.
  const std::vector<std::vector<double>> vs{v1, v2}, ts{t1, t2};
  double v2t = 0, t2v = 0;
  for (int i = 0; i < 2; ++i) {
    double zv = std::exp(cosine(vs[i], t1)), zt = std::exp(cosine(ts[i], v1));
    for (int j = 0; j < 2; ++j) {
      zv += std::exp(cosine(vs[i], ts[j]));
      zt += std::exp(cosine(ts[i], vs[j]));
    }
    v2t += -(cosine(vs[i], ts[i]) - std::log(zv));
    t2v += -(cosine(ts[i], vs[i]) - std::log(zt));
  }
  CHECK(got == doctest::Approx((v2t + t2v) / 2).epsilon(1e-12));
  CHECK(got > total_of(v, t, empty(2), empty(2)));
}
