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

#include "vilco/crossmodal/model.hpp"
#include "vilco/epimem/memory.hpp"
#include "vilco/epimem/prompt_pool.hpp"
#include "vilco/error.hpp"
#include "vilco/numkit/grad_check.hpp"
#include "vilco/numkit/ops.hpp"

using namespace vilco;
using mem::MemoryEntry;
using mem::ShortTermMemory;
using num::Graph;
using num::Shape;
using num::Tensor;
using num::Var;

namespace {

MemoryEntry entry(int key, std::size_t index = 0) {
  MemoryEntry e;
  e.key = key;
  e.item = {0, index};
  e.video_embedding = {double(key), 1.0};
  e.text_embedding = {1.0, double(key)};
  return e;
}

std::vector<int> keys_of(const ShortTermMemory& m) {
  std::vector<int> out;
  for (const auto* e : m.entries()) out.push_back(e->key);
  return out;
}

}  // namespace

TEST_CASE("memory: capacity above stream length keeps everything") {
  ShortTermMemory m(10, 1);
  m.begin_task(0);
  for (int k = 0; k < 7; ++k) m.store(entry(k));
  CHECK(keys_of(m) == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(m.insertions() == 7);
}

TEST_CASE("memory: capacity 2, stream of 3 matches a step-by-step reservoir") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ShortTermMemory m(2, seed);
    m.begin_task(0);
    for (int k = 0; k < 3; ++k) m.store(entry(k));

    std::mt19937_64 rng(seed);
    std::vector<int> sim{0, 1};
    const std::uint64_t j = rng() % 3;
    if (j < 2) sim[j] = 2;
    CHECK(keys_of(m) == sim);
    CHECK(m.size() == 2);
  }
}

TEST_CASE("memory: reservoir within a task is uniform") {
  // Each of 10 offered items should survive with probability 3/10.
  std::vector<int> count(10, 0);
  const int runs = 20000;
  for (int r = 0; r < runs; ++r) {
    ShortTermMemory m(3, static_cast<std::uint64_t>(r) * 7919 + 1);
    m.begin_task(0);
    for (int k = 0; k < 10; ++k) m.store(entry(k));
    for (int k : keys_of(m)) ++count[k];
  }
  const double p = 0.3, sigma = std::sqrt(runs * p * (1 - p));
  for (int c : count) CHECK(std::abs(c - runs * p) < 4 * sigma);
}

TEST_CASE("memory: bound and per-task quota over random streams") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t cap = 1 + rng() % 30;
    ShortTermMemory m(cap, seed);
    std::vector<std::size_t> offered;
    const int tasks = 1 + static_cast<int>(rng() % 6);
    for (int t = 0; t < tasks; ++t) {
      m.begin_task(t);
      offered.push_back(rng() % 40);
      for (std::size_t i = 0; i < offered.back(); ++i) {
        m.store(entry(t, i));
        CHECK(m.size() <= cap);
      }
      const std::size_t quota = cap / m.tasks_seen();
      for (int p = 0; p < t; ++p) CHECK(m.entries_of(p).size() >= std::min(quota, offered[p]));
      for (const auto* e : m.entries_of(t)) CHECK(e->task_id == t);
    }
  }
}

TEST_CASE("memory: task ids must increase, JSON round trip") {
  ShortTermMemory m(5, 3, 0.2);
  CHECK_THROWS_AS(m.store(entry(0)), ConfigError);
  m.begin_task(2);
  for (int k = 0; k < 9; ++k) m.store(entry(k, k));
  CHECK_THROWS_AS(m.begin_task(1), ConfigError);
  auto back = ShortTermMemory::from_json(m.to_json());
  CHECK(back == m);
  // The restored RNG continues the same stream.
  back.store(entry(20));
  m.store(entry(20));
  CHECK(back == m);
}

TEST_CASE("st_sample_negatives: exhaustion, exclusion, determinism") {
  ShortTermMemory m(10, 4);
  m.begin_task(0);
  for (int k = 0; k < 4; ++k) m.store(entry(k));
  num::Rng rng(1);
  auto all = mem::st_sample_negatives(m, 10, {1}, rng);
  REQUIRE(all.size() == 3);
  CHECK(all[0]->key == 0);
  CHECK(all[1]->key == 2);
  CHECK(all[2]->key == 3);

  num::Rng r1(9), r2(9);
  auto a = mem::st_sample_negatives(m, 2, {}, r1);
  auto b = mem::st_sample_negatives(m, 2, {}, r2);
  REQUIRE(a.size() == 2);
  CHECK(a == b);
  auto odd = mem::st_sample_negatives(m, 5, {}, r1, [](const MemoryEntry& e) { return e.key % 2 == 1; });
  CHECK(odd.size() == 2);
}

TEST_CASE("st_sample_negatives: 10k draws over 4 entries are uniform") {
  ShortTermMemory m(4, 5);
  m.begin_task(0);
  for (int k = 0; k < 4; ++k) m.store(entry(k));
  num::Rng rng(6);
  std::vector<int> count(4, 0);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++count[mem::st_sample_negatives(m, 1, {}, rng)[0]->key];
  const double sigma = std::sqrt(draws * 0.25 * 0.75);
  for (int c : count) CHECK(std::abs(c - draws * 0.25) <= 3 * sigma);
}

TEST_CASE("rng state round trip") {
  num::Rng a(42);
  a();
  auto b = mem::rng_from_state(mem::rng_state(a));
  CHECK(a() == b());
  CHECK_THROWS_AS(mem::rng_from_state("garbage"), FormatError);
}

TEST_CASE("prompt_select fixtures") {
  const Tensor keys = Tensor::matrix(2, 2, {1, 0, 0, 1});
  auto s = mem::prompt_select(keys, {1, 0}, 1);
  CHECK(s.indices == std::vector<std::size_t>{0});
  CHECK(s.similarities[0] == 1.0);
  s = mem::prompt_select(keys, {0.6, 0.8}, 1);
  CHECK(s.indices == std::vector<std::size_t>{1});
  CHECK(s.similarities[1] == doctest::Approx(0.8));
  CHECK(s.similarities[0] == doctest::Approx(0.6));

  const Tensor same = Tensor::matrix(3, 2, {1, 1, 2, 2, 1, 1});
  CHECK(mem::prompt_select(same, {1, 1}, 3).indices == std::vector<std::size_t>{0, 1, 2});
  CHECK(mem::prompt_select(keys, {1, 0}, 1, {1}).indices == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(mem::prompt_select(keys, {0, 0}, 1), NumericalError);
  CHECK_THROWS(mem::prompt_select(keys, {1, 0}, 3));
}

TEST_CASE("prompt_select is invariant under positive query scaling") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> logc(-12, 12);
  for (int seed = 0; seed < 200; ++seed) {
    const Tensor keys = num::randn(Shape{10, 6}, rng);
    std::vector<double> q(6);
    for (auto& v : q) v = std::normal_distribution<double>()(rng);
    auto base = mem::prompt_select(keys, q, 10);
    for (int t = 0; t < 5; ++t) {
      const double c = std::pow(10.0, logc(rng));
      auto scaled = q;
      for (auto& v : scaled) v *= c;
      CHECK(mem::prompt_select(keys, scaled, 10).indices == base.indices);
    }
  }
}

TEST_CASE("task_prompt_keys wraps around the pool") {
  mem::PromptConfig c;
  c.pool_size = 5;
  c.top_n = 2;
  CHECK(mem::task_prompt_keys(c, 0) == std::vector<std::size_t>{0, 1});
  CHECK(mem::task_prompt_keys(c, 2) == std::vector<std::size_t>{4, 0});
}

TEST_CASE("selected_prompts and prompt_inject") {
  mem::PromptConfig c;
  c.pool_size = 3;
  c.length = 2;
  c.top_n = 2;
  num::ParamSet ps;
  mem::init_prompt_pool(ps, c, 2, 1);
  CHECK(ps.value(mem::kPromptKeys).shape() == Shape{3, 2});
  CHECK(ps.value(mem::kPromptValues).shape() == Shape{3, 4});
  Graph g(&ps);
  mem::PromptSelection sel{{2, 0}, {}};
  Var block = mem::selected_prompts(g, c, sel, 2);
  REQUIRE(block.value().shape() == Shape{4, 2});
  const Tensor& v = ps.value(mem::kPromptValues);
  CHECK(block.value().at(0, 0) == v.at(2, 0));
  CHECK(block.value().at(1, 1) == v.at(2, 3));
  CHECK(block.value().at(2, 0) == v.at(0, 0));

  Var one = g.constant(Tensor::matrix(1, 2, {3, 4}));
  Var orig = g.constant(Tensor::matrix(2, 2, {1, 2, 5, 6}));
  // Copies: recording new nodes may move earlier node values.
  const Tensor replaced = mem::prompt_inject(one, orig, mem::InjectMode::Replace, 0.5).value();
  const Tensor kept = mem::prompt_inject(one, orig, mem::InjectMode::Blend, 0.0).value();
  const Tensor mid = mem::prompt_inject(one, orig, mem::InjectMode::Blend, 0.5).value();
  CHECK(replaced == one.value());
  CHECK(kept == orig.value());
  CHECK(mid == Tensor::matrix(2, 2, {2, 3, 4, 5}));
}

TEST_CASE("replace injection makes fusion independent of the original query") {
  xm::FusionConfig f;
  f.video_dim = 3;
  f.text_dim = 2;
  f.model_dim = 4;
  f.heads = 2;
  f.fusion_layers = 1;
  f.pyramid_levels = 2;
  f.num_classes = 2;
  num::ParamSet ps;
  xm::init_model(ps, f, 3);
  num::Rng rng(4);
  data::FeatureSequence video;
  video.data = num::randn(Shape{6, 3}, rng);
  const Tensor prompts = num::randn(Shape{2, 4}, rng);
  std::vector<Tensor> outs;
  for (auto q : {std::vector<double>{1, 0}, std::vector<double>{-3, 7}}) {
    Graph g(&ps);
    Var block = mem::prompt_inject(g.constant(prompts), xm::project_query(g, f, {q}), mem::InjectMode::Replace, 0.5);
    outs.push_back(xm::predict_moments(g, f, xm::encode_fuse(g, f, video, block)).logits.value());
  }
  CHECK(outs[0] == outs[1]);
}

TEST_CASE("prompt_loss fixtures and gradient") {
  Graph g;
  // Query equal to its key, other keys orthogonal, margin >= 0.
  Var keys = g.constant(Tensor::matrix(3, 3, {2, 0, 0, 0, 1, 0, 0, 0, 5}));
  CHECK(mem::prompt_loss(keys, g.constant(Tensor::matrix(1, 3, {1, 0, 0})), {0}, 0.0).value()[0] ==
        doctest::Approx(0.0).epsilon(1e-15));
  Var k2 = g.constant(Tensor::matrix(2, 2, {1, 0, 1, 0}));
  CHECK(mem::prompt_loss(k2, g.constant(Tensor::matrix(1, 2, {1, 0})), {0}, 0.5).value()[0] ==
        doctest::Approx(0.5).epsilon(1e-15));

  for (int seed = 0; seed < 50; ++seed) {
    num::Rng rng(seed);
    num::ParamSet ps;
    ps.add("k", num::randn(Shape{5, 4}, rng));
    ps.add("q", num::randn(Shape{1, 4}, rng));
    auto r = num::grad_check([&](Graph& gg) { return mem::prompt_loss(gg.param("k"), gg.param("q"), {1, 3}, 0.1); },
                             ps, 1e-5, 1e-4);
    CHECK(r.passed);
  }
}

TEST_CASE("prompt config validation and JSON") {
  mem::PromptConfig c;
  c.top_n = 11;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.top_n = 3;
  c.mode = mem::InjectMode::Blend;
  auto back = mem::prompt_config_from_json(mem::prompt_config_to_json(c));
  CHECK(back.top_n == 3);
  CHECK(back.mode == mem::InjectMode::Blend);
}
