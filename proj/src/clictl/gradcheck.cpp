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

#include "vilco/clictl/gradcheck.hpp"

#include <algorithm>
#include <random>

#include "vilco/clstrat/importance.hpp"
#include "vilco/clstrat/learner.hpp"
#include "vilco/crossmodal/loss.hpp"
#include "vilco/crossmodal/model.hpp"
#include "vilco/datastream/synth.hpp"
#include "vilco/epimem/prompt_pool.hpp"
#include "vilco/numkit/grad_check.hpp"
#include "vilco/numkit/ops.hpp"
#include "vilco/sslalign/ssl.hpp"

namespace vilco::ctl {

using num::Graph;
using num::ParamSet;
using num::Rng;
using num::Shape;
using num::Tensor;
using num::Var;

namespace {

constexpr double kStep = 1e-4;

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

void record(GradSuiteEntry& e, const num::GradCheckReport& r) {
  ++e.configs;
  if (!r.passed) ++e.failures;
  if (r.worst > e.worst) {
    e.worst = r.worst;
    e.worst_param = r.worst_param;
  }
}

num::GradCheckReport check_localization(Rng& rng, double tol) {
  xm::FusionConfig f;
  f.video_dim = pick(rng, 2, 5);
  f.text_dim = pick(rng, 2, 4);
  f.heads = pick(rng, 1, 2);
  f.model_dim = 2 * f.heads * pick(rng, 1, 2);
  f.fusion_layers = 1;
  f.pyramid_levels = pick(rng, 1, 3);
  f.num_classes = pick(rng, 1, 3);
  f.mlp_ratio = 2;
  ParamSet ps;
  xm::init_model(ps, f, rng());

  data::FeatureSequence video;
  video.video_id = "v";
  video.clip_stride_s = 1.0;
  const std::size_t t = pick(rng, 6, 12);
  video.data = num::randn(Shape{t, f.video_dim}, rng);
  std::vector<std::vector<double>> tokens(pick(rng, 1, 2), std::vector<double>(f.text_dim));
  for (auto& tok : tokens)
    for (auto& v : tok) v = uniform(rng, -1, 1);
  std::vector<xm::LabeledWindow> gt;
  for (std::size_t i = 0, n = pick(rng, 1, 2); i < n; ++i) {
    const double len = static_cast<double>(pick(rng, 2, 4));
    const double start = static_cast<double>(pick(rng, 0, t - static_cast<std::size_t>(len)));
    gt.push_back({{start, start + len}, static_cast<int>(pick(rng, 0, f.num_classes - 1))});
  }
  xm::LossConfig lc;
  lc.range_base = 2.0;
  return num::grad_check(
      [&](Graph& g) {
        auto pyr = xm::encode_fuse(g, f, video, xm::project_query(g, f, tokens));
        return xm::loss_localization(xm::predict_moments(g, f, pyr), gt, video.clip_stride_s, lc).total;
      },
      ps, kStep, tol, 8);
}

num::GradCheckReport check_ssl(Rng& rng, double tol) {
  const std::size_t b = pick(rng, 1, 4), d = pick(rng, 2, 6), n = pick(rng, 0, 3);
  ParamSet ps;
  ps.add("v", num::randn(Shape{b, d}, rng));
  ps.add("t", num::randn(Shape{b, d}, rng));
  const Tensor nv = num::randn(Shape{n, d}, rng), nt = num::randn(Shape{n, d}, rng);
  const double tau = uniform(rng, 0.1, 2.0);
  return num::grad_check(
      [&](Graph& g) {
        ssl::AlignmentBatch ab;
        ab.videos = g.param("v");
        ab.texts = g.param("t");
        ab.negative_videos = nv;
        ab.negative_texts = nt;
        ab.temperature = tau;
        return ssl::ssl_loss(ab).total;
      },
      ps, kStep, tol);
}

num::GradCheckReport check_prompt(Rng& rng, double tol) {
  const std::size_t m = pick(rng, 2, 6), d = pick(rng, 2, 6);
  ParamSet ps;
  ps.add("keys", num::randn(Shape{m, d}, rng));
  ps.add("query", num::randn(Shape{1, d}, rng));
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(pick(rng, 1, m));
  const double margin = uniform(rng, -0.5, 0.5);
  return num::grad_check(
      [&](Graph& g) { return mem::prompt_loss(g.param("keys"), g.param("query"), all, margin); }, ps, kStep,
      tol);
}

num::GradCheckReport check_penalty(Rng& rng, double tol) {
  ParamSet ps;
  cl::ImportanceMap imp;
  for (std::size_t i = 0, n = pick(rng, 1, 3); i < n; ++i) {
    const std::string name = "p" + std::to_string(i);
    const Shape s{pick(rng, 1, 3), pick(rng, 1, 4)};
    ps.add(name, num::randn(s, rng));
    Tensor f = num::randn(s, rng);
    for (auto& v : f.data()) v = std::abs(v);
    imp.importance[name] = f;
    imp.anchor[name] = num::randn(s, rng);
  }
  const double lambda = uniform(rng, 0.1, 10.0);
  return num::grad_check([&](Graph& g) { return cl::importance_penalty(g, imp, lambda); }, ps, kStep, tol);
}

num::GradCheckReport check_vilco_step(Rng& rng, double tol) {
  data::SynthConfig sc;
  sc.num_tasks = 2;
  sc.cats_per_task = pick(rng, 1, 2);
  sc.videos_per_task = 4;
  sc.steps = 8;
  sc.video_dim = pick(rng, 3, 5);
  sc.text_dim = pick(rng, 2, 4);
  sc.windows_min = 1;
  sc.windows_max = 2;
  sc.window_len_min = 2;
  sc.window_len_max = 3;
  sc.val_fraction = 0.25;
  sc.orthogonal = false;
  sc.seed = rng();
  const auto sd = data::synthesize_stream(sc);

  xm::FusionConfig f;
  f.video_dim = sc.video_dim;
  f.text_dim = sc.text_dim;
  f.model_dim = 4;
  f.heads = 2;
  f.fusion_layers = 1;
  f.pyramid_levels = 2;
  f.num_classes = cl::required_classes(sd.stream);

  cl::StrategyConfig s;
  s.method = cl::Method::Vilco;
  s.epochs = 1;
  s.batch_size = 2;
  s.seed = rng();
  s.replay_capacity = 16;
  s.ssl_negatives = 3;
  s.ssl_temperature = uniform(rng, 0.5, 2.0);
  s.lambda_ssl = uniform(rng, 0.05, 1.0);
  s.lambda_prompt = uniform(rng, 0.05, 1.0);
  s.prompt.pool_size = 4;
  s.prompt.length = 2;
  s.prompt.top_n = 1;
  s.prompt.mode = rng() % 2 ? mem::InjectMode::Replace : mem::InjectMode::Blend;
  s.loss.range_base = 2.0;
  cl::Learner learner(sd.stream, sd.manifest, f, s);
  learner.train_task(0);

  std::vector<mem::ItemRef> batch;
  for (std::size_t i = 0; i < std::min<std::size_t>(2, sd.stream.tasks[1].train.size()); ++i) batch.push_back({1, i});
  batch.push_back({0, 0});
  const Rng saved = learner.ssl_rng();
  return num::grad_check(
      [&](Graph& g) {
        learner.ssl_rng() = saved;
        return learner.batch_loss(g, batch, 1);
      },
      learner.params(), kStep, tol, 4);
}

}  // namespace

std::vector<GradSuiteEntry> run_gradcheck_suite(std::size_t configs, std::uint64_t seed, double tol) {
  using Check = num::GradCheckReport (*)(Rng&, double);
  const std::vector<std::pair<std::string, Check>> checks = {
      {"localization", check_localization}, {"ssl_loss", check_ssl},
      {"prompt_loss", check_prompt},         {"ewc_penalty", check_penalty},
      {"vilco_step", check_vilco_step}};
  std::vector<GradSuiteEntry> out;
  for (std::size_t c = 0; c < checks.size(); ++c) {
    GradSuiteEntry e;
    e.loss = checks[c].first;
    Rng rng(seed * 31 + c);
    for (std::size_t i = 0; i < configs; ++i) record(e, checks[c].second(rng, tol));
    out.push_back(e);
  }
  return out;
}

}  // namespace vilco::ctl
