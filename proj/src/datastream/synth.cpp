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

#include "vilco/datastream/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "vilco/datastream/features.hpp"
#include "vilco/datastream/stream.hpp"
#include "vilco/error.hpp"

namespace vilco::data {

using nlohmann::json;

namespace {

using Rng = std::mt19937_64;

std::vector<double> gaussian(Rng& rng, std::size_t n, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

void normalize(std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (auto& x : v) x /= s;
}

double to_f32(double x) { return static_cast<double>(static_cast<float>(x)); }

num::Tensor make_video_prototypes(const SynthConfig& cfg, std::size_t count, Rng& rng) {
  num::Tensor protos(num::Shape{count, cfg.video_dim});
  for (std::size_t c = 0; c < count; ++c) {
    auto v = gaussian(rng, cfg.video_dim, 1.0);
    if (cfg.orthogonal) {
      for (std::size_t p = 0; p < c; ++p) {
        double dot = 0.0;
        for (std::size_t j = 0; j < cfg.video_dim; ++j) dot += v[j] * protos.at(p, j);
        for (std::size_t j = 0; j < cfg.video_dim; ++j) v[j] -= dot * protos.at(p, j);
      }
    }
    normalize(v);
    for (std::size_t j = 0; j < cfg.video_dim; ++j) protos.at(c, j) = v[j];
  }
  return protos;
}

std::vector<double> noisy(const num::Tensor& protos, std::size_t c, double sigma, Rng& rng) {
  const std::size_t d = protos.cols();
  auto v = gaussian(rng, d, sigma / std::sqrt(static_cast<double>(d)));
  for (std::size_t j = 0; j < d; ++j) v[j] = to_f32(v[j] + protos.at(c, j));
  return v;
}

struct Planted {
  std::size_t category;
  std::size_t start;
  std::size_t length;
};

}  // namespace

json synth_config_to_json(const SynthConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"num_tasks", c.num_tasks},
          {"cats_per_task", c.cats_per_task},
          {"videos_per_task", c.videos_per_task},
          {"steps", c.steps},
          {"video_dim", c.video_dim},
          {"text_dim", c.text_dim},
          {"noise_sigma", c.noise_sigma},
          {"background_sigma", c.background_sigma},
          {"query_noise", c.query_noise},
          {"task_separation", c.task_separation},
          {"val_fraction", c.val_fraction},
          {"windows_min", c.windows_min},
          {"windows_max", c.windows_max},
          {"window_len_min", c.window_len_min},
          {"window_len_max", c.window_len_max},
          {"clip_stride_s", c.clip_stride_s},
          {"orthogonal", c.orthogonal},
          {"distractor_prob", c.distractor_prob},
          {"seed", c.seed},
          {"order_seed", c.order_seed}};
}

SynthConfig synth_config_from_json(const json& j, SynthConfig c) {
  if (j.contains("kind")) c.kind = task_kind_from_string(j.at("kind").get<std::string>());
  c.num_tasks = j.value("num_tasks", c.num_tasks);
  c.cats_per_task = j.value("cats_per_task", c.cats_per_task);
  c.videos_per_task = j.value("videos_per_task", c.videos_per_task);
  c.steps = j.value("steps", c.steps);
  c.video_dim = j.value("video_dim", c.video_dim);
  c.text_dim = j.value("text_dim", c.text_dim);
  c.noise_sigma = j.value("noise_sigma", c.noise_sigma);
  c.background_sigma = j.value("background_sigma", c.background_sigma);
  c.query_noise = j.value("query_noise", c.query_noise);
  c.task_separation = j.value("task_separation", c.task_separation);
  c.val_fraction = j.value("val_fraction", c.val_fraction);
  c.windows_min = j.value("windows_min", c.windows_min);
  c.windows_max = j.value("windows_max", c.windows_max);
  c.window_len_min = j.value("window_len_min", c.window_len_min);
  c.window_len_max = j.value("window_len_max", c.window_len_max);
  c.clip_stride_s = j.value("clip_stride_s", c.clip_stride_s);
  c.orthogonal = j.value("orthogonal", c.orthogonal);
  c.distractor_prob = j.value("distractor_prob", c.distractor_prob);
  c.seed = j.value("seed", c.seed);
  c.order_seed = j.value("order_seed", c.order_seed);
  return c;
}

SyntheticData synthesize_stream(const SynthConfig& cfg) {
  if (cfg.num_tasks == 0 || cfg.cats_per_task == 0 || cfg.videos_per_task == 0 || cfg.steps == 0 ||
      cfg.video_dim == 0 || cfg.text_dim == 0) {
    throw ConfigError("synthetic config counts must all be >= 1");
  }
  if (cfg.windows_min == 0 || cfg.windows_min > cfg.windows_max || cfg.window_len_min == 0 ||
      cfg.window_len_min > cfg.window_len_max || cfg.window_len_max > cfg.steps) {
    throw ConfigError("synthetic window ranges are inconsistent");
  }
  if (cfg.kind == TaskKind::NLQ && cfg.num_tasks > static_cast<std::size_t>(kNumNlqTemplates)) {
    throw ConfigError("NLQ synthetic streams support at most 13 template tasks");
  }
  const std::size_t num_cats = cfg.num_tasks * cfg.cats_per_task;
  if (cfg.orthogonal && cfg.video_dim < num_cats) {
    throw ConfigError("video_dim " + std::to_string(cfg.video_dim) + " < " +
                      std::to_string(num_cats) + " categories; orthogonal prototypes impossible");
  }

  Rng rng(cfg.seed);
  SyntheticData out;
  out.video_prototypes = make_video_prototypes(cfg, num_cats, rng);

  out.text_prototypes = num::Tensor(num::Shape{num_cats, cfg.text_dim});
  std::vector<std::vector<double>> task_dirs;
  for (std::size_t t = 0; t < cfg.num_tasks; ++t) {
    task_dirs.push_back(gaussian(rng, cfg.text_dim, 1.0));
    normalize(task_dirs.back());
  }
  for (std::size_t c = 0; c < num_cats; ++c) {
    auto r = gaussian(rng, cfg.text_dim, 1.0);
    normalize(r);
    const auto& u = task_dirs[c / cfg.cats_per_task];
    for (std::size_t j = 0; j < cfg.text_dim; ++j) r[j] += cfg.task_separation * u[j];
    normalize(r);
    for (std::size_t j = 0; j < cfg.text_dim; ++j) out.text_prototypes.at(c, j) = r[j];
  }

  Manifest& m = out.manifest;
  m.kind = cfg.kind;
  for (std::size_t c = 0; c < num_cats; ++c) m.vocabulary.push_back("category_" + std::to_string(c));

  const auto val_count = static_cast<std::size_t>(
      std::ceil(cfg.val_fraction * static_cast<double>(cfg.videos_per_task)));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double bg_sigma = cfg.background_sigma / std::sqrt(static_cast<double>(cfg.video_dim));
  std::size_t video_counter = 0;

  for (std::size_t task = 0; task < cfg.num_tasks; ++task) {
    for (std::size_t vi = 0; vi < cfg.videos_per_task; ++vi) {
      VideoEntry v;
      v.video_id = "vid" + std::to_string(video_counter++);
      v.duration_s = static_cast<double>(cfg.steps) * cfg.clip_stride_s;
      v.split = vi + val_count >= cfg.videos_per_task && val_count > 0 ? "val" : "train";

      FeatureSequence f;
      f.video_id = v.video_id;
      f.clip_stride_s = cfg.clip_stride_s;
      f.data = num::Tensor(num::Shape{cfg.steps, cfg.video_dim});
      for (auto& x : f.data.data()) x = to_f32(std::normal_distribution<double>(0.0, bg_sigma)(rng));

      std::uniform_int_distribution<std::size_t> nwin(cfg.windows_min, cfg.windows_max);
      std::uniform_int_distribution<std::size_t> wlen(cfg.window_len_min, cfg.window_len_max);
      std::uniform_int_distribution<std::size_t> own_cat(task * cfg.cats_per_task,
                                                         (task + 1) * cfg.cats_per_task - 1);
      std::vector<std::size_t> cats;
      const std::size_t n_windows = nwin(rng);
      for (std::size_t w = 0; w < n_windows; ++w) cats.push_back(own_cat(rng));
      if (cfg.kind == TaskKind::MQ && cfg.num_tasks > 1 && unit(rng) < cfg.distractor_prob) {
        std::uniform_int_distribution<std::size_t> any(0, num_cats - 1);
        std::size_t c = any(rng);
        while (c / cfg.cats_per_task == task) c = any(rng);
        cats.push_back(c);
      }

      std::vector<Planted> planted;
      std::vector<char> used(cfg.steps, 0);
      for (std::size_t c : cats) {
        const std::size_t len = wlen(rng);
        for (int attempt = 0; attempt < 64; ++attempt) {
          std::uniform_int_distribution<std::size_t> start_dist(0, cfg.steps - len);
          const std::size_t s = start_dist(rng);
          // Keep one free step between windows so planted runs stay distinct.
          const std::size_t lo = s == 0 ? 0 : s - 1;
          const std::size_t hi = std::min(cfg.steps, s + len + 1);
          if (std::any_of(used.begin() + static_cast<long>(lo), used.begin() + static_cast<long>(hi),
                          [](char u) { return u != 0; })) {
            continue;
          }
          std::fill(used.begin() + static_cast<long>(s), used.begin() + static_cast<long>(s + len), 1);
          planted.push_back({c, s, len});
          break;
        }
      }
      std::sort(planted.begin(), planted.end(),
                [](const Planted& a, const Planted& b) { return a.start < b.start; });

      for (const auto& p : planted) {
        for (std::size_t t = p.start; t < p.start + p.length; ++t) {
          auto row = noisy(out.video_prototypes, p.category, cfg.noise_sigma, rng);
          for (std::size_t j = 0; j < cfg.video_dim; ++j) f.data.at(t, j) = row[j];
        }
      }

      auto window_of = [&](const Planted& p) {
        return Window{static_cast<double>(p.start) * cfg.clip_stride_s,
                      static_cast<double>(p.start + p.length) * cfg.clip_stride_s};
      };
      auto narration_of = [&](const Planted& p) {
        return Narration{window_of(p), noisy(out.text_prototypes, p.category, cfg.query_noise, rng)};
      };

      if (cfg.kind == TaskKind::MQ) {
        std::vector<std::size_t> distinct;
        for (const auto& p : planted)
          if (std::find(distinct.begin(), distinct.end(), p.category) == distinct.end())
            distinct.push_back(p.category);
        std::sort(distinct.begin(), distinct.end());
        for (std::size_t c : distinct) {
          QueryRecord q;
          q.query_id = v.video_id + "_c" + std::to_string(c);
          q.kind = TaskKind::MQ;
          q.categories = {static_cast<int>(c)};
          q.text = m.vocabulary[c];
          q.query_tokens = {noisy(out.text_prototypes, c, cfg.query_noise, rng)};
          for (const auto& p : planted) {
            if (p.category != c) continue;
            q.windows.push_back(window_of(p));
            q.narrations.push_back(narration_of(p));
          }
          v.queries.push_back(std::move(q));
        }
      } else {
        for (std::size_t w = 0; w < planted.size(); ++w) {
          const auto& p = planted[w];
          QueryRecord q;
          q.query_id = v.video_id + "_q" + std::to_string(w);
          q.kind = TaskKind::NLQ;
          q.template_id = static_cast<int>(task) + 1;
          std::string text = nlq_template(q.template_id);
          const auto pos = text.find('X');
          if (pos != std::string::npos) text.replace(pos, 1, m.vocabulary[p.category]);
          q.text = text;
          q.query_tokens = {noisy(out.text_prototypes, p.category, cfg.query_noise, rng)};
          q.windows = {window_of(p)};
          q.narrations = {narration_of(p)};
          v.queries.push_back(std::move(q));
        }
      }
      m.features.emplace(v.video_id, std::move(f));
      m.videos.push_back(std::move(v));
    }
  }

  PartitionResult part = cfg.kind == TaskKind::MQ
                             ? partition_videos(m, cfg.num_tasks)
                             : partition_videos(m, static_cast<std::size_t>(kNumNlqTemplates));
  out.dropped_query_ids = std::move(part.dropped_query_ids);
  out.manifest = std::move(part.manifest);
  StreamOptions opts;
  opts.num_tasks = cfg.num_tasks;
  opts.order_seed = cfg.order_seed;
  out.stream = build_task_stream(out.manifest, cfg.kind, opts);
  return out;
}

}  // namespace vilco::data
