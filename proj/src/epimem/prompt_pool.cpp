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

#include "vilco/epimem/prompt_pool.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vilco/error.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::mem {

void PromptConfig::validate() const {
  if (pool_size == 0 || length == 0) throw ConfigError("prompt pool size and length must be >= 1");
  if (top_n == 0 || top_n > pool_size) throw ConfigError("prompt top_n must lie in [1, pool_size]");
  if (!(blend_beta >= 0.0 && blend_beta <= 1.0)) throw ConfigError("blend beta must lie in [0, 1]");
}

nlohmann::json prompt_config_to_json(const PromptConfig& c) {
  return {{"pool_size", c.pool_size},
          {"length", c.length},
          {"top_n", c.top_n},
          {"margin", c.margin},
          {"mode", c.mode == InjectMode::Replace ? "replace" : "blend"},
          {"blend_beta", c.blend_beta},
          {"frozen_query", c.frozen_query},
          {"detach_query", c.detach_query},
          {"task_masked_training", c.task_masked_training}};
}

PromptConfig prompt_config_from_json(const nlohmann::json& j, PromptConfig c) {
  c.pool_size = j.value("pool_size", c.pool_size);
  c.length = j.value("length", c.length);
  c.top_n = j.value("top_n", c.top_n);
  c.margin = j.value("margin", c.margin);
  if (j.contains("mode")) {
    const auto m = j.at("mode").get<std::string>();
    if (m == "replace") {
      c.mode = InjectMode::Replace;
    } else if (m == "blend") {
      c.mode = InjectMode::Blend;
    } else {
      throw ConfigError("unknown prompt injection mode '" + m + "'");
    }
  }
  c.blend_beta = j.value("blend_beta", c.blend_beta);
  c.frozen_query = j.value("frozen_query", c.frozen_query);
  c.detach_query = j.value("detach_query", c.detach_query);
  c.task_masked_training = j.value("task_masked_training", c.task_masked_training);
  return c;
}

void init_prompt_pool(num::ParamSet& params, const PromptConfig& cfg, std::size_t model_dim,
                      std::uint64_t seed) {
  cfg.validate();
  num::Rng rng(seed);
  params.add(kPromptKeys, num::randn(num::Shape{cfg.pool_size, model_dim}, rng));
  params.add(kPromptValues, num::randn(num::Shape{cfg.pool_size, cfg.length * model_dim}, rng));
}

PromptSelection prompt_select(const num::Tensor& keys, const std::vector<double>& query,
                              std::size_t n, const std::vector<std::size_t>& candidates) {
  if (keys.cols() != query.size()) throw ShapeError("prompt_select: query width differs from keys");
  if (n == 0 || n > keys.rows()) throw ConfigError("prompt_select: N must lie in [1, m]");
  double qn = 0.0;
  for (double v : query) qn += v * v;
  qn = std::sqrt(qn);
  if (!(qn > 0.0)) throw NumericalError("prompt_select: degenerate (zero-norm) query");

  PromptSelection sel;
  sel.similarities.resize(keys.rows());
  for (std::size_t i = 0; i < keys.rows(); ++i) {
    double dot = 0.0, kn = 0.0;
    for (std::size_t c = 0; c < keys.cols(); ++c) {
      dot += keys.at(i, c) * query[c];
      kn += keys.at(i, c) * keys.at(i, c);
    }
    kn = std::sqrt(kn);
    sel.similarities[i] = kn > 0.0 ? dot / (kn * qn) : 0.0;
  }
  std::vector<std::size_t> order(keys.rows());
  std::iota(order.begin(), order.end(), 0);
  if (!candidates.empty()) {
    order = candidates;
    std::sort(order.begin(), order.end());
    order.erase(std::unique(order.begin(), order.end()), order.end());
    if (order.back() >= keys.rows()) throw ShapeError("prompt_select: candidate index out of range");
    if (n > order.size()) throw ConfigError("prompt_select: fewer candidates than N");
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sel.similarities[a] > sel.similarities[b];
  });
  sel.indices.assign(order.begin(), order.begin() + static_cast<long>(n));
  return sel;
}

std::vector<std::size_t> task_prompt_keys(const PromptConfig& cfg, std::size_t task) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cfg.top_n; ++i) out.push_back((task * cfg.top_n + i) % cfg.pool_size);
  return out;
}

num::Var selected_prompts(num::Graph& g, const PromptConfig& cfg, const PromptSelection& sel,
                          std::size_t model_dim) {
  if (sel.indices.empty()) throw ConfigError("prompt injection needs a non-empty selection");
  num::Var rows = num::gather_rows(g.param(kPromptValues), sel.indices);  // N x (L * D)
  return num::reshape(rows, num::Shape{sel.indices.size() * cfg.length, model_dim});
}

num::Var prompt_inject(num::Var prompts, num::Var original, InjectMode mode, double beta) {
  if (mode == InjectMode::Replace) return prompts;
  num::Var centre = num::mean_rows(prompts);  // 1 x D
  const std::size_t n = original.value().rows();
  num::Var tiled = num::gather_rows(centre, std::vector<std::size_t>(n, 0));
  return num::add(num::scale(tiled, beta), num::scale(original, 1.0 - beta));
}

num::Var prompt_loss(num::Var keys, num::Var query, const std::vector<std::size_t>& selected,
                     double margin) {
  const std::size_t m = keys.value().rows();
  if (query.value().rows() != 1) throw ShapeError("prompt_loss: query must be a single row");
  std::vector<char> chosen(m, 0);
  for (auto i : selected) {
    if (i >= m) throw ShapeError("prompt_loss: selected index out of range");
    chosen[i] = 1;
  }
  std::vector<std::size_t> sel, rest;
  for (std::size_t i = 0; i < m; ++i) (chosen[i] ? sel : rest).push_back(i);

  // cos(q, K_i) for every key: (1 x D) * (m x D)^T
  num::Var cos = num::transpose(num::matmul_nt(num::l2_normalize_rows(query),
                                               num::l2_normalize_rows(keys)));  // m x 1
  auto& g = *keys.graph;
  num::Var loss = g.constant(num::Tensor::scalar(0.0));
  if (!sel.empty()) {
    num::Var pull = num::mean(num::gather_rows(cos, sel));
    loss = num::add(loss, num::add_scalar(num::scale(pull, -1.0), 1.0));
  }
  if (!rest.empty()) {
    num::Var push = num::mean(num::relu(num::add_scalar(num::gather_rows(cos, rest), -margin)));
    loss = num::add(loss, push);
  }
  return loss;
}

}  // namespace vilco::mem
