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

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "vilco/numkit/graph.hpp"
#include "vilco/numkit/param_set.hpp"

namespace vilco::mem {

enum class InjectMode { Replace, Blend };

struct PromptConfig {
  std::size_t pool_size = 10;  // m
  std::size_t length = 4;      // L rows per prompt
  std::size_t top_n = 2;       // N
  double margin = 0.5;         // gamma
  InjectMode mode = InjectMode::Replace;
  double blend_beta = 0.5;
  /// Key matching reads the query through the frozen initial text projection
  /// (`frozen_query`), or through the live one, whose prompt-loss gradient can
  /// be stopped with `detach_query`.
  bool frozen_query = true;
  bool detach_query = false;
  /// During training, a task's items choose only among its own N keys
  /// (task t owns keys [t*N, t*N + N) modulo m). Evaluation always searches
  /// the whole pool.
  bool task_masked_training = true;

  void validate() const;
};

nlohmann::json prompt_config_to_json(const PromptConfig& c);
PromptConfig prompt_config_from_json(const nlohmann::json& j, PromptConfig base = {});

inline constexpr const char* kPromptKeys = "prompt.keys";      // m x D
inline constexpr const char* kPromptValues = "prompt.values";  // m x (L * D)

/// Standard-normal keys and values.
void init_prompt_pool(num::ParamSet& params, const PromptConfig& cfg, std::size_t model_dim,
                      std::uint64_t seed);

struct PromptSelection {
  std::vector<std::size_t> indices;  // top-N, best first
  std::vector<double> similarities;  // cosine against every key
};

/// Cosine similarity to every key; top-N by similarity, ties to the lower index.
/// A non-empty `candidates` list restricts which keys may be chosen.
/// Throws NumericalError for a zero-norm query.
PromptSelection prompt_select(const num::Tensor& keys, const std::vector<double>& query,
                              std::size_t n, const std::vector<std::size_t>& candidates = {});

/// Keys owned by a task under masked training.
std::vector<std::size_t> task_prompt_keys(const PromptConfig& cfg, std::size_t task);

/// Selected prompt rows as an (N * L) x D block, prompts concatenated in
/// selection order.
num::Var selected_prompts(num::Graph& g, const PromptConfig& cfg, const PromptSelection& sel,
                          std::size_t model_dim);

/// Replace: the prompt block becomes the query block. Blend: every original
/// token moves to beta * mean(prompt rows) + (1 - beta) * token.
num::Var prompt_inject(num::Var prompts, num::Var original, InjectMode mode, double beta);

/// mean over selected k of (1 - cos(q, K_k)) + mean over the rest of
/// max(0, cos(q, K_j) - margin). `query` is 1 x D, `keys` m x D.
num::Var prompt_loss(num::Var keys, num::Var query, const std::vector<std::size_t>& selected,
                     double margin);

}  // namespace vilco::mem
