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

#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "vilco/numkit/graph.hpp"
#include "vilco/numkit/param_set.hpp"

namespace vilco::cl {

/// Per-parameter importance with the anchor values it was measured at.
struct ImportanceMap {
  std::map<std::string, num::Tensor> importance;
  std::map<std::string, num::Tensor> anchor;

  bool empty() const { return importance.empty(); }
  nlohmann::json to_json() const;
  static ImportanceMap from_json(const nlohmann::json& j);
  friend bool operator==(const ImportanceMap&, const ImportanceMap&) = default;
};

enum class Accumulate { Max, Sum };

using NamePredicate = std::function<bool(const std::string&)>;
/// Builds the per-sample scalar (Fisher) or output tensor (MAS) for sample i.
using SampleFn = std::function<num::Var(num::Graph&, std::size_t)>;

/// Diagonal Fisher: mean over samples of the squared gradient of the sample
/// loss. Anchor is the current parameter values. Gradients in `params` are
/// left zeroed.
ImportanceMap estimate_fisher(num::ParamSet& params, std::size_t samples, const SampleFn& loss_of,
                              const NamePredicate& include = {});

/// MAS: mean over samples of |d ||output||^2 / d theta|.
ImportanceMap mas_importance(num::ParamSet& params, std::size_t samples, const SampleFn& output_of,
                             const NamePredicate& include = {});

/// Folds `next` into `acc` elementwise (running max or sum); the anchor is
/// replaced by `next`'s.
void accumulate(ImportanceMap& acc, const ImportanceMap& next, Accumulate mode);

/// (lambda / 2) * sum over mapped parameters of F (theta - theta*)^2.
/// Returns a zero constant when lambda is 0 or the map is empty.
num::Var importance_penalty(num::Graph& g, const ImportanceMap& imp, double lambda);

}  // namespace vilco::cl
