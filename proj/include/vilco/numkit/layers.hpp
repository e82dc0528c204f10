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

#include <cstddef>
#include <string>

#include "vilco/numkit/graph.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::num {

/// Registers `<prefix>.w` (in x out, Xavier) and `<prefix>.b` (zeros).
void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                 Rng& rng);
/// x * w + b
Var linear(Graph& g, const std::string& prefix, Var x);

/// Registers `<prefix>.gain` (ones) and `<prefix>.bias` (zeros).
void init_layer_norm(ParamSet& params, const std::string& prefix, std::size_t dim);
Var layer_norm(Graph& g, const std::string& prefix, Var x, double eps = 1e-5);

/// Registers the four projections `<prefix>.{q,k,v,o}` of a dim x dim attention block.
void init_attention(ParamSet& params, const std::string& prefix, std::size_t dim, Rng& rng);

/// Multi-head attention: projects queries from `q_in` and keys/values from
/// `kv_in`, attends, then applies the output projection.
Var attention(Graph& g, const std::string& prefix, Var q_in, Var kv_in, std::size_t heads,
              Tensor* weights = nullptr);

}  // namespace vilco::num
