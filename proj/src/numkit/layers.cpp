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

#include "vilco/numkit/layers.hpp"

namespace vilco::num {

void init_linear(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                 Rng& rng) {
  params.add(prefix + ".w", xavier(in, out, rng));
  params.add(prefix + ".b", Tensor(Shape{out}));
}

Var linear(Graph& g, const std::string& prefix, Var x) {
  return add_row(matmul(x, g.param(prefix + ".w")), g.param(prefix + ".b"));
}

void init_layer_norm(ParamSet& params, const std::string& prefix, std::size_t dim) {
  params.add(prefix + ".gain", Tensor(Shape{dim}, 1.0));
  params.add(prefix + ".bias", Tensor(Shape{dim}));
}

Var layer_norm(Graph& g, const std::string& prefix, Var x, double eps) {
  return layer_norm(x, g.param(prefix + ".gain"), g.param(prefix + ".bias"), eps);
}

void init_attention(ParamSet& params, const std::string& prefix, std::size_t dim, Rng& rng) {
  for (const char* p : {".q", ".k", ".v", ".o"}) init_linear(params, prefix + p, dim, dim, rng);
}

Var attention(Graph& g, const std::string& prefix, Var q_in, Var kv_in, std::size_t heads,
              Tensor* weights) {
  Var q = linear(g, prefix + ".q", q_in);
  Var k = linear(g, prefix + ".k", kv_in);
  Var v = linear(g, prefix + ".v", kv_in);
  return linear(g, prefix + ".o", scaled_dot_attention(q, k, v, heads, weights));
}

}  // namespace vilco::num
