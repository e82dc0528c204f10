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

#include "vilco/numkit/graph.hpp"

#include <algorithm>

#include "vilco/error.hpp"

namespace vilco::num {

const Tensor& Var::value() const { return graph->value(id); }

Var Graph::constant(Tensor value) {
  value.require_finite("constant");
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(const std::string& name) {
  for (const auto& [pname, id] : param_nodes_) {
    if (pname == name) return Var{this, id};
  }
  if (params_ == nullptr) throw ConfigError("graph has no parameter set bound");
  Node n;
  n.value = params_->value(name);
  n.value.require_finite(name.c_str());
  n.needs_grad = true;
  n.param_name = name;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace_back(name, id);
  return Var{this, id};
}

Var Graph::detach(Var v) { return constant(value(v.id)); }

Var Graph::push(Tensor value, std::initializer_list<Var> parents, BackwardFn fn) {
  value.require_finite("forward pass");
  Node n;
  n.value = std::move(value);
  n.needs_grad = std::any_of(parents.begin(), parents.end(),
                             [this](Var p) { return nodes_[p.id].needs_grad; });
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::push(Tensor value, const std::vector<Var>& parents, BackwardFn fn) {
  value.require_finite("forward pass");
  Node n;
  n.value = std::move(value);
  n.needs_grad = std::any_of(parents.begin(), parents.end(),
                             [this](Var p) { return nodes_[p.id].needs_grad; });
  if (n.needs_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return Var{this, static_cast<int>(nodes_.size()) - 1};
}

Tensor& Graph::grad(int id) {
  Node& n = nodes_[id];
  if (n.grad.data().empty()) n.grad = Tensor(n.value.shape());
  return n.grad;
}

void Graph::backward(Var loss, double seed) {
  if (value(loss.id).size() != 1) throw ShapeError("backward() needs a scalar loss");
  if (!nodes_[loss.id].needs_grad) return;
  grad(loss.id)[0] = seed;
  for (int id = loss.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.data().empty() || !n.backward) continue;
    n.backward(*this, id);
  }
  for (const auto& [name, id] : param_nodes_) {
    if (!has_grad(id)) continue;
    const Tensor& g = nodes_[id].grad;
    g.require_finite(("gradient of " + name).c_str());
    auto& dst = params_->grad(name).data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i];
  }
}

}  // namespace vilco::num
