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
#include <string>
#include <vector>

#include "vilco/numkit/param_set.hpp"
#include "vilco/numkit/tensor.hpp"

namespace vilco::num {

class Graph;

/// Handle to a node recorded on a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Tensor& value() const;
  bool valid() const { return graph != nullptr && id >= 0; }
};

/// Reverse-mode tape. Every op appends a node holding its forward value and a
/// closure that pushes the node's gradient into its parents.
///
/// Parameter leaves are bound by name to a ParamSet; backward() adds their
/// gradients into ParamSet::grad (it does not zero them first).
class Graph {
 public:
  using BackwardFn = std::function<void(Graph&, int self)>;

  Graph() = default;
  explicit Graph(ParamSet* params) : params_(params) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  /// Leaf for a named parameter. Repeated calls with one name share a node.
  Var param(const std::string& name);
  /// Same value, no gradient flows back through it.
  Var detach(Var v);

  /// Records a node. `parents` only decides whether the node needs a gradient.
  Var push(Tensor value, std::initializer_list<Var> parents, BackwardFn fn);
  Var push(Tensor value, const std::vector<Var>& parents, BackwardFn fn);

  const Tensor& value(int id) const { return nodes_[id].value; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  /// Gradient buffer of a node, allocated zero-filled on first touch.
  Tensor& grad(int id);
  bool has_grad(int id) const { return !nodes_[id].grad.data().empty(); }

  /// Backpropagates from a scalar node (seed 1.0) and flushes parameter
  /// gradients. Throws NumericalError on any non-finite gradient.
  void backward(Var loss, double seed = 1.0);

  ParamSet* params() const { return params_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    BackwardFn backward;
    bool needs_grad = false;
    std::string param_name;
  };

  std::vector<Node> nodes_;
  std::vector<std::pair<std::string, int>> param_nodes_;
  ParamSet* params_ = nullptr;
};

}  // namespace vilco::num
