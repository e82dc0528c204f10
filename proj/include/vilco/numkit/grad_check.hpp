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
#include <functional>
#include <map>
#include <string>

#include "vilco/numkit/graph.hpp"

namespace vilco::num {

struct GradCheckReport {
  /// Max relative error per parameter name.
  std::map<std::string, double> max_rel_error;
  double worst = 0.0;
  std::string worst_param;
  bool passed = true;
};

using LossBuilder = std::function<Var(Graph&)>;

/// Compares analytic gradients of `loss_fn` against central differences
/// (five-point stencil).
///
/// Relative error is |a - n| / max(|a|, |n|, floor) with floor = 1e-6, so
/// entries whose true gradient is ~0 are judged on an absolute scale.
/// `max_entries` > 0 checks only that many evenly spaced entries per tensor.
/// Throws Error if two evaluations at the same point disagree.
GradCheckReport grad_check(const LossBuilder& loss_fn, ParamSet& params, double step, double tol,
                           std::size_t max_entries = 0);

}  // namespace vilco::num
