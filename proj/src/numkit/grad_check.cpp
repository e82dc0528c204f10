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

#include "vilco/numkit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "vilco/error.hpp"

namespace vilco::num {

namespace {

double evaluate(const LossBuilder& loss_fn, ParamSet& params) {
  Graph g(&params);
  return loss_fn(g).value()[0];
}

}  // namespace

GradCheckReport grad_check(const LossBuilder& loss_fn, ParamSet& params, double step, double tol,
                           std::size_t max_entries) {
  if (step < 1e-6 || step > 1e-3) throw ConfigError("grad_check: step must be in [1e-6, 1e-3]");
  constexpr double kFloor = 1e-6;

  params.zero_grad();
  double base = 0.0;
  {
    Graph g(&params);
    Var loss = loss_fn(g);
    base = loss.value()[0];
    g.backward(loss);
  }
  if (evaluate(loss_fn, params) != base) {
    throw Error("grad_check: loss function is not deterministic");
  }

  GradCheckReport report;
  for (const auto& name : params.names()) {
    Tensor& theta = params.value(name);
    const Tensor analytic = params.grad(name);
    const std::size_t n = theta.size();
    const std::size_t count = (max_entries == 0 || max_entries >= n) ? n : max_entries;
    double worst = 0.0;
    for (std::size_t c = 0; c < count; ++c) {
      const std::size_t i = count == n ? c : (c * n) / count;
      const double orig = theta[i];
      auto at = [&](double offset) {
        theta[i] = orig + offset;
        return evaluate(loss_fn, params);
      };
      // Fourth-order central stencil.
      const double numeric = (8.0 * (at(step) - at(-step)) - (at(2 * step) - at(-2 * step))) / (12.0 * step);
      theta[i] = orig;
      const double a = analytic[i];
      const double denom = std::max({std::abs(a), std::abs(numeric), kFloor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.max_rel_error[name] = worst;
    if (worst > report.worst || report.worst_param.empty()) {
      report.worst = std::max(report.worst, worst);
      if (worst >= report.worst) report.worst_param = name;
    }
  }
  report.passed = report.worst <= tol;
  params.zero_grad();
  return report;
}

}  // namespace vilco::num
