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

#include "vilco/numkit/optim.hpp"

#include <cmath>

#include "vilco/error.hpp"

namespace vilco::num {

void adamw_step(ParamSet& params, const AdamWConfig& cfg,
                const std::function<bool(const std::string&)>& trainable) {
  if (cfg.lr < 0) throw ConfigError("adamw: negative learning rate");
  if (cfg.weight_decay < 0) throw ConfigError("adamw: negative weight decay");
  params.advance_step();
  const double t = static_cast<double>(params.step());
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (const auto& name : params.names()) {
    if (trainable && !trainable(name)) continue;
    auto& theta = params.value(name).data();
    const auto& grad = params.grad(name).data();
    auto& m = params.first_moment(name).data();
    auto& v = params.second_moment(name).data();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= cfg.lr * cfg.weight_decay * theta[i];
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      theta[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
    params.value(name).require_finite(name.c_str());
  }
}

}  // namespace vilco::num
