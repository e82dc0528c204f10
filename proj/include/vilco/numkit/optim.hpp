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

#include "vilco/numkit/param_set.hpp"

namespace vilco::num {

struct AdamWConfig {
  double lr = 1e-4;
  double weight_decay = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// One AdamW update with decoupled weight decay and bias-corrected moments.
/// Parameters rejected by `trainable` keep their values and moments. The step
/// counter advances once per call.
void adamw_step(ParamSet& params, const AdamWConfig& cfg,
                const std::function<bool(const std::string&)>& trainable = {});

}  // namespace vilco::num
