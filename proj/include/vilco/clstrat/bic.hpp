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

#include <vector>

#include <json.hpp>

#include "vilco/crossmodal/loss.hpp"
#include "vilco/numkit/tensor.hpp"

namespace vilco::cl {

/// Affine correction alpha * z + beta applied to one task's class logits.
struct BicCorrection {
  int task_id = -1;  // -1: no correction in effect
  double alpha = 1.0;
  double beta = 0.0;

  double apply(double logit) const { return alpha * logit + beta; }
  bool identity() const { return alpha == 1.0 && beta == 0.0; }
  nlohmann::json to_json() const;
  static BicCorrection from_json(const nlohmann::json& j);
  friend bool operator==(const BicCorrection&, const BicCorrection&) = default;
};

/// Frozen-model logits of one validation item with their 0/1 targets.
struct BicSample {
  num::Tensor logits;   // points x C
  num::Tensor targets;  // points x C
  bool newest = false;  // belongs to the task being corrected
};

struct BicFitOptions {
  std::size_t epochs = 100;
  double lr = 0.01;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
};

/// Fits (alpha, beta) by full-batch AdamW on the summed focal loss of all
/// samples, transforming only the `newest` samples' logits. Returns the
/// identity for an empty validation set.
BicCorrection fit_bic(const std::vector<BicSample>& samples, int task_id, const BicFitOptions& opts);

/// Mean focal loss of the samples under a given correction.
double bic_validation_loss(const std::vector<BicSample>& samples, const BicCorrection& c,
                           const BicFitOptions& opts);

}  // namespace vilco::cl
