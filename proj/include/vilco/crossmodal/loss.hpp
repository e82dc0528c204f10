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

#include "vilco/crossmodal/model.hpp"
#include "vilco/datastream/types.hpp"

namespace vilco::xm {

struct LossConfig {
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;
  double center_radius = 1.5;  // in level strides
  /// Level l accepts a point whose farther boundary lies within
  /// [range_base * 2^(l-1), range_base * 2^l) clip strides (0 lower bound at
  /// level 0, no upper bound at the last level).
  double range_base = 4.0;
  double reg_weight = 1.0;
};

struct LabeledWindow {
  data::Window window;
  int slot = 0;
};

/// Per-point training targets produced by center sampling.
struct DenseTargets {
  num::Tensor cls;                      // points x C, 0/1
  std::vector<std::size_t> positives;   // point indices
  num::Tensor reg;                      // positives x 2, in level strides
  std::size_t skipped_windows = 0;      // windows with no positive point
};

DenseTargets assign_targets(const std::vector<DensePoint>& points, std::size_t num_classes,
                            const std::vector<LabeledWindow>& gt, double clip_stride_s,
                            const LossConfig& cfg);

struct LocalizationLoss {
  num::Var total;
  num::Var classification;
  num::Var regression;  // zero-valued constant when there are no positives
  std::size_t positives = 0;
  std::size_t skipped_windows = 0;
};

/// Focal classification over every point and class plus IoU regression on
/// positive points, both normalized by max(1, #positives).
LocalizationLoss loss_localization(const DenseOutputs& dense, const std::vector<LabeledWindow>& gt,
                                   double clip_stride_s, const LossConfig& cfg);

}  // namespace vilco::xm
