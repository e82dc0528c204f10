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

#include "vilco/crossmodal/loss.hpp"

#include <cmath>
#include <limits>

#include "vilco/error.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::xm {

using num::Var;

DenseTargets assign_targets(const std::vector<DensePoint>& points, std::size_t num_classes,
                            const std::vector<LabeledWindow>& gt, double clip_stride_s,
                            const LossConfig& cfg) {
  DenseTargets out;
  out.cls = num::Tensor(num::Shape{points.size(), num_classes});
  std::size_t max_level = 0;
  for (const auto& p : points) max_level = std::max(max_level, p.level);

  std::vector<int> owner(points.size(), -1);
  std::vector<char> window_used(gt.size(), 0);
  for (std::size_t p = 0; p < points.size(); ++p) {
    const auto& pt = points[p];
    const double x = pt.position_s();
    const double lo = pt.level == 0 ? 0.0 : cfg.range_base * std::pow(2.0, static_cast<double>(pt.level) - 1.0);
    const double hi = pt.level == max_level ? std::numeric_limits<double>::infinity()
                                            : cfg.range_base * std::pow(2.0, static_cast<double>(pt.level));
    double best_len = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; w < gt.size(); ++w) {
      const auto& win = gt[w].window;
      if (!(win.start_s <= x && x <= win.end_s)) continue;
      const double center = 0.5 * (win.start_s + win.end_s);
      if (std::abs(x - center) > cfg.center_radius * pt.stride_s) continue;
      const double reach = std::max(x - win.start_s, win.end_s - x) / clip_stride_s;
      if (reach < lo || reach >= hi) continue;
      if (win.length() < best_len) {
        best_len = win.length();
        owner[p] = static_cast<int>(w);
      }
    }
    if (owner[p] >= 0) window_used[static_cast<std::size_t>(owner[p])] = 1;
  }

  for (std::size_t p = 0; p < points.size(); ++p) {
    if (owner[p] < 0) continue;
    out.positives.push_back(p);
  }
  out.reg = num::Tensor(num::Shape{out.positives.size(), 2});
  for (std::size_t i = 0; i < out.positives.size(); ++i) {
    const std::size_t p = out.positives[i];
    const auto& g = gt[static_cast<std::size_t>(owner[p])];
    const double x = points[p].position_s();
    out.reg.at(i, 0) = (x - g.window.start_s) / points[p].stride_s;
    out.reg.at(i, 1) = (g.window.end_s - x) / points[p].stride_s;
    out.cls.at(p, static_cast<std::size_t>(g.slot)) = 1.0;
  }
  for (char used : window_used) out.skipped_windows += used ? 0 : 1;
  return out;
}

LocalizationLoss loss_localization(const DenseOutputs& dense, const std::vector<LabeledWindow>& gt,
                                   double clip_stride_s, const LossConfig& cfg) {
  auto& g = *dense.logits.graph;
  const std::size_t c = dense.logits.value().cols();
  for (const auto& w : gt) {
    if (w.slot < 0 || static_cast<std::size_t>(w.slot) >= c) throw ShapeError("window slot out of range");
  }
  DenseTargets tg = assign_targets(dense.points, c, gt, clip_stride_s, cfg);
  const double norm = 1.0 / std::max<double>(1.0, static_cast<double>(tg.positives.size()));

  LocalizationLoss out;
  out.positives = tg.positives.size();
  out.skipped_windows = tg.skipped_windows;
  out.classification =
      num::scale(num::sigmoid_focal_loss_sum(dense.logits, tg.cls, cfg.focal_alpha, cfg.focal_gamma), norm);
  if (tg.positives.empty()) {
    out.regression = g.constant(num::Tensor::scalar(0.0));
    out.total = out.classification;
  } else {
    Var pred = num::gather_rows(dense.offsets, tg.positives);
    out.regression = num::scale(num::iou_loss_sum(pred, tg.reg), norm * cfg.reg_weight);
    out.total = num::add(out.classification, out.regression);
  }
  return out;
}

}  // namespace vilco::xm
