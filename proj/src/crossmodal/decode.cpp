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

#include "vilco/crossmodal/decode.hpp"

#include <algorithm>

#include "vilco/error.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::xm {

std::vector<MomentPrediction> nms(std::vector<MomentPrediction> candidates, double nms_iou,
                                  std::size_t top_k) {
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw ConfigError("nms_iou must be in (0, 1]");
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const MomentPrediction& a, const MomentPrediction& b) {
                     if (a.score != b.score) return a.score > b.score;
                     if (a.window.start_s != b.window.start_s) return a.window.start_s < b.window.start_s;
                     return a.window.end_s < b.window.end_s;
                   });
  std::vector<MomentPrediction> kept;
  for (const auto& c : candidates) {
    if (kept.size() >= top_k) break;
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const MomentPrediction& k) {
      return k.category == c.category && eval::interval_iou(k.window, c.window) >= nms_iou;
    });
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

std::vector<MomentPrediction> decode_windows(const DenseValues& dense, const DecodeOptions& opts) {
  if (!(opts.threshold > 0.0 && opts.threshold < 1.0)) throw ConfigError("threshold must be in (0, 1)");
  const std::size_t c = dense.logits.cols();
  std::vector<int> classes = opts.classes;
  if (classes.empty()) {
    for (std::size_t k = 0; k < c; ++k) classes.push_back(static_cast<int>(k));
  }
  std::vector<MomentPrediction> cands;
  for (std::size_t p = 0; p < dense.points.size(); ++p) {
    const auto& pt = dense.points[p];
    const double pos = static_cast<double>(pt.t);
    data::Window w{std::max(0.0, (pos - dense.offsets.at(p, 0)) * pt.stride_s),
                   std::min(dense.duration_s, (pos + dense.offsets.at(p, 1)) * pt.stride_s)};
    if (!(w.start_s < w.end_s)) continue;
    for (int k : classes) {
      if (k < 0 || static_cast<std::size_t>(k) >= c) throw ShapeError("decode: class slot out of range");
      const double score = num::sigmoid(dense.logits.at(p, static_cast<std::size_t>(k)));
      if (score < opts.threshold) continue;
      cands.push_back({w, k, score});
    }
  }
  if (cands.size() > opts.pre_nms_top) {
    std::partial_sort(cands.begin(), cands.begin() + static_cast<long>(opts.pre_nms_top), cands.end(),
                      [](const MomentPrediction& a, const MomentPrediction& b) { return a.score > b.score; });
    cands.resize(opts.pre_nms_top);
  }
  return nms(std::move(cands), opts.nms_iou, opts.top_k);
}

}  // namespace vilco::xm
