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

#include <optional>
#include <vector>

#include "vilco/crossmodal/model.hpp"
#include "vilco/datastream/types.hpp"
#include "vilco/evalkit/metrics.hpp"

namespace vilco::xm {

struct MomentPrediction {
  data::Window window;
  int category = 0;  // class slot
  double score = 0.0;
};

struct DecodeOptions {
  double threshold = 0.001;
  double nms_iou = 0.5;
  std::size_t top_k = 5;
  std::size_t pre_nms_top = 1000;
  /// Restrict decoding to these class slots; empty means all.
  std::vector<int> classes;
};

/// Greedy per-class NMS over already-decoded candidates. Ties in score keep
/// the earlier window first. Output is sorted by descending score.
std::vector<MomentPrediction> nms(std::vector<MomentPrediction> candidates, double nms_iou,
                                  std::size_t top_k);

/// Point t at level l with offsets (dl, dr) becomes [(t - dl) s_l, (t + dr) s_l],
/// clamped to [0, duration]. Scores are sigmoid(logit).
std::vector<MomentPrediction> decode_windows(const DenseValues& dense, const DecodeOptions& opts);

}  // namespace vilco::xm
