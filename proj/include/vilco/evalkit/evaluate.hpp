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
#include <map>
#include <string>
#include <vector>

#include "vilco/datastream/types.hpp"
#include "vilco/evalkit/metrics.hpp"

namespace vilco::eval {

/// Recall percents of one task snapshot.
struct TaskScores {
  std::map<std::pair<std::size_t, double>, double> recall;  // (k, m) -> percent
  std::map<std::size_t, double> mean_over_iou;             // k -> mean over m

  double at(std::size_t k, double m) const;
};

/// Ranked windows (best first) for one evaluation item.
using Predictor = std::function<std::vector<data::Window>(const data::TaskItem&)>;

/// Runs `predict` on every item (fanned out over `threads` workers) and scores
/// each (k, m) pair of `cfg`.
TaskScores evaluate_task(const Predictor& predict, const std::vector<data::TaskItem>& items,
                         const EvalConfig& cfg, std::size_t threads = 1);

/// Canonical label of a metric cell, e.g. "R@1,IoU=0.3" or "R@5,mean".
std::string metric_label(std::size_t k, double m);
std::string metric_mean_label(std::size_t k);

}  // namespace vilco::eval
