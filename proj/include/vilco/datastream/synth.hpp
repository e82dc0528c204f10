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

#include <cstdint>

#include <json.hpp>

#include "vilco/datastream/types.hpp"

namespace vilco::data {

/// Synthetic task stream with planted ground truth.
///
/// Every category owns a unit latent prototype in video-feature space
/// (orthonormal when `orthogonal`), and a text prototype built from a shared
/// per-task direction plus a per-category direction, so queries of one task
/// cluster together. Planted windows replace background rows with
/// prototype + noise.
struct SynthConfig {
  TaskKind kind = TaskKind::MQ;
  std::size_t num_tasks = 5;
  std::size_t cats_per_task = 22;
  std::size_t videos_per_task = 20;
  std::size_t steps = 32;  // T
  std::size_t video_dim = 128;
  std::size_t text_dim = 32;
  double noise_sigma = 0.1;
  double background_sigma = 0.3;
  double query_noise = 0.05;
  double task_separation = 2.0;
  double val_fraction = 0.25;
  std::size_t windows_min = 1;
  std::size_t windows_max = 3;
  std::size_t window_len_min = 2;
  std::size_t window_len_max = 6;
  double clip_stride_s = 1.0;
  bool orthogonal = true;
  /// Probability of planting one extra window from another task's category.
  double distractor_prob = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t order_seed = 0;
};

nlohmann::json synth_config_to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::json& j, SynthConfig base = {});

struct SyntheticData {
  Manifest manifest;  // features held in memory
  TaskStream stream;
  num::Tensor video_prototypes;  // C x video_dim
  num::Tensor text_prototypes;   // C x text_dim
  std::vector<std::string> dropped_query_ids;
};

SyntheticData synthesize_stream(const SynthConfig& cfg);

}  // namespace vilco::data
