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
#include <string>
#include <vector>

#include <json.hpp>

#include "vilco/datastream/types.hpp"
#include "vilco/numkit/graph.hpp"
#include "vilco/numkit/param_set.hpp"

namespace vilco::xm {

struct FusionConfig {
  std::size_t video_dim = 256;
  std::size_t text_dim = 256;
  std::size_t model_dim = 256;
  std::size_t heads = 4;
  std::size_t fusion_layers = 2;
  std::size_t pyramid_levels = 4;
  std::size_t num_classes = 22;  // per sub-task; 1 for NLQ
  std::size_t mlp_ratio = 2;
  double ln_eps = 1e-5;

  void validate() const;
  friend bool operator==(const FusionConfig&, const FusionConfig&) = default;
};

nlohmann::json fusion_config_to_json(const FusionConfig& c);
FusionConfig fusion_config_from_json(const nlohmann::json& j, FusionConfig base = {});

/// Registers every model parameter in `params` (seeded initialization).
void init_model(num::ParamSet& params, const FusionConfig& cfg, std::uint64_t seed);

/// Query-conditioned video features at each pyramid level.
struct PyramidFeatures {
  std::vector<num::Var> levels;      // level l: ceil(T / 2^l) x D
  std::vector<double> strides_s;     // 2^l * clip stride
  double duration_s = 0.0;
  num::Var video_tokens;             // embedded video before fusion, T x D
};

/// Projects raw query tokens (n x text_dim) into model space (n x D).
num::Var project_query(num::Graph& g, const FusionConfig& cfg,
                       const std::vector<std::vector<double>>& tokens);

/// Prepends `query_block` (n x D, already in model space) to the embedded
/// video tokens, runs the fusion transformer, drops the query rows and builds
/// the stride-2 pyramid.
PyramidFeatures encode_fuse(num::Graph& g, const FusionConfig& cfg,
                            const data::FeatureSequence& video, num::Var query_block);

/// One point per (level, timestep), in level-major order.
struct DensePoint {
  std::size_t level = 0;
  std::size_t t = 0;
  double stride_s = 1.0;
  double position_s() const { return static_cast<double>(t) * stride_s; }
};

struct DenseOutputs {
  num::Var logits;   // points x C
  num::Var offsets;  // points x 2, non-negative (left, right) in level strides
  std::vector<DensePoint> points;
  double duration_s = 0.0;
};

/// Shared classification and localization heads over every pyramid level.
DenseOutputs predict_moments(num::Graph& g, const FusionConfig& cfg, const PyramidFeatures& pyr);

/// Dense outputs detached from any graph, as consumed by decoding.
struct DenseValues {
  num::Tensor logits;
  num::Tensor offsets;
  std::vector<DensePoint> points;
  double duration_s = 0.0;
};

DenseValues values_of(const DenseOutputs& d);

}  // namespace vilco::xm
