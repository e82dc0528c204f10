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

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vilco/datastream/types.hpp"

namespace vilco::data {

/// VLCF layout, all little-endian:
///   "VLCF" | version u32 | T u32 | D u32 | clip_stride_s f32 | T*D f32 payload
inline constexpr char kFeatureMagic[4] = {'V', 'L', 'C', 'F'};
inline constexpr std::uint32_t kFeatureVersion = 1;

std::vector<char> encode_features(const FeatureSequence& seq);
FeatureSequence decode_features(std::span<const char> bytes, std::string video_id = {});

/// Writes atomically (temp file then rename). Values are stored as f32.
void save_features(const std::filesystem::path& path, const FeatureSequence& seq);
/// The video id defaults to the file stem.
FeatureSequence load_features(const std::filesystem::path& path);

/// Channel-wise concatenation; inputs must agree on T and stride.
FeatureSequence concat_features(const std::vector<FeatureSequence>& seqs);

/// The 13 NLQ query templates, indexed 1..13.
const std::string& nlq_template(int template_id);
inline constexpr int kNumNlqTemplates = 13;

}  // namespace vilco::data
