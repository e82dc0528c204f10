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

#include <json.hpp>

#include "vilco/datastream/types.hpp"

namespace vilco::data {

inline constexpr int kManifestSchemaVersion = 1;

nlohmann::json query_to_json(const QueryRecord& q);
QueryRecord query_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const Manifest& m);
/// Parses and validates structure: windows ordered and inside the video,
/// categories inside the vocabulary, template ids in 1..13.
Manifest manifest_from_json(const nlohmann::json& j);

/// Loads manifest.json. Relative feature paths resolve against its directory
/// and must exist. Features are not read until load_all_features().
Manifest load_manifest(const std::filesystem::path& path);

/// Writes manifest.json plus one VLCF file per in-memory feature sequence
/// under `dir/features/`.
void save_manifest(const std::filesystem::path& dir, Manifest m);

/// Reads (and concatenates, for multiple feature sets) every video's
/// features into `m.features`, checking duration within one stride.
void load_all_features(Manifest& m);

/// Checks the invariants relating features to annotations.
void validate_manifest(const Manifest& m);

}  // namespace vilco::data
