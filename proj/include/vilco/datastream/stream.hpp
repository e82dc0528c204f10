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
#include <map>
#include <string>
#include <vector>

#include "vilco/datastream/types.hpp"

namespace vilco::data {

/// Maps a query key (category id for MQ, template id - 1 for NLQ) to a subset.
using SubsetMap = std::vector<int>;

/// Contiguous blocks of ceil(num_keys / num_subsets) keys.
SubsetMap contiguous_subsets(std::size_t num_keys, std::size_t num_subsets);

/// Number of keys used by the manifest: vocabulary size (MQ) or 13 (NLQ).
std::size_t num_query_keys(const Manifest& m);
/// Query keys of one record.
std::vector<int> query_keys(const QueryRecord& q);

struct PartitionResult {
  std::map<std::string, int> assignment;  // video id -> subset
  std::vector<std::string> dropped_query_ids;
  Manifest manifest;  // input with cross-subset queries removed
};

/// Assigns every video to exactly one subset. A video whose queries span
/// several subsets follows its most frequent query key (global record count,
/// ties to the lower key); queries touching any other subset are dropped.
PartitionResult partition_videos(const Manifest& manifest, std::size_t num_subsets);
PartitionResult partition_videos(const Manifest& manifest, const SubsetMap& subsets);

struct StreamOptions {
  std::size_t num_tasks = 5;  // MQ only; NLQ uses one task per template present
  std::uint64_t order_seed = 0;
};

/// Builds the ordered sub-task list from a partitioned manifest. order_seed 0
/// keeps the canonical order; any other seed applies a seeded shuffle.
TaskStream build_task_stream(const Manifest& manifest, TaskKind kind, const StreamOptions& opts);

/// The permutation of task indices used for `order_seed` over `n` tasks.
std::vector<std::size_t> task_order(std::size_t n, std::uint64_t order_seed);

}  // namespace vilco::data
