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
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "vilco/numkit/param_set.hpp"

namespace vilco::mem {

/// Points at a training item of the task stream: stream.tasks[task].train[index].
struct ItemRef {
  std::size_t task = 0;
  std::size_t index = 0;
  friend bool operator==(const ItemRef&, const ItemRef&) = default;
  friend auto operator<=>(const ItemRef&, const ItemRef&) = default;
};

struct MemoryEntry {
  std::vector<double> video_embedding;  // model space
  std::vector<double> text_embedding;   // model space; empty if the item had no narration
  int task_id = 0;                      // position in the training order
  int key = 0;                          // category or template id
  ItemRef item;
  std::uint64_t id = 0;                 // insertion counter value
  bool held_out = false;                // reserved for bias-correction validation

  friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

/// Bounded buffer with a per-task quota. Within a task, entries are kept by
/// reservoir sampling; when a new task begins, every earlier task is trimmed
/// to floor(capacity / tasks_seen) by uniform random eviction.
///
/// Random draws use `rng() % n` so the sequence is reproducible across
/// standard libraries.
class ShortTermMemory {
 public:
  ShortTermMemory() = default;
  ShortTermMemory(std::size_t capacity, std::uint64_t seed, double held_out_fraction = 0.0);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  std::size_t tasks_seen() const { return per_task_.size(); }
  std::uint64_t insertions() const { return counter_; }

  /// Opens a new task and rebalances quotas. Task ids must increase.
  void begin_task(int task_id);
  /// Offers one entry of the current task to the reservoir.
  void store(MemoryEntry entry);

  /// All entries, grouped by task id, in slot order.
  std::vector<const MemoryEntry*> entries() const;
  std::vector<const MemoryEntry*> entries_of(int task_id) const;

  num::Rng& rng() { return rng_; }

  nlohmann::json to_json() const;
  static ShortTermMemory from_json(const nlohmann::json& j);

  friend bool operator==(const ShortTermMemory&, const ShortTermMemory&);

 private:
  std::size_t quota_for_current() const;

  std::size_t capacity_ = 0;
  double held_out_fraction_ = 0.0;
  std::map<int, std::vector<MemoryEntry>> per_task_;
  std::map<int, std::uint64_t> offered_;  // entries offered per task
  int current_task_ = -1;
  std::uint64_t counter_ = 0;
  num::Rng rng_;
};

/// Uniform sample without replacement of up to `count` entries, skipping ids in
/// `exclude` and any entry for which `keep` returns false. Returns every
/// eligible entry (in stored order) when fewer than `count` qualify.
std::vector<const MemoryEntry*> st_sample_negatives(
    const ShortTermMemory& memory, std::size_t count, const std::set<std::uint64_t>& exclude,
    num::Rng& rng, const std::function<bool(const MemoryEntry&)>& keep = {});

std::string rng_state(const num::Rng& rng);
num::Rng rng_from_state(const std::string& state);

}  // namespace vilco::mem
