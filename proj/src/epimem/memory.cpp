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

#include "vilco/epimem/memory.hpp"

#include <algorithm>
#include <sstream>

#include "vilco/error.hpp"

namespace vilco::mem {

ShortTermMemory::ShortTermMemory(std::size_t capacity, std::uint64_t seed, double held_out_fraction)
    : capacity_(capacity), held_out_fraction_(held_out_fraction), rng_(seed) {
  if (!(held_out_fraction >= 0.0 && held_out_fraction < 1.0)) {
    throw ConfigError("held-out fraction must lie in [0, 1)");
  }
}

std::size_t ShortTermMemory::size() const {
  std::size_t n = 0;
  for (const auto& [t, v] : per_task_) n += v.size();
  return n;
}

void ShortTermMemory::begin_task(int task_id) {
  if (current_task_ >= 0 && task_id <= current_task_) {
    throw ConfigError("memory task ids must increase");
  }
  current_task_ = task_id;
  per_task_[task_id];
  offered_[task_id] = 0;
  const std::size_t quota = capacity_ / per_task_.size();
  for (auto& [t, v] : per_task_) {
    while (v.size() > quota) {
      const std::size_t victim = static_cast<std::size_t>(rng_() % v.size());
      v.erase(v.begin() + static_cast<long>(victim));
    }
  }
}

std::size_t ShortTermMemory::quota_for_current() const {
  std::size_t others = 0;
  for (const auto& [t, v] : per_task_)
    if (t != current_task_) others += v.size();
  return capacity_ > others ? capacity_ - others : 0;
}

void ShortTermMemory::store(MemoryEntry entry) {
  if (current_task_ < 0) throw ConfigError("memory: store before begin_task");
  entry.task_id = current_task_;
  entry.id = counter_++;
  if (held_out_fraction_ > 0.0) {
    entry.held_out = static_cast<double>(rng_() % 1000000) < held_out_fraction_ * 1e6;
  }
  auto& slot = per_task_[current_task_];
  const std::uint64_t n = ++offered_[current_task_];
  const std::size_t quota = quota_for_current();
  if (slot.size() < quota) {
    slot.push_back(std::move(entry));
    return;
  }
  if (quota == 0) return;
  const std::uint64_t j = rng_() % n;
  if (j < quota) slot[static_cast<std::size_t>(j)] = std::move(entry);
}

std::vector<const MemoryEntry*> ShortTermMemory::entries() const {
  std::vector<const MemoryEntry*> out;
  for (const auto& [t, v] : per_task_)
    for (const auto& e : v) out.push_back(&e);
  return out;
}

std::vector<const MemoryEntry*> ShortTermMemory::entries_of(int task_id) const {
  std::vector<const MemoryEntry*> out;
  auto it = per_task_.find(task_id);
  if (it != per_task_.end())
    for (const auto& e : it->second) out.push_back(&e);
  return out;
}

namespace {

nlohmann::json entry_to_json(const MemoryEntry& e) {
  return {{"video", e.video_embedding}, {"text", e.text_embedding}, {"task_id", e.task_id},
          {"key", e.key},  {"item_task", e.item.task},  {"item_index", e.item.index},
          {"id", e.id},    {"held_out", e.held_out}};
}

MemoryEntry entry_from_json(const nlohmann::json& j) {
  MemoryEntry e;
  e.video_embedding = j.at("video").get<std::vector<double>>();
  e.text_embedding = j.at("text").get<std::vector<double>>();
  e.task_id = j.at("task_id").get<int>();
  e.key = j.at("key").get<int>();
  e.item = {j.at("item_task").get<std::size_t>(), j.at("item_index").get<std::size_t>()};
  e.id = j.at("id").get<std::uint64_t>();
  e.held_out = j.at("held_out").get<bool>();
  return e;
}

}  // namespace

nlohmann::json ShortTermMemory::to_json() const {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& [t, v] : per_task_) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : v) entries.push_back(entry_to_json(e));
    tasks.push_back({{"task_id", t}, {"offered", offered_.at(t)}, {"entries", entries}});
  }
  return {{"capacity", capacity_}, {"held_out_fraction", held_out_fraction_},
          {"current_task", current_task_}, {"counter", counter_},
          {"rng", rng_state(rng_)},  {"tasks", tasks}};
}

ShortTermMemory ShortTermMemory::from_json(const nlohmann::json& j) {
  ShortTermMemory m(j.at("capacity").get<std::size_t>(), 0, j.at("held_out_fraction").get<double>());
  m.current_task_ = j.at("current_task").get<int>();
  m.counter_ = j.at("counter").get<std::uint64_t>();
  m.rng_ = rng_from_state(j.at("rng").get<std::string>());
  for (const auto& t : j.at("tasks")) {
    const int id = t.at("task_id").get<int>();
    m.offered_[id] = t.at("offered").get<std::uint64_t>();
    auto& v = m.per_task_[id];
    for (const auto& e : t.at("entries")) v.push_back(entry_from_json(e));
  }
  return m;
}

bool operator==(const ShortTermMemory& a, const ShortTermMemory& b) {
  return a.capacity_ == b.capacity_ && a.held_out_fraction_ == b.held_out_fraction_ &&
         a.per_task_ == b.per_task_ && a.offered_ == b.offered_ &&
         a.current_task_ == b.current_task_ && a.counter_ == b.counter_ && a.rng_ == b.rng_;
}

std::vector<const MemoryEntry*> st_sample_negatives(const ShortTermMemory& memory, std::size_t count,
                                                    const std::set<std::uint64_t>& exclude,
                                                    num::Rng& rng,
                                                    const std::function<bool(const MemoryEntry&)>& keep) {
  std::vector<const MemoryEntry*> pool;
  for (const auto* e : memory.entries()) {
    if (exclude.count(e->id) != 0) continue;
    if (keep && !keep(*e)) continue;
    pool.push_back(e);
  }
  if (pool.size() <= count) return pool;
  // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::string rng_state(const num::Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

num::Rng rng_from_state(const std::string& state) {
  num::Rng rng;
  std::istringstream is(state);
  is >> rng;
  if (!is) throw FormatError("malformed RNG state");
  return rng;
}

}  // namespace vilco::mem
