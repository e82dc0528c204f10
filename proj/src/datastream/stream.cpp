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

#include "vilco/datastream/stream.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "vilco/datastream/features.hpp"
#include "vilco/error.hpp"

namespace vilco::data {

SubsetMap contiguous_subsets(std::size_t num_keys, std::size_t num_subsets) {
  if (num_subsets == 0) throw ConfigError("num_subsets must be >= 1");
  const std::size_t per = (num_keys + num_subsets - 1) / num_subsets;
  SubsetMap map(num_keys);
  for (std::size_t k = 0; k < num_keys; ++k) map[k] = static_cast<int>(k / std::max<std::size_t>(per, 1));
  return map;
}

std::size_t num_query_keys(const Manifest& m) {
  return m.kind == TaskKind::MQ ? m.vocabulary.size() : static_cast<std::size_t>(kNumNlqTemplates);
}

std::vector<int> query_keys(const QueryRecord& q) {
  if (q.kind == TaskKind::MQ) return q.categories;
  return {q.template_id - 1};
}

PartitionResult partition_videos(const Manifest& manifest, std::size_t num_subsets) {
  const std::size_t keys = num_query_keys(manifest);
  if (manifest.kind == TaskKind::NLQ) return partition_videos(manifest, contiguous_subsets(keys, keys));
  return partition_videos(manifest, contiguous_subsets(keys, num_subsets));
}

PartitionResult partition_videos(const Manifest& manifest, const SubsetMap& subsets) {
  if (manifest.videos.empty()) throw ConfigError("partition_videos: empty manifest");
  std::vector<std::size_t> freq(subsets.size(), 0);
  for (const auto& v : manifest.videos) {
    for (const auto& q : v.queries) {
      for (int k : query_keys(q)) {
        if (k < 0 || static_cast<std::size_t>(k) >= subsets.size()) {
          throw ConfigError("query '" + q.query_id + "' has key outside the subset map");
        }
        ++freq[static_cast<std::size_t>(k)];
      }
    }
  }

  PartitionResult result;
  result.manifest = manifest;
  for (auto& v : result.manifest.videos) {
    int best_key = -1;
    std::set<int> touched;
    for (const auto& q : v.queries) {
      for (int k : query_keys(q)) {
        touched.insert(subsets[static_cast<std::size_t>(k)]);
        const auto fk = freq[static_cast<std::size_t>(k)];
        if (best_key < 0 || fk > freq[static_cast<std::size_t>(best_key)] ||
            (fk == freq[static_cast<std::size_t>(best_key)] && k < best_key)) {
          best_key = k;
        }
      }
    }
    const int subset = best_key < 0 ? 0 : subsets[static_cast<std::size_t>(best_key)];
    result.assignment[v.video_id] = subset;
    if (touched.size() <= 1) continue;
    std::vector<QueryRecord> kept;
    for (auto& q : v.queries) {
      const auto ks = query_keys(q);
      const bool inside = std::all_of(ks.begin(), ks.end(), [&](int k) {
        return subsets[static_cast<std::size_t>(k)] == subset;
      });
      if (inside) {
        kept.push_back(std::move(q));
      } else {
        result.dropped_query_ids.push_back(q.query_id);
      }
    }
    v.queries = std::move(kept);
  }
  return result;
}

std::vector<std::size_t> task_order(std::size_t n, std::uint64_t order_seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (order_seed == 0) return order;
  std::mt19937_64 rng(order_seed);
  // Fisher-Yates with an explicit draw so the order is identical across standard libraries.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

TaskStream build_task_stream(const Manifest& manifest, TaskKind kind, const StreamOptions& opts) {
  if (manifest.kind != kind) throw ConfigError("manifest task kind differs from requested kind");
  std::vector<SubTask> tasks;
  SubsetMap subsets;
  if (kind == TaskKind::MQ) {
    const std::size_t c = manifest.vocabulary.size();
    if (opts.num_tasks == 0 || c < opts.num_tasks) {
      throw ConfigError("cannot split " + std::to_string(c) + " categories into " +
                        std::to_string(opts.num_tasks) + " tasks");
    }
    subsets = contiguous_subsets(c, opts.num_tasks);
    const int used = subsets.back() + 1;
    if (static_cast<std::size_t>(used) != opts.num_tasks) {
      throw ConfigError("category count " + std::to_string(c) + " not partitionable into " +
                        std::to_string(opts.num_tasks) + " non-empty tasks");
    }
    tasks.resize(opts.num_tasks);
    for (std::size_t k = 0; k < c; ++k) tasks[static_cast<std::size_t>(subsets[k])].vocabulary.push_back(static_cast<int>(k));
  } else {
    subsets = contiguous_subsets(kNumNlqTemplates, kNumNlqTemplates);
    std::set<int> present;
    for (const auto& v : manifest.videos)
      for (const auto& q : v.queries) present.insert(q.template_id);
    if (present.empty()) throw ConfigError("NLQ manifest has no queries");
    tasks.resize(kNumNlqTemplates);
    for (int t = 1; t <= kNumNlqTemplates; ++t) tasks[static_cast<std::size_t>(t - 1)].vocabulary = {t};
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) tasks[i].index = static_cast<int>(i);

  for (const auto& v : manifest.videos) {
    std::set<int> touched;
    for (const auto& q : v.queries)
      for (int k : query_keys(q)) touched.insert(subsets[static_cast<std::size_t>(k)]);
    if (touched.size() > 1) {
      throw ConfigError("video '" + v.video_id + "' spans several subsets; partition first");
    }
    if (touched.empty()) continue;
    auto& task = tasks[static_cast<std::size_t>(*touched.begin())];
    auto& bucket = v.split == "val" ? task.val : task.train;
    for (const auto& q : v.queries) bucket.push_back({v.video_id, q});
  }

  if (kind == TaskKind::NLQ) {
    std::erase_if(tasks, [](const SubTask& t) { return t.train.empty() && t.val.empty(); });
  }

  TaskStream stream;
  stream.kind = kind;
  stream.order_seed = opts.order_seed;
  for (std::size_t i : task_order(tasks.size(), opts.order_seed)) stream.tasks.push_back(tasks[i]);
  return stream;
}

}  // namespace vilco::data
