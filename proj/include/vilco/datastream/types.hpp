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

#include "vilco/numkit/tensor.hpp"

namespace vilco::data {

enum class TaskKind { MQ, NLQ };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& s);

/// Closed-open temporal interval in seconds.
struct Window {
  double start_s = 0.0;
  double end_s = 0.0;

  double length() const { return end_s - start_s; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// Clip features for one video: T rows of D channels, one row per stride.
struct FeatureSequence {
  std::string video_id;
  double clip_stride_s = 1.0;
  num::Tensor data;  // T x D

  std::size_t length() const { return data.rows(); }
  std::size_t dim() const { return data.cols(); }
  double duration() const { return static_cast<double>(length()) * clip_stride_s; }
};

/// A narration embedding tied to the span it describes.
struct Narration {
  Window span;
  std::vector<double> embedding;
  friend bool operator==(const Narration&, const Narration&) = default;
};

struct QueryRecord {
  std::string query_id;
  TaskKind kind = TaskKind::MQ;
  std::vector<int> categories;  // MQ
  std::string text;             // NLQ
  int template_id = 0;          // NLQ, 1..13
  std::vector<Window> windows;
  /// Precomputed text-encoder output; one token per category for MQ, one for NLQ.
  std::vector<std::vector<double>> query_tokens;
  std::vector<Narration> narrations;

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct VideoEntry {
  std::string video_id;
  double duration_s = 0.0;
  std::string split = "train";             // "train" | "val"
  std::vector<std::string> feature_paths;  // one per feature set, concatenated on load
  std::vector<QueryRecord> queries;

  friend bool operator==(const VideoEntry&, const VideoEntry&) = default;
};

struct Manifest {
  TaskKind kind = TaskKind::MQ;
  std::vector<std::string> vocabulary;  // MQ categories; NLQ uses template ids
  std::vector<VideoEntry> videos;
  /// Features held in memory keyed by video id (synthetic data, or after load_all_features).
  std::map<std::string, FeatureSequence> features;

  const VideoEntry* find_video(const std::string& id) const;
};

/// One training or evaluation example: a query against a video.
struct TaskItem {
  std::string video_id;
  QueryRecord query;
};

struct SubTask {
  int index = 0;                // position in the canonical (unpermuted) order
  std::vector<int> vocabulary;  // category ids (MQ) or template ids (NLQ)
  std::vector<TaskItem> train;
  std::vector<TaskItem> val;
};

struct TaskStream {
  TaskKind kind = TaskKind::MQ;
  std::vector<SubTask> tasks;
  std::uint64_t order_seed = 0;
};

}  // namespace vilco::data
