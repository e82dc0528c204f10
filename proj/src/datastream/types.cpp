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

#include "vilco/datastream/types.hpp"

#include "vilco/error.hpp"

namespace vilco::data {

std::string to_string(TaskKind kind) { return kind == TaskKind::MQ ? "MQ" : "NLQ"; }

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "MQ" || s == "mq") return TaskKind::MQ;
  if (s == "NLQ" || s == "nlq") return TaskKind::NLQ;
  throw ConfigError("unknown task kind '" + s + "'");
}

const VideoEntry* Manifest::find_video(const std::string& id) const {
  for (const auto& v : videos)
    if (v.video_id == id) return &v;
  return nullptr;
}

}  // namespace vilco::data
