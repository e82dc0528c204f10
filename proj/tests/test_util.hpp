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

#include <doctest.h>

#include <filesystem>
#include <set>
#include <string>

#include "vilco/datastream/stream.hpp"
#include "vilco/datastream/types.hpp"

namespace test_util {

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("vilco_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Disjoint vocabularies, one task per video, vocabulary union covers keys.
inline void check_stream_invariants(const vilco::data::TaskStream& s,
                                    const vilco::data::Manifest& m) {
  std::set<int> all;
  std::map<std::string, int> owner;
  for (const auto& t : s.tasks) {
    for (int k : t.vocabulary) {
      CHECK(all.insert(k).second);
    }
    for (const auto* items : {&t.train, &t.val}) {
      for (const auto& it : *items) {
        auto [pos, inserted] = owner.emplace(it.video_id, t.index);
        CHECK(pos->second == t.index);
        for (int k : it.query.kind == vilco::data::TaskKind::MQ
                         ? it.query.categories
                         : std::vector<int>{it.query.template_id}) {
          CHECK(std::find(t.vocabulary.begin(), t.vocabulary.end(), k) != t.vocabulary.end());
        }
      }
    }
  }
  if (m.kind == vilco::data::TaskKind::MQ) CHECK(all.size() == m.vocabulary.size());
}

}  // namespace test_util
