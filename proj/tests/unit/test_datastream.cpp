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

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <random>
#include <set>

#include "vilco/datastream/features.hpp"
#include "vilco/datastream/manifest.hpp"
#include "vilco/datastream/stream.hpp"
#include "vilco/datastream/synth.hpp"
#include "vilco/error.hpp"
#include "test_util.hpp"

using namespace vilco;
using namespace vilco::data;

namespace {

FeatureSequence random_features(std::size_t t, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist(0.0f, 3.0f);
  FeatureSequence f;
  f.video_id = "v";
  f.clip_stride_s = 0.5333;
  f.data = num::Tensor(num::Shape{t, d});
  for (auto& x : f.data.data()) x = static_cast<double>(dist(rng));
  f.clip_stride_s = static_cast<double>(static_cast<float>(f.clip_stride_s));
  return f;
}

QueryRecord mq_query(const std::string& id, int cat, Window w) {
  QueryRecord q;
  q.query_id = id;
  q.kind = TaskKind::MQ;
  q.categories = {cat};
  q.windows = {w};
  q.query_tokens = {{1.0, 0.0}};
  return q;
}

// Four categories, two subsets {0,1} and {2,3}.
Manifest conflict_fixture() {
  Manifest m;
  m.kind = TaskKind::MQ;
  m.vocabulary = {"a", "b", "c", "d"};
  auto add_video = [&](const std::string& id, std::vector<int> cats) {
    VideoEntry v;
    v.video_id = id;
    v.duration_s = 10;
    int k = 0;
    for (int c : cats) v.queries.push_back(mq_query(id + "_" + std::to_string(k++), c, {1, 2}));
    m.videos.push_back(v);
  };
  // Category 0 appears 5 times, category 2 twice.
  add_video("x", {0, 2});
  add_video("a1", {0});
  add_video("a2", {0, 1});
  add_video("a3", {0});
  add_video("a4", {0});
  add_video("b1", {2, 3});
  return m;
}

}  // namespace

TEST_CASE("feature files round-trip bit-exactly") {
  auto dir = test_util::temp_dir("features");
  const auto f = random_features(10, 4, 1);
  save_features(dir / "v.vlcf", f);
  const auto g = load_features(dir / "v.vlcf");
  CHECK(g.data == f.data);
  CHECK(g.clip_stride_s == f.clip_stride_s);
  CHECK(g.video_id == "v");
}

TEST_CASE("property: feature round trip over random shapes") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::size_t> dim(1, 40);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = random_features(dim(rng), dim(rng), static_cast<std::uint64_t>(trial));
    const auto bytes = encode_features(f);
    const auto g = decode_features(bytes);
    REQUIRE(g.data.shape() == f.data.shape());
    CHECK(std::memcmp(g.data.data().data(), f.data.data().data(), 8 * f.data.size()) == 0);
    CHECK(encode_features(g) == bytes);
  }
}

TEST_CASE("feature decoding errors") {
  auto bytes = encode_features(random_features(3, 2, 4));
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_features(bytes), doctest::Contains("bad magic"), FormatError);
  }
  SUBCASE("truncated payload") {
    bytes.resize(bytes.size() - 4);
    CHECK_THROWS_WITH_AS(decode_features(bytes), doctest::Contains("truncated"), FormatError);
  }
  SUBCASE("dimension overflow") {
    for (int i = 8; i < 16; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>(0xFF);
    CHECK_THROWS_WITH_AS(decode_features(bytes), doctest::Contains("overflow"), FormatError);
  }
  SUBCASE("header larger than payload") {
    bytes[8] = 9;  // T = 9 instead of 3
    CHECK_THROWS_AS(decode_features(bytes), FormatError);
  }
}

TEST_CASE("concat_features") {
  const auto a = random_features(10, 4, 1);
  const auto b = random_features(10, 6, 2);
  const auto c = concat_features({a, b});
  CHECK(c.length() == 10);
  CHECK(c.dim() == 10);
  CHECK(c.data.at(3, 2) == a.data.at(3, 2));
  CHECK(c.data.at(3, 4 + 5) == b.data.at(3, 5));
  CHECK(concat_features({a}).data == a.data);
  CHECK_THROWS_AS(concat_features({a, random_features(12, 4, 3)}), ShapeError);
}

TEST_CASE("NLQ templates") {
  CHECK(nlq_template(1) == "Objects: What did I put in X?");
  CHECK(nlq_template(13) == "People: Who did I talk to in location X?");
  CHECK_THROWS_AS(nlq_template(0), ConfigError);
  CHECK_THROWS_AS(nlq_template(14), ConfigError);
}

TEST_CASE("partition_videos") {
  const Manifest m = conflict_fixture();
  SUBCASE("frequency priority resolves conflicts") {
    const auto r = partition_videos(m, 2);
    CHECK(r.assignment.at("x") == 0);
    const auto* x = r.manifest.find_video("x");
    REQUIRE(x->queries.size() == 1);
    CHECK(x->queries[0].categories == std::vector<int>{0});
    CHECK(std::find(r.dropped_query_ids.begin(), r.dropped_query_ids.end(), "x_1") !=
          r.dropped_query_ids.end());
    // Videos that already live in one subset are untouched.
    CHECK(r.assignment.at("a2") == 0);
    CHECK(r.manifest.find_video("a2")->queries.size() == 2);
    CHECK(r.assignment.at("b1") == 1);
    CHECK(r.dropped_query_ids.size() == 1);
  }
  SUBCASE("equal frequency breaks toward the lower category") {
    Manifest t;
    t.vocabulary = {"a", "b", "c", "d"};
    VideoEntry v;
    v.video_id = "tie";
    v.duration_s = 5;
    v.queries = {mq_query("q3", 3, {0, 1}), mq_query("q1", 1, {2, 3})};
    t.videos.push_back(v);
    const auto r = partition_videos(t, 2);
    CHECK(r.assignment.at("tie") == 0);
    CHECK(r.dropped_query_ids == std::vector<std::string>{"q3"});
  }
  SUBCASE("idempotent") {
    const auto once = partition_videos(m, 2);
    const auto twice = partition_videos(once.manifest, 2);
    CHECK(twice.dropped_query_ids.empty());
    CHECK(twice.manifest.videos == once.manifest.videos);
    CHECK(twice.assignment == once.assignment);
  }
  SUBCASE("empty manifest") {
    CHECK_THROWS_AS(partition_videos(Manifest{}, 2), ConfigError);
  }
}

TEST_CASE("build_task_stream") {
  SUBCASE("110 categories -> 5 x 22") {
    Manifest m;
    m.kind = TaskKind::MQ;
    for (int c = 0; c < 110; ++c) {
      m.vocabulary.push_back("c" + std::to_string(c));
      VideoEntry v;
      v.video_id = "v" + std::to_string(c);
      v.duration_s = 10;
      v.queries = {mq_query("q" + std::to_string(c), c, {1, 3})};
      m.videos.push_back(v);
    }
    const auto s = build_task_stream(m, TaskKind::MQ, {.num_tasks = 5, .order_seed = 0});
    REQUIRE(s.tasks.size() == 5);
    for (const auto& t : s.tasks) CHECK(t.vocabulary.size() == 22);
    test_util::check_stream_invariants(s, m);

    const auto s1 = build_task_stream(m, TaskKind::MQ, {.num_tasks = 5, .order_seed = 1});
    std::vector<int> o0, o1;
    for (const auto& t : s.tasks) o0.push_back(t.index);
    for (const auto& t : s1.tasks) o1.push_back(t.index);
    CHECK(o0 != o1);
    std::sort(o1.begin(), o1.end());
    CHECK(o0 == o1);
    for (const auto& t : s1.tasks) {
      CHECK(t.vocabulary == s.tasks[static_cast<std::size_t>(t.index)].vocabulary);
      CHECK(t.train.size() == s.tasks[static_cast<std::size_t>(t.index)].train.size());
    }
    CHECK_THROWS_AS(build_task_stream(m, TaskKind::MQ, {.num_tasks = 111}), ConfigError);
    CHECK_THROWS_AS(build_task_stream(m, TaskKind::NLQ, {}), ConfigError);
  }
  SUBCASE("NLQ with all templates -> 13 tasks") {
    SynthConfig cfg;
    cfg.kind = TaskKind::NLQ;
    cfg.num_tasks = 13;
    cfg.cats_per_task = 2;
    cfg.videos_per_task = 2;
    cfg.video_dim = 32;
    const auto d = synthesize_stream(cfg);
    CHECK(d.stream.tasks.size() == 13);
    for (const auto& t : d.stream.tasks) {
      REQUIRE(t.vocabulary.size() == 1);
      for (const auto& it : t.train) CHECK(it.query.template_id == t.vocabulary[0]);
    }
  }
  SUBCASE("unpartitioned manifest rejected") {
    CHECK_THROWS_AS(build_task_stream(conflict_fixture(), TaskKind::MQ, {.num_tasks = 2}),
                    ConfigError);
  }
}

TEST_CASE("synthesize_stream") {
  SynthConfig cfg;
  cfg.cats_per_task = 4;
  cfg.video_dim = 24;
  cfg.seed = 42;
  SUBCASE("deterministic") {
    const auto a = synthesize_stream(cfg);
    const auto b = synthesize_stream(cfg);
    CHECK(manifest_to_json(a.manifest) == manifest_to_json(b.manifest));
    for (const auto& [id, f] : a.manifest.features) CHECK(b.manifest.features.at(id).data == f.data);
  }
  SUBCASE("video count") {
    cfg.num_tasks = 5;
    cfg.videos_per_task = 20;
    CHECK(synthesize_stream(cfg).manifest.videos.size() == 100);
  }
  SUBCASE("noise-free windows are recovered by a matched filter") {
    cfg.noise_sigma = 0.0;
    const auto d = synthesize_stream(cfg);
    for (const auto& v : d.manifest.videos) {
      const auto& f = d.manifest.features.at(v.video_id);
      // Per step: nearest prototype by cosine, background if below 0.9.
      std::vector<int> label(f.length(), -1);
      for (std::size_t t = 0; t < f.length(); ++t) {
        double norm = 0;
        for (std::size_t j = 0; j < f.dim(); ++j) norm += f.data.at(t, j) * f.data.at(t, j);
        norm = std::sqrt(norm);
        for (std::size_t c = 0; c < d.video_prototypes.rows(); ++c) {
          double dot = 0;
          for (std::size_t j = 0; j < f.dim(); ++j) dot += f.data.at(t, j) * d.video_prototypes.at(c, j);
          if (dot / norm > 0.9) label[t] = static_cast<int>(c);
        }
      }
      std::set<std::pair<int, std::pair<double, double>>> recovered, truth;
      for (std::size_t t = 0; t < label.size();) {
        if (label[t] < 0) { ++t; continue; }
        std::size_t e = t;
        while (e < label.size() && label[e] == label[t]) ++e;
        recovered.insert({label[t], {static_cast<double>(t), static_cast<double>(e)}});
        t = e;
      }
      for (const auto& q : v.queries)
        for (const auto& w : q.windows) truth.insert({q.categories[0], {w.start_s, w.end_s}});
      CHECK(recovered == truth);
    }
  }
  SUBCASE("orthogonal prototypes need enough dimensions") {
    cfg.video_dim = 10;
    CHECK_THROWS_AS(synthesize_stream(cfg), ConfigError);
  }
  SUBCASE("distractors exercise cross-subset dropping") {
    cfg.distractor_prob = 1.0;
    const auto d = synthesize_stream(cfg);
    CHECK(!d.dropped_query_ids.empty());
    test_util::check_stream_invariants(d.stream, d.manifest);
  }
}

TEST_CASE("manifest save/load round trip") {
  SynthConfig cfg;
  cfg.num_tasks = 2;
  cfg.cats_per_task = 3;
  cfg.videos_per_task = 3;
  cfg.video_dim = 8;
  const auto d = synthesize_stream(cfg);
  auto dir = test_util::temp_dir("manifest");
  save_manifest(dir, d.manifest);
  Manifest loaded = load_manifest(dir / "manifest.json");
  load_all_features(loaded);
  REQUIRE(loaded.videos.size() == d.manifest.videos.size());
  for (std::size_t i = 0; i < loaded.videos.size(); ++i) {
    CHECK(loaded.videos[i].queries == d.manifest.videos[i].queries);
    CHECK(loaded.features.at(loaded.videos[i].video_id).data ==
          d.manifest.features.at(loaded.videos[i].video_id).data);
  }

  auto j = manifest_to_json(d.manifest);
  j["videos"][0]["queries"][0]["categories"] = {99};
  CHECK_THROWS_AS(manifest_from_json(j), ConfigError);
  j = manifest_to_json(d.manifest);
  j["videos"][0]["queries"][0]["windows"] = {{5.0, 2.0}};
  CHECK_THROWS_AS(manifest_from_json(j), ConfigError);

  Manifest bad = d.manifest;
  bad.videos[0].duration_s += 10;
  CHECK_THROWS_AS(validate_manifest(bad), ConfigError);
}
