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

#include "vilco/datastream/manifest.hpp"

#include <cmath>
#include <fstream>

#include "vilco/datastream/features.hpp"
#include "vilco/error.hpp"
#include "vilco/io.hpp"

namespace vilco::data {

using nlohmann::json;

namespace {

void validate_query(const QueryRecord& q, const VideoEntry& v, std::size_t vocab_size) {
  const std::string where = "query '" + q.query_id + "' of video '" + v.video_id + "'";
  for (const auto& w : q.windows) {
    if (!(w.start_s >= 0.0 && w.start_s < w.end_s && w.end_s <= v.duration_s + 1e-9)) {
      throw ConfigError(where + ": window [" + std::to_string(w.start_s) + ", " +
                        std::to_string(w.end_s) + "] outside video");
    }
  }
  if (q.kind == TaskKind::MQ) {
    if (q.categories.empty()) throw ConfigError(where + ": MQ query needs a category");
    for (int c : q.categories) {
      if (c < 0 || static_cast<std::size_t>(c) >= vocab_size) {
        throw ConfigError(where + ": category " + std::to_string(c) + " outside vocabulary");
      }
    }
  } else {
    if (q.template_id < 1 || q.template_id > kNumNlqTemplates) {
      throw ConfigError(where + ": template id out of range");
    }
    if (q.windows.size() != 1) throw ConfigError(where + ": NLQ query needs exactly one window");
  }
  if (q.query_tokens.empty()) throw ConfigError(where + ": no query embedding");
}

}  // namespace

json query_to_json(const QueryRecord& q) {
  json j;
  j["query_id"] = q.query_id;
  j["kind"] = to_string(q.kind);
  j["categories"] = q.categories;
  j["text"] = q.text;
  j["template_id"] = q.template_id;
  json wins = json::array();
  for (const auto& w : q.windows) wins.push_back({w.start_s, w.end_s});
  j["windows"] = wins;
  j["query_tokens"] = q.query_tokens;
  json nar = json::array();
  for (const auto& n : q.narrations) {
    nar.push_back({{"window", {n.span.start_s, n.span.end_s}}, {"embedding", n.embedding}});
  }
  j["narrations"] = nar;
  return j;
}

QueryRecord query_from_json(const json& j) {
  QueryRecord q;
  q.query_id = j.at("query_id").get<std::string>();
  q.kind = task_kind_from_string(j.value("kind", std::string("MQ")));
  q.categories = j.value("categories", std::vector<int>{});
  q.text = j.value("text", std::string{});
  q.template_id = j.value("template_id", 0);
  for (const auto& w : j.at("windows")) q.windows.push_back({w.at(0).get<double>(), w.at(1).get<double>()});
  q.query_tokens = j.at("query_tokens").get<std::vector<std::vector<double>>>();
  if (j.contains("narrations")) {
    for (const auto& n : j.at("narrations")) {
      Narration nr;
      nr.span = {n.at("window").at(0).get<double>(), n.at("window").at(1).get<double>()};
      nr.embedding = n.at("embedding").get<std::vector<double>>();
      q.narrations.push_back(std::move(nr));
    }
  }
  return q;
}

json manifest_to_json(const Manifest& m) {
  json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["task_kind"] = to_string(m.kind);
  j["vocabulary"] = m.vocabulary;
  json vids = json::array();
  for (const auto& v : m.videos) {
    json jv;
    jv["video_id"] = v.video_id;
    jv["duration_s"] = v.duration_s;
    jv["split"] = v.split;
    jv["features"] = v.feature_paths;
    json qs = json::array();
    for (const auto& q : v.queries) qs.push_back(query_to_json(q));
    jv["queries"] = qs;
    vids.push_back(std::move(jv));
  }
  j["videos"] = vids;
  return j;
}

Manifest manifest_from_json(const json& j) {
  try {
    if (j.value("schema_version", kManifestSchemaVersion) != kManifestSchemaVersion) {
      throw ConfigError("unsupported manifest schema version");
    }
    Manifest m;
    m.kind = task_kind_from_string(j.value("task_kind", std::string("MQ")));
    m.vocabulary = j.value("vocabulary", std::vector<std::string>{});
    for (const auto& jv : j.at("videos")) {
      VideoEntry v;
      v.video_id = jv.at("video_id").get<std::string>();
      v.duration_s = jv.at("duration_s").get<double>();
      v.split = jv.value("split", std::string("train"));
      if (v.split != "train" && v.split != "val") {
        throw ConfigError("video '" + v.video_id + "': split must be train or val");
      }
      v.feature_paths = jv.value("features", std::vector<std::string>{});
      for (const auto& jq : jv.value("queries", json::array())) {
        v.queries.push_back(query_from_json(jq));
      }
      m.videos.push_back(std::move(v));
    }
    validate_manifest(m);
    return m;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

void validate_manifest(const Manifest& m) {
  std::map<std::string, int> seen;
  for (const auto& v : m.videos) {
    if (++seen[v.video_id] > 1) throw ConfigError("duplicate video id '" + v.video_id + "'");
    if (!(v.duration_s > 0)) throw ConfigError("video '" + v.video_id + "': duration must be > 0");
    for (const auto& q : v.queries) validate_query(q, v, m.vocabulary.size());
    auto it = m.features.find(v.video_id);
    if (it != m.features.end()) {
      const auto& f = it->second;
      if (std::abs(f.duration() - v.duration_s) > f.clip_stride_s + 1e-9) {
        throw ConfigError("video '" + v.video_id + "': feature duration " +
                          std::to_string(f.duration()) + " s disagrees with manifest " +
                          std::to_string(v.duration_s) + " s");
      }
    }
  }
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  Manifest m = manifest_from_json(j);
  const auto base = path.parent_path();
  for (auto& v : m.videos) {
    for (auto& p : v.feature_paths) {
      std::filesystem::path fp(p);
      if (fp.is_relative()) fp = base / fp;
      if (!std::filesystem::exists(fp)) {
        throw ConfigError("video '" + v.video_id + "': feature file " + fp.string() + " missing");
      }
      p = fp.string();
    }
  }
  return m;
}

void save_manifest(const std::filesystem::path& dir, Manifest m) {
  std::filesystem::create_directories(dir / "features");
  for (auto& v : m.videos) {
    auto it = m.features.find(v.video_id);
    if (it == m.features.end()) continue;
    const std::string rel = "features/" + v.video_id + ".vlcf";
    save_features(dir / rel, it->second);
    v.feature_paths = {rel};
  }
  const auto target = dir / "manifest.json";
  write_file_atomic(target, manifest_to_json(m).dump(1));
}

void load_all_features(Manifest& m) {
  for (const auto& v : m.videos) {
    if (m.features.count(v.video_id)) continue;
    if (v.feature_paths.empty()) throw ConfigError("video '" + v.video_id + "' has no features");
    std::vector<FeatureSequence> parts;
    for (const auto& p : v.feature_paths) parts.push_back(load_features(p));
    FeatureSequence f = concat_features(parts);
    f.video_id = v.video_id;
    m.features.emplace(v.video_id, std::move(f));
  }
  validate_manifest(m);
}

}  // namespace vilco::data
