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

#include "vilco/datastream/features.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "vilco/error.hpp"
#include "vilco/io.hpp"

namespace vilco::data {

namespace {

constexpr std::size_t kHeaderBytes = 4 + 4 + 4 + 4 + 4;

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

void put_f32(std::vector<char>& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }
float get_f32(const char* p) { return std::bit_cast<float>(get_u32(p)); }

}  // namespace

std::vector<char> encode_features(const FeatureSequence& seq) {
  const std::size_t t = seq.length(), d = seq.dim();
  if (t == 0 || d == 0) throw FormatError("features must have T >= 1 and D >= 1");
  if (t > std::numeric_limits<std::uint32_t>::max() || d > std::numeric_limits<std::uint32_t>::max()) {
    throw FormatError("feature dimensions exceed u32");
  }
  if (!(seq.clip_stride_s > 0)) throw FormatError("clip stride must be positive");
  std::vector<char> out;
  out.reserve(kHeaderBytes + 4 * t * d);
  for (char ch : kFeatureMagic) out.push_back(ch);
  put_u32(out, kFeatureVersion);
  put_u32(out, static_cast<std::uint32_t>(t));
  put_u32(out, static_cast<std::uint32_t>(d));
  put_f32(out, static_cast<float>(seq.clip_stride_s));
  for (double v : seq.data.data()) put_f32(out, static_cast<float>(v));
  return out;
}

FeatureSequence decode_features(std::span<const char> bytes, std::string video_id) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kFeatureMagic, 4) != 0) {
    throw FormatError("bad magic: not a VLCF feature file");
  }
  if (bytes.size() < kHeaderBytes) throw FormatError("truncated header");
  const char* p = bytes.data();
  const std::uint32_t version = get_u32(p + 4);
  if (version != kFeatureVersion) {
    throw FormatError("unsupported VLCF version " + std::to_string(version));
  }
  const std::uint64_t t = get_u32(p + 8);
  const std::uint64_t d = get_u32(p + 12);
  const double stride = get_f32(p + 16);
  if (t == 0 || d == 0) throw FormatError("VLCF header has zero extent");
  const std::uint64_t count = t * d;  // both < 2^32, so this cannot wrap
  if (count > std::numeric_limits<std::size_t>::max() / 4 ||
      count > (std::uint64_t{1} << 34)) {
    throw FormatError("dimension overflow: T*D = " + std::to_string(count));
  }
  if (!(stride > 0) || !std::isfinite(stride)) throw FormatError("non-positive clip stride");
  const std::size_t payload = bytes.size() - kHeaderBytes;
  if (payload < count * 4) {
    throw FormatError("truncated payload: header declares " + std::to_string(count) +
                      " values, file holds " + std::to_string(payload / 4));
  }
  if (payload != count * 4) throw FormatError("trailing bytes after VLCF payload");
  FeatureSequence seq;
  seq.video_id = std::move(video_id);
  seq.clip_stride_s = stride;
  seq.data = num::Tensor(num::Shape{static_cast<std::size_t>(t), static_cast<std::size_t>(d)});
  const char* q = p + kHeaderBytes;
  for (std::size_t i = 0; i < count; ++i) seq.data[i] = get_f32(q + 4 * i);
  return seq;
}

void save_features(const std::filesystem::path& path, const FeatureSequence& seq) {
  const auto bytes = encode_features(seq);
  write_file_atomic(path, std::string_view(bytes.data(), bytes.size()));
}

FeatureSequence load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open feature file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_features(bytes, path.stem().string());
}

FeatureSequence concat_features(const std::vector<FeatureSequence>& seqs) {
  if (seqs.empty()) throw ShapeError("concat_features: no inputs");
  const std::size_t t = seqs.front().length();
  std::size_t total = 0;
  for (const auto& s : seqs) {
    if (s.length() != t) {
      throw ShapeError("concat_features: mismatched T (" + std::to_string(t) + " vs " +
                       std::to_string(s.length()) + ")");
    }
    if (s.clip_stride_s != seqs.front().clip_stride_s) {
      throw ShapeError("concat_features: mismatched clip stride");
    }
    total += s.dim();
  }
  FeatureSequence out;
  out.video_id = seqs.front().video_id;
  out.clip_stride_s = seqs.front().clip_stride_s;
  out.data = num::Tensor(num::Shape{t, total});
  std::size_t col = 0;
  for (const auto& s : seqs) {
    for (std::size_t r = 0; r < t; ++r)
      for (std::size_t c = 0; c < s.dim(); ++c) out.data.at(r, col + c) = s.data.at(r, c);
    col += s.dim();
  }
  return out;
}

const std::string& nlq_template(int template_id) {
  static const std::array<std::string, kNumNlqTemplates> kTemplates = {
      "Objects: What did I put in X?",
      "Place: Where did I put X?",
      "Objects: Where is object X before/after event Y?",
      "People: When did I talk to or interact with person with role X?",
      "Objects: How many X's? (quantity question)",
      "Objects: State of an object",
      "Objects: Where is object X",
      "Objects: In what location did I see object X ?",
      "Objects: What X did I Y?",
      "Objects: What X is Y?",
      "Objects: Where is my object X?",
      "People: Who did I interact with when I did activity X?",
      "People: Who did I talk to in location X?",
  };
  if (template_id < 1 || template_id > kNumNlqTemplates) {
    throw ConfigError("NLQ template id out of range: " + std::to_string(template_id));
  }
  return kTemplates[static_cast<std::size_t>(template_id - 1)];
}

}  // namespace vilco::data
