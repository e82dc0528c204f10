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

#include "vilco/sslalign/ssl.hpp"

#include <numeric>

#include "vilco/error.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::ssl {

namespace {

num::Var concat_cols(num::Var a, num::Var b) {
  return num::transpose(num::concat_rows({num::transpose(a), num::transpose(b)}));
}

// logits = [a * b^T | a * extra^T] / tau, all rows pre-normalized.
num::Var direction_logits(num::Var a, num::Var b, const num::Tensor& extra, double tau) {
  num::Var s = num::matmul_nt(a, b);
  if (extra.rows() > 0) {
    num::Var e = num::l2_normalize_rows(a.graph->constant(extra));
    s = concat_cols(s, num::matmul_nt(a, e));
  }
  return tau == 1.0 ? s : num::scale(s, 1.0 / tau);
}

}  // namespace

SslLoss ssl_loss(const AlignmentBatch& batch) {
  if (!(batch.temperature > 0.0)) throw ConfigError("ssl temperature must be > 0");
  const auto& v = batch.videos.value();
  const auto& t = batch.texts.value();
  if (v.rows() == 0 || v.rows() != t.rows() || v.cols() != t.cols()) {
    throw ShapeError("alignment batch needs B >= 1 matching video and text rows");
  }
  if (batch.negative_videos.rows() != batch.negative_texts.rows()) {
    throw ShapeError("negative videos and texts differ in count");
  }
  const std::size_t b = v.rows();
  std::vector<std::size_t> diag(b);
  std::iota(diag.begin(), diag.end(), 0);

  num::Var vn = num::l2_normalize_rows(batch.videos);
  num::Var tn = num::l2_normalize_rows(batch.texts);
  SslLoss out;
  out.v2t = num::cross_entropy_rows(direction_logits(vn, tn, batch.negative_texts, batch.temperature), diag);
  out.t2v = num::cross_entropy_rows(direction_logits(tn, vn, batch.negative_videos, batch.temperature), diag);
  out.total = num::add(out.v2t, out.t2v);
  return out;
}

AlignmentBatch build_alignment_batch(const std::vector<CurrentPair>& current,
                                     const mem::ShortTermMemory& memory, std::size_t negatives,
                                     int current_task, num::Rng& rng, double temperature) {
  AlignmentBatch batch;
  batch.temperature = temperature;
  std::vector<num::Var> vids, texts;
  std::set<std::uint64_t> exclude;
  for (const auto& p : current) {
    if (!p.text) {
      ++batch.skipped;
      continue;
    }
    vids.push_back(p.video);
    texts.push_back(*p.text);
    if (p.memory_id != UINT64_MAX) exclude.insert(p.memory_id);
  }
  if (vids.empty()) throw ConfigError("alignment batch has no narrated items");
  batch.videos = num::concat_rows(vids);
  batch.texts = num::concat_rows(texts);
  const std::size_t d = batch.videos.value().cols();

  std::vector<const mem::MemoryEntry*> neg;
  if (negatives > 0 && !memory.empty()) {
    neg = mem::st_sample_negatives(memory, negatives, exclude, rng, [&](const mem::MemoryEntry& e) {
      return e.task_id < current_task && !e.text_embedding.empty();
    });
  }
  batch.negative_videos = num::Tensor(num::Shape{neg.size(), d});
  batch.negative_texts = num::Tensor(num::Shape{neg.size(), d});
  for (std::size_t i = 0; i < neg.size(); ++i) {
    if (neg[i]->video_embedding.size() != d || neg[i]->text_embedding.size() != d) {
      throw ShapeError("memory embedding width differs from the alignment batch");
    }
    std::copy(neg[i]->video_embedding.begin(), neg[i]->video_embedding.end(),
              batch.negative_videos.row(i).begin());
    std::copy(neg[i]->text_embedding.begin(), neg[i]->text_embedding.end(),
              batch.negative_texts.row(i).begin());
  }
  return batch;
}

}  // namespace vilco::ssl
