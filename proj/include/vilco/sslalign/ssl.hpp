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

#include <optional>
#include <set>
#include <vector>

#include "vilco/epimem/memory.hpp"
#include "vilco/numkit/graph.hpp"

namespace vilco::ssl {

/// B positive (video, narration) pairs plus optional denominator-only negatives.
struct AlignmentBatch {
  num::Var videos;  // B x D
  num::Var texts;   // B x D
  num::Tensor negative_videos;  // n x D (may have zero rows)
  num::Tensor negative_texts;   // n x D
  double temperature = 1.0;
  std::size_t skipped = 0;      // current items without a narration
};

struct SslLoss {
  num::Var total;
  num::Var v2t;
  num::Var t2v;
};

/// sim = cosine / tau. v2t: each video against every narration in the batch
/// plus the negative narrations; t2v: each narration against every video plus
/// the negative videos. Each direction averages over the B positives.
SslLoss ssl_loss(const AlignmentBatch& batch);

/// One current pair; `text` empty when the item carries no narration.
struct CurrentPair {
  num::Var video;  // 1 x D
  std::optional<num::Var> text;
  std::uint64_t memory_id = UINT64_MAX;  // excluded from negatives when it matches
};

/// Positives are the current pairs (rows with a narration); negatives are
/// `negatives` entries sampled from memory among tasks before `current_task`
/// that carry a narration embedding.
AlignmentBatch build_alignment_batch(const std::vector<CurrentPair>& current,
                                     const mem::ShortTermMemory& memory, std::size_t negatives,
                                     int current_task, num::Rng& rng, double temperature = 1.0);

}  // namespace vilco::ssl
