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

#include <cstddef>
#include <vector>

#include "vilco/numkit/graph.hpp"
#include "vilco/numkit/tensor.hpp"

namespace vilco::num {

// ---------------------------------------------------------------------------
// Plain tensor functions (no tape).

/// Max-subtracted softmax along `axis`.
Tensor softmax(const Tensor& logits, std::size_t axis);
/// Layer normalization over the last axis.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
double softplus(double x);
double sigmoid(double x);

// ---------------------------------------------------------------------------
// Differentiable ops. Matrices are rank-2 (rows x cols); vectors used as
// biases/gains are rank-1 and broadcast over rows.

Var matmul(Var a, Var b);
/// a * b^T
Var matmul_nt(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
Var gelu(Var a);
Var softplus(Var a);
Var square(Var a);
Var softmax_rows(Var a);
Var layer_norm(Var x, Var gain, Var bias, double eps);
/// Rows scaled to unit L2 norm. Throws NumericalError on a zero row.
Var l2_normalize_rows(Var a);

Var concat_rows(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, const std::vector<std::size_t>& rows);
/// Column-wise mean over all rows: (n x d) -> (1 x d).
Var mean_rows(Var a);
Var reshape(Var a, Shape shape);

Var sum(Var a);
Var mean(Var a);

/// Scaled dot-product attention split over `heads` column groups.
/// q: (tq x d), k/v: (tk x d). If `weights` is non-null it receives the
/// attention probabilities with shape (heads, tq, tk).
Var scaled_dot_attention(Var q, Var k, Var v, std::size_t heads, Tensor* weights = nullptr);

/// 1-D convolution over rows. x: (t x cin), w: (kernel, cin, cout), b: (cout).
/// Zero padding of (kernel-1)/2 on both ends.
Var conv1d(Var x, Var w, Var b, std::size_t stride);

/// Mean over rows of (logsumexp(row) - row[target]).
Var cross_entropy_rows(Var logits, const std::vector<std::size_t>& targets);

/// Summed sigmoid focal loss; targets are 0/1 with the logits' shape.
Var sigmoid_focal_loss_sum(Var logits, const Tensor& targets, double alpha, double gamma);

/// Summed 1-D IoU loss (1 - IoU) between predicted and target (left, right)
/// distances measured from a shared reference point. Both are (n x 2), >= 0.
Var iou_loss_sum(Var pred, const Tensor& target);

/// (weight/2) * sum_i importance_i * (theta_i - anchor_i)^2
Var quadratic_penalty(Var theta, const Tensor& importance, const Tensor& anchor, double weight);

}  // namespace vilco::num
