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

#include "vilco/clstrat/bic.hpp"

#include "vilco/numkit/ops.hpp"
#include "vilco/numkit/optim.hpp"

namespace vilco::cl {

nlohmann::json BicCorrection::to_json() const {
  return {{"task_id", task_id}, {"alpha", alpha}, {"beta", beta}};
}

BicCorrection BicCorrection::from_json(const nlohmann::json& j) {
  return {j.at("task_id").get<int>(), j.at("alpha").get<double>(), j.at("beta").get<double>()};
}

namespace {

num::Var corrected_loss(num::Graph& g, const std::vector<BicSample>& samples, const BicFitOptions& o) {
  num::Var a = g.param("bic.alpha");
  num::Var b = g.param("bic.beta");
  num::Var total = g.constant(num::Tensor::scalar(0.0));
  double points = 0.0;
  for (const auto& s : samples) {
    num::Var z = g.constant(s.logits);
    if (s.newest) {
      const std::size_t n = s.logits.rows() * s.logits.cols();
      // Broadcast the scalars over every logit: column vectors of ones times alpha/beta.
      num::Var ones = g.constant(num::Tensor(num::Shape{n, 1}, std::vector<double>(n, 1.0)));
      num::Var flat = num::reshape(z, num::Shape{n, 1});
      num::Var av = num::reshape(num::matmul(ones, num::reshape(a, num::Shape{1, 1})), num::Shape{n, 1});
      num::Var bv = num::reshape(num::matmul(ones, num::reshape(b, num::Shape{1, 1})), num::Shape{n, 1});
      z = num::reshape(num::add(num::mul(flat, av), bv), s.logits.shape());
    }
    total = num::add(total, num::sigmoid_focal_loss_sum(z, s.targets, o.focal_alpha, o.focal_gamma));
    points += static_cast<double>(s.logits.rows());
  }
  return num::scale(total, 1.0 / std::max(1.0, points));
}

num::ParamSet bic_params(double alpha, double beta) {
  num::ParamSet ps;
  ps.add("bic.alpha", num::Tensor::scalar(alpha));
  ps.add("bic.beta", num::Tensor::scalar(beta));
  return ps;
}

}  // namespace

BicCorrection fit_bic(const std::vector<BicSample>& samples, int task_id, const BicFitOptions& opts) {
  BicCorrection c;
  if (samples.empty()) return c;
  c.task_id = task_id;
  auto ps = bic_params(1.0, 0.0);
  num::AdamWConfig cfg;
  cfg.lr = opts.lr;
  cfg.weight_decay = 0.0;
  for (std::size_t e = 0; e < opts.epochs; ++e) {
    ps.zero_grad();
    num::Graph g(&ps);
    g.backward(corrected_loss(g, samples, opts));
    num::adamw_step(ps, cfg);
  }
  c.alpha = ps.value("bic.alpha").data()[0];
  c.beta = ps.value("bic.beta").data()[0];
  return c;
}

double bic_validation_loss(const std::vector<BicSample>& samples, const BicCorrection& c,
                           const BicFitOptions& opts) {
  auto ps = bic_params(c.alpha, c.beta);
  num::Graph g(&ps);
  return corrected_loss(g, samples, opts).value().data()[0];
}

}  // namespace vilco::cl
