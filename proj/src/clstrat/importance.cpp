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

#include "vilco/clstrat/importance.hpp"

#include <algorithm>
#include <cmath>

#include "vilco/error.hpp"
#include "vilco/numkit/ops.hpp"

namespace vilco::cl {

namespace {

nlohmann::json tensors_to_json(const std::map<std::string, num::Tensor>& m) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, t] : m) out[name] = {{"shape", t.shape()}, {"data", t.data()}};
  return out;
}

std::map<std::string, num::Tensor> tensors_from_json(const nlohmann::json& j) {
  std::map<std::string, num::Tensor> out;
  for (const auto& [name, t] : j.items()) {
    out.emplace(name, num::Tensor(t.at("shape").get<num::Shape>(), t.at("data").get<std::vector<double>>()));
  }
  return out;
}

template <typename Fold>
ImportanceMap per_sample_gradients(num::ParamSet& params, std::size_t samples, const SampleFn& build,
                                   const NamePredicate& include, bool squared_norm, Fold fold) {
  if (samples == 0) throw ConfigError("importance estimation needs at least one sample");
  ImportanceMap out;
  for (const auto& name : params.names()) {
    if (include && !include(name)) continue;
    out.anchor.emplace(name, params.value(name));
    out.importance.emplace(name, num::Tensor(params.value(name).shape()));
  }
  for (std::size_t i = 0; i < samples; ++i) {
    params.zero_grad();
    num::Graph g(&params);
    num::Var v = build(g, i);
    if (squared_norm) v = num::sum(num::square(v));
    g.backward(v);
    for (auto& [name, acc] : out.importance) {
      const auto& gr = params.grad(name).data();
      auto& a = acc.data();
      for (std::size_t e = 0; e < a.size(); ++e) a[e] += fold(gr[e]);
    }
  }
  params.zero_grad();
  const double inv = 1.0 / static_cast<double>(samples);
  for (auto& [name, acc] : out.importance)
    for (auto& a : acc.data()) a *= inv;
  return out;
}

}  // namespace

nlohmann::json ImportanceMap::to_json() const {
  return {{"importance", tensors_to_json(importance)}, {"anchor", tensors_to_json(anchor)}};
}

ImportanceMap ImportanceMap::from_json(const nlohmann::json& j) {
  return {tensors_from_json(j.at("importance")), tensors_from_json(j.at("anchor"))};
}

ImportanceMap estimate_fisher(num::ParamSet& params, std::size_t samples, const SampleFn& loss_of,
                              const NamePredicate& include) {
  return per_sample_gradients(params, samples, loss_of, include, false,
                              [](double g) { return g * g; });
}

ImportanceMap mas_importance(num::ParamSet& params, std::size_t samples, const SampleFn& output_of,
                             const NamePredicate& include) {
  return per_sample_gradients(params, samples, output_of, include, true,
                              [](double g) { return std::abs(g); });
}

void accumulate(ImportanceMap& acc, const ImportanceMap& next, Accumulate mode) {
  if (acc.empty()) {
    acc = next;
    return;
  }
  for (const auto& [name, t] : next.importance) {
    auto it = acc.importance.find(name);
    if (it == acc.importance.end()) {
      acc.importance.emplace(name, t);
      continue;
    }
    if (it->second.shape() != t.shape()) throw ShapeError("importance shape changed for " + name);
    auto& a = it->second.data();
    for (std::size_t e = 0; e < a.size(); ++e) {
      a[e] = mode == Accumulate::Max ? std::max(a[e], t.data()[e]) : a[e] + t.data()[e];
    }
  }
  acc.anchor = next.anchor;
}

num::Var importance_penalty(num::Graph& g, const ImportanceMap& imp, double lambda) {
  num::Var total = g.constant(num::Tensor::scalar(0.0));
  if (lambda == 0.0 || imp.empty()) return total;
  for (const auto& [name, f] : imp.importance) {
    const auto& anchor = imp.anchor.at(name);
    total = num::add(total, num::quadratic_penalty(g.param(name), f, anchor, lambda));
  }
  return total;
}

}  // namespace vilco::cl
