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

#include "vilco/numkit/param_set.hpp"

#include <cmath>

#include "vilco/error.hpp"

namespace vilco::num {

Tensor& ParamSet::add(const std::string& name, Tensor value) {
  if (values_.count(name)) throw ConfigError("duplicate parameter '" + name + "'");
  const Shape shape = value.shape();
  grads_.emplace(name, Tensor(shape));
  m_.emplace(name, Tensor(shape));
  v_.emplace(name, Tensor(shape));
  return values_.emplace(name, std::move(value)).first->second;
}

void ParamSet::erase(const std::string& name) {
  values_.erase(name);
  grads_.erase(name);
  m_.erase(name);
  v_.erase(name);
}

Tensor& ParamSet::value(const std::string& name) {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

const Tensor& ParamSet::value(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError("unknown parameter '" + name + "'");
  return it->second;
}

Tensor& ParamSet::grad(const std::string& name) { return grads_.at(name); }
const Tensor& ParamSet::grad(const std::string& name) const { return grads_.at(name); }

std::vector<std::string> ParamSet::names() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, _] : values_) out.push_back(k);
  return out;
}

std::size_t ParamSet::num_scalars() const {
  std::size_t n = 0;
  for (const auto& [_, t] : values_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [_, g] : grads_) g.fill(0.0);
}

void ParamSet::reset_optimizer() {
  for (auto& [_, t] : m_) t.fill(0.0);
  for (auto& [_, t] : v_) t.fill(0.0);
  step_ = 0;
}

bool ParamSet::same_values(const ParamSet& other) const { return values_ == other.values_; }

Tensor randn(const Shape& shape, Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  Tensor t(shape);
  for (auto& x : t.data()) x = dist(rng);
  return t;
}

Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor t(Shape{fan_in, fan_out});
  for (auto& x : t.data()) x = dist(rng);
  return t;
}

}  // namespace vilco::num
