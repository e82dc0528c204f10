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

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "vilco/numkit/tensor.hpp"

namespace vilco::num {

/// Named trainable parameters with matching gradients and AdamW moments.
class ParamSet {
 public:
  /// Adds a parameter; gradient and moments are created zero-filled.
  Tensor& add(const std::string& name, Tensor value);
  bool contains(const std::string& name) const { return values_.count(name) != 0; }
  void erase(const std::string& name);

  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  const Tensor& grad(const std::string& name) const;
  Tensor& first_moment(const std::string& name) { return m_.at(name); }
  Tensor& second_moment(const std::string& name) { return v_.at(name); }
  const Tensor& first_moment(const std::string& name) const { return m_.at(name); }
  const Tensor& second_moment(const std::string& name) const { return v_.at(name); }

  std::vector<std::string> names() const;
  std::size_t num_scalars() const;

  void zero_grad();
  /// Clears moments and the step counter (fresh optimizer, same values).
  void reset_optimizer();

  std::int64_t step() const { return step_; }
  void advance_step() { ++step_; }
  void set_step(std::int64_t s) { step_ = s; }

  const std::map<std::string, Tensor>& values() const { return values_; }
  const std::map<std::string, Tensor>& grads() const { return grads_; }

  /// Exact equality of names, shapes, and values (moments ignored).
  bool same_values(const ParamSet& other) const;

 private:
  std::map<std::string, Tensor> values_;
  std::map<std::string, Tensor> grads_;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
  std::int64_t step_ = 0;
};

using Rng = std::mt19937_64;

Tensor randn(const Shape& shape, Rng& rng, double stddev = 1.0);
/// Uniform in [-limit, limit] with limit = sqrt(6 / (fan_in + fan_out)).
Tensor xavier(std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace vilco::num
