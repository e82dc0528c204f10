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
#include <string>
#include <vector>

namespace vilco::ctl {

struct GradSuiteEntry {
  std::string loss;
  std::size_t configs = 0;
  std::size_t failures = 0;
  double worst = 0.0;  // max relative error over all configurations
  std::string worst_param;
};

/// Central finite-difference checks of every training loss (localization,
/// ssl, prompt, importance penalty, full vilco step) on `configs` random tiny
/// configurations each.
std::vector<GradSuiteEntry> run_gradcheck_suite(std::size_t configs, std::uint64_t seed, double tol = 1e-4);

}  // namespace vilco::ctl
