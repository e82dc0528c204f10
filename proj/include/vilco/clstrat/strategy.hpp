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

#include <json.hpp>

#include "vilco/clstrat/bic.hpp"
#include "vilco/clstrat/importance.hpp"
#include "vilco/crossmodal/decode.hpp"
#include "vilco/crossmodal/loss.hpp"
#include "vilco/epimem/prompt_pool.hpp"
#include "vilco/numkit/optim.hpp"

namespace vilco::cl {

enum class Method { Naive, Joint, Ewc, Mas, Replay, Bic, Vilco };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct StrategyConfig {
  Method method = Method::Naive;
  double lambda_ewc = 100.0;
  double lambda_mas = 0.01;
  double lambda_ssl = 0.1;
  double lambda_prompt = 0.1;
  std::size_t replay_capacity = 1010;
  double replay_mix = 0.5;
  /// ViLCo switches: replay from the short-term memory and prompt injection.
  bool vilco_replay = true;
  bool inject_prompts = true;
  std::size_t epochs = 15;
  std::size_t batch_size = 2;
  num::AdamWConfig optim;
  std::uint64_t seed = 0;
  Accumulate importance_accumulation = Accumulate::Max;
  std::size_t importance_samples = 32;
  double bic_val_fraction = 0.1;
  BicFitOptions bic;
  std::size_t ssl_negatives = 8;
  double ssl_temperature = 1.0;
  mem::PromptConfig prompt;
  xm::LossConfig loss;
  xm::DecodeOptions decode;

  void validate() const;
  bool uses_memory() const;
  bool replays() const;
};

nlohmann::json strategy_config_to_json(const StrategyConfig& c);
StrategyConfig strategy_config_from_json(const nlohmann::json& j, StrategyConfig base = {});

}  // namespace vilco::cl
