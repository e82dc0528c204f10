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

#include "vilco/clstrat/strategy.hpp"

#include "vilco/error.hpp"

namespace vilco::cl {

namespace {

const std::pair<Method, const char*> kMethods[] = {
    {Method::Naive, "naive"}, {Method::Joint, "joint"},   {Method::Ewc, "ewc"},
    {Method::Mas, "mas"},     {Method::Replay, "replay"}, {Method::Bic, "bic"},
    {Method::Vilco, "vilco"}};

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, name] : kMethods)
    if (k == m) return name;
  throw ConfigError("unknown method");
}

Method method_from_string(const std::string& s) {
  for (const auto& [k, name] : kMethods)
    if (s == name) return k;
  throw ConfigError("unknown method '" + s + "' (naive|joint|ewc|mas|replay|bic|vilco)");
}

void StrategyConfig::validate() const {
  if (lambda_ewc < 0 || lambda_mas < 0 || lambda_ssl < 0 || lambda_prompt < 0) {
    throw ConfigError("loss weights must be >= 0");
  }
  if (!(replay_mix >= 0.0 && replay_mix <= 1.0)) throw ConfigError("replay_mix must lie in [0, 1]");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (optim.lr < 0 || optim.weight_decay < 0) throw ConfigError("lr and weight_decay must be >= 0");
  if (!(bic_val_fraction >= 0.0 && bic_val_fraction < 1.0)) {
    throw ConfigError("bic_val_fraction must lie in [0, 1)");
  }
  if (!(ssl_temperature > 0.0)) throw ConfigError("ssl_temperature must be > 0");
  if (importance_samples == 0) throw ConfigError("importance_samples must be >= 1");
  prompt.validate();
}

bool StrategyConfig::uses_memory() const {
  return method == Method::Replay || method == Method::Bic || method == Method::Vilco;
}

bool StrategyConfig::replays() const {
  return method == Method::Replay || method == Method::Bic || (method == Method::Vilco && vilco_replay);
}

nlohmann::json strategy_config_to_json(const StrategyConfig& c) {
  return {{"method", to_string(c.method)},
          {"lambda_ewc", c.lambda_ewc},
          {"lambda_mas", c.lambda_mas},
          {"lambda_ssl", c.lambda_ssl},
          {"lambda_prompt", c.lambda_prompt},
          {"replay_capacity", c.replay_capacity},
          {"replay_mix", c.replay_mix},
          {"vilco_replay", c.vilco_replay},
          {"inject_prompts", c.inject_prompts},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.optim.lr},
          {"weight_decay", c.optim.weight_decay},
          {"betas", {c.optim.beta1, c.optim.beta2}},
          {"adam_eps", c.optim.eps},
          {"seed", c.seed},
          {"importance_accumulation", c.importance_accumulation == Accumulate::Max ? "max" : "sum"},
          {"importance_samples", c.importance_samples},
          {"bic_val_fraction", c.bic_val_fraction},
          {"bic_epochs", c.bic.epochs},
          {"bic_lr", c.bic.lr},
          {"ssl_negatives", c.ssl_negatives},
          {"ssl_temperature", c.ssl_temperature},
          {"prompt", mem::prompt_config_to_json(c.prompt)},
          {"loss",
           {{"focal_alpha", c.loss.focal_alpha},
            {"focal_gamma", c.loss.focal_gamma},
            {"center_radius", c.loss.center_radius},
            {"range_base", c.loss.range_base},
            {"reg_weight", c.loss.reg_weight}}},
          {"decode",
           {{"threshold", c.decode.threshold},
            {"nms_iou", c.decode.nms_iou},
            {"top_k", c.decode.top_k},
            {"pre_nms_top", c.decode.pre_nms_top}}}};
}

StrategyConfig strategy_config_from_json(const nlohmann::json& j, StrategyConfig c) {
  if (j.contains("method")) c.method = method_from_string(j.at("method").get<std::string>());
  c.lambda_ewc = j.value("lambda_ewc", c.lambda_ewc);
  c.lambda_mas = j.value("lambda_mas", c.lambda_mas);
  c.lambda_ssl = j.value("lambda_ssl", c.lambda_ssl);
  c.lambda_prompt = j.value("lambda_prompt", c.lambda_prompt);
  c.replay_capacity = j.value("replay_capacity", c.replay_capacity);
  c.replay_mix = j.value("replay_mix", c.replay_mix);
  c.vilco_replay = j.value("vilco_replay", c.vilco_replay);
  c.inject_prompts = j.value("inject_prompts", c.inject_prompts);
  c.epochs = j.value("epochs", c.epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.optim.lr = j.value("lr", c.optim.lr);
  c.optim.weight_decay = j.value("weight_decay", c.optim.weight_decay);
  if (j.contains("betas")) {
    c.optim.beta1 = j.at("betas").at(0).get<double>();
    c.optim.beta2 = j.at("betas").at(1).get<double>();
  }
  c.optim.eps = j.value("adam_eps", c.optim.eps);
  c.seed = j.value("seed", c.seed);
  if (j.contains("importance_accumulation")) {
    const auto a = j.at("importance_accumulation").get<std::string>();
    if (a == "max") {
      c.importance_accumulation = Accumulate::Max;
    } else if (a == "sum") {
      c.importance_accumulation = Accumulate::Sum;
    } else {
      throw ConfigError("importance_accumulation must be max or sum");
    }
  }
  c.importance_samples = j.value("importance_samples", c.importance_samples);
  c.bic_val_fraction = j.value("bic_val_fraction", c.bic_val_fraction);
  c.bic.epochs = j.value("bic_epochs", c.bic.epochs);
  c.bic.lr = j.value("bic_lr", c.bic.lr);
  c.ssl_negatives = j.value("ssl_negatives", c.ssl_negatives);
  c.ssl_temperature = j.value("ssl_temperature", c.ssl_temperature);
  if (j.contains("prompt")) c.prompt = mem::prompt_config_from_json(j.at("prompt"), c.prompt);
  if (j.contains("loss")) {
    const auto& l = j.at("loss");
    c.loss.focal_alpha = l.value("focal_alpha", c.loss.focal_alpha);
    c.loss.focal_gamma = l.value("focal_gamma", c.loss.focal_gamma);
    c.loss.center_radius = l.value("center_radius", c.loss.center_radius);
    c.loss.range_base = l.value("range_base", c.loss.range_base);
    c.loss.reg_weight = l.value("reg_weight", c.loss.reg_weight);
  }
  if (j.contains("decode")) {
    const auto& d = j.at("decode");
    c.decode.threshold = d.value("threshold", c.decode.threshold);
    c.decode.nms_iou = d.value("nms_iou", c.decode.nms_iou);
    c.decode.top_k = d.value("top_k", c.decode.top_k);
    c.decode.pre_nms_top = d.value("pre_nms_top", c.decode.pre_nms_top);
  }
  c.validate();
  return c;
}

}  // namespace vilco::cl
