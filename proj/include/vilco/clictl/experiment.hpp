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
#include <filesystem>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "vilco/clstrat/learner.hpp"
#include "vilco/clstrat/strategy.hpp"
#include "vilco/crossmodal/model.hpp"
#include "vilco/datastream/synth.hpp"
#include "vilco/evalkit/metrics.hpp"

namespace vilco::ctl {

struct ExperimentConfig {
  data::TaskKind task_kind = data::TaskKind::MQ;
  cl::Method method = cl::Method::Naive;
  std::uint64_t seed = 0;        // model init, training order, synthetic data
  std::uint64_t order_seed = 0;  // sub-task permutation
  std::size_t mem_capacity = 1010;
  std::size_t num_tasks = 5;     // MQ sub-tasks
  bool synthetic = true;
  std::filesystem::path manifest;  // used when !synthetic
  data::SynthConfig synth;
  xm::FusionConfig fusion;  // input dims and class count are taken from the data
  cl::StrategyConfig strategy;
  eval::EvalConfig eval;
  std::filesystem::path output_dir = "vilco_out";

  /// Throws ConfigError on invalid values or missing files.
  void validate() const;
};

nlohmann::json experiment_config_to_json(const ExperimentConfig& c);
/// Unknown top-level keys are rejected.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Desk-scale settings of the standard synthetic MQ stream (5 tasks x 22
/// categories) used by the acceptance experiments.
ExperimentConfig standard_synthetic_config(cl::Method method, std::uint64_t seed);

struct ExperimentResult {
  std::string status = "complete";  // or "numerical_abort"
  std::string message;
  nlohmann::json config;            // echo
  data::TaskKind task_kind = data::TaskKind::MQ;
  std::string method;
  std::uint64_t seed = 0;
  std::uint64_t order_seed = 0;
  std::size_t mem_capacity = 0;
  std::size_t num_tasks = 0;
  std::vector<int> task_order;  // canonical sub-task index trained at each position
  std::map<std::string, eval::MetricsMatrix> matrices;  // metric label -> matrix
  std::vector<cl::TrainingLog> logs;
  double wall_clock_s = 0.0;

  /// P_i for i = 1..completed rows.
  std::vector<double> avg_performance(const std::string& label) const;
  /// BwF_i for i = 1..completed rows; entry 0 (i = 1) is NaN.
  std::vector<double> forgetting(const std::string& label) const;
  double headline_bwf() const;     // BwF_N on R@1 mean
  double headline_avg(std::size_t k) const;  // P_N on R@k mean

  nlohmann::json to_json() const;
  static ExperimentResult from_json(const nlohmann::json& j);
};

struct RunControl {
  bool resume = true;
  /// Stop (as if interrupted) after this many tasks have been checkpointed.
  std::size_t stop_after = std::numeric_limits<std::size_t>::max();
  std::size_t threads = 1;
  bool quiet = true;
};

/// Builds the stream, trains every task in order, evaluates all seen tasks
/// after each boundary, checkpoints, and writes result.json, metrics.json,
/// summary.csv and curve.csv into the output directory. A numerical abort
/// flushes the partial result and rethrows NumericalError.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunControl& ctl = {});

/// Thread cap from VILCO_THREADS (default: hardware concurrency, at least 1).
std::size_t threads_from_env();

/// Checkpoint container: CBOR of {format, version, config, fusion, state, ...}.
void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& payload);
nlohmann::json load_checkpoint(const std::filesystem::path& path);
/// Verifies that a checkpoint was written for `fusion` and `config_echo`.
void check_checkpoint_compatible(const nlohmann::json& ckpt, const xm::FusionConfig& fusion,
                                 const nlohmann::json& config_echo);

}  // namespace vilco::ctl
