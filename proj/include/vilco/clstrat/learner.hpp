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

#include <map>
#include <optional>
#include <vector>

#include <json.hpp>

#include "vilco/clstrat/bic.hpp"
#include "vilco/clstrat/importance.hpp"
#include "vilco/clstrat/strategy.hpp"
#include "vilco/crossmodal/loss.hpp"
#include "vilco/crossmodal/model.hpp"
#include "vilco/datastream/types.hpp"
#include "vilco/epimem/memory.hpp"
#include "vilco/epimem/prompt_pool.hpp"
#include "vilco/evalkit/evaluate.hpp"

namespace vilco::cl {

struct TrainingLog {
  int task_id = 0;
  std::vector<double> epoch_loss;  // mean total loss per epoch
  std::vector<double> epoch_task_loss;
  std::vector<double> epoch_ssl_loss;
  std::vector<double> epoch_prompt_loss;
  std::vector<double> epoch_penalty;
  std::size_t steps = 0;
  std::size_t skipped_windows = 0;  // windows with no positive point
  std::size_t ssl_skipped = 0;      // current items without narration
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
  static TrainingLog from_json(const nlohmann::json& j);
  friend bool operator==(const TrainingLog&, const TrainingLog&) = default;
};

/// Loss terms of one optimizer step.
struct StepLoss {
  double total = 0.0;
  double task = 0.0;
  double ssl = 0.0;
  double prompt = 0.0;
  double penalty = 0.0;
  std::size_t skipped_windows = 0;
  std::size_t ssl_skipped = 0;
};

/// One model plus the state its strategy carries between tasks (memory,
/// importance maps, bias correction, RNG streams).
///
/// The learner keeps references to `stream` and `data`; both must outlive it.
class Learner {
 public:
  Learner(const data::TaskStream& stream, const data::Manifest& data, xm::FusionConfig fusion,
          StrategyConfig cfg);

  const StrategyConfig& config() const { return cfg_; }
  const xm::FusionConfig& fusion() const { return fusion_; }
  num::ParamSet& params() { return params_; }
  const num::ParamSet& params() const { return params_; }
  const mem::ShortTermMemory& memory() const { return memory_; }
  mem::ShortTermMemory& memory() { return memory_; }
  const ImportanceMap& importance() const { return importance_; }
  const BicCorrection& bic() const { return bic_; }
  std::size_t tasks_trained() const { return tasks_trained_; }
  const std::vector<TrainingLog>& logs() const { return logs_; }
  /// Negative-sampling stream of the SSL term; batch_loss advances it.
  num::Rng& ssl_rng() { return ssl_rng_; }

  /// Trains stream position `position`, which must equal tasks_trained().
  TrainingLog train_task(std::size_t position);

  /// One optimizer step on `batch`. Items of task `position` are offered to
  /// the memory when `store` is set.
  StepLoss train_step(const std::vector<mem::ItemRef>& batch, std::size_t position, bool store);

  /// Appends ceil(replay_mix * batch_size) items sampled from memory entries
  /// of earlier tasks (never held-out ones) when the method replays.
  std::vector<mem::ItemRef> mix_replay(std::vector<mem::ItemRef> batch, std::size_t position);

  struct Forward {
    xm::PyramidFeatures pyramid;
    xm::DenseOutputs dense;
    std::optional<num::Var> query;  // 1 x D mean of projected query tokens
    std::optional<mem::PromptSelection> selection;
  };
  /// `training` enables task-masked prompt selection.
  Forward forward(num::Graph& g, const data::TaskItem& item, bool training = false) const;

  /// Total strategy loss of a batch recorded on `g` (no optimizer step).
  num::Var batch_loss(num::Graph& g, const std::vector<mem::ItemRef>& batch, std::size_t position,
                      StepLoss* parts = nullptr, std::vector<Forward>* forwards = nullptr);

  /// Ranked predictions restricted to the query's class slots.
  std::vector<xm::MomentPrediction> predict(const data::TaskItem& item) const;
  eval::TaskScores evaluate(std::size_t position, const eval::EvalConfig& cfg, std::size_t threads) const;

  const data::TaskItem& item(const mem::ItemRef& ref) const;
  int slot_of(int key) const;
  int task_of(int key) const;
  std::vector<xm::LabeledWindow> labels(const data::QueryRecord& q) const;
  /// Sorted class slots a query is decoded and supervised on.
  std::vector<int> query_slots(const data::QueryRecord& q) const;
  /// Supervision of one item: for MQ, every category window annotated on the
  /// video within the item's sub-task; for NLQ, the query's own windows.
  std::vector<xm::LabeledWindow> training_labels(const data::TaskItem& item) const;
  /// Localization loss of one forward pass against training_labels().
  xm::LocalizationLoss query_loss(const Forward& f, const data::TaskItem& item) const;
  const data::FeatureSequence& features(const std::string& video_id) const;

  /// Names of model parameters (everything except the prompt pool).
  static bool is_model_param(const std::string& name);

  nlohmann::json state_to_json() const;
  void load_state(const nlohmann::json& j);

 private:
  std::vector<mem::ItemRef> task_refs(std::size_t position) const;
  void store_in_memory(const std::vector<mem::ItemRef>& batch, const std::vector<Forward>& fwd,
                       std::size_t position);
  void after_task(std::size_t position, TrainingLog& log);

  const data::TaskStream* stream_;
  const data::Manifest* data_;
  xm::FusionConfig fusion_;
  StrategyConfig cfg_;
  num::ParamSet params_;
  mem::ShortTermMemory memory_;
  ImportanceMap importance_;
  BicCorrection bic_;
  num::Rng order_rng_;
  num::Rng replay_rng_;
  num::Rng ssl_rng_;
  std::size_t tasks_trained_ = 0;
  std::vector<TrainingLog> logs_;
  num::Tensor frozen_query_w_;  // text projection at initialization
  num::Tensor frozen_query_b_;
  std::map<std::pair<int, std::string>, std::vector<xm::LabeledWindow>> video_labels_;
  std::map<int, int> slot_;
  std::map<int, int> task_of_key_;
};

/// Class slots needed by a stream: largest MQ vocabulary, or 1 for NLQ.
std::size_t required_classes(const data::TaskStream& stream);

nlohmann::json params_to_json(const num::ParamSet& ps);
void params_from_json(num::ParamSet& ps, const nlohmann::json& j);

}  // namespace vilco::cl
