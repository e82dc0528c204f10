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

#include "vilco/clstrat/learner.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vilco/crossmodal/loss.hpp"
#include "vilco/error.hpp"
#include "vilco/numkit/layers.hpp"
#include "vilco/numkit/ops.hpp"
#include "vilco/sslalign/ssl.hpp"

namespace vilco::cl {

using num::Graph;
using num::Var;

namespace {

constexpr std::uint64_t kPromptSeedSalt = 0x9E3779B97F4A7C15ULL;

int query_key(const data::QueryRecord& q) {
  if (q.kind == data::TaskKind::NLQ) return q.template_id;
  if (q.categories.empty()) throw ConfigError("MQ query " + q.query_id + " has no category");
  return q.categories.front();
}

template <typename T>
double mean_of(const std::vector<T>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (auto x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Feature rows covering a time span; at least one row.
std::pair<std::size_t, std::size_t> span_rows(const data::Window& w, double stride, std::size_t t) {
  auto a = static_cast<std::size_t>(std::max(0.0, std::floor(w.start_s / stride)));
  auto b = static_cast<std::size_t>(std::max(0.0, std::ceil(w.end_s / stride)));
  a = std::min(a, t - 1);
  b = std::clamp<std::size_t>(b, a + 1, t);
  return {a, b};
}

// Query slots of a record, sorted and unique.
std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

num::Tensor row_tensor(const std::vector<double>& v) {
  return num::Tensor(num::Shape{1, v.size()}, v);
}

}  // namespace

nlohmann::json TrainingLog::to_json() const {
  return {{"task_id", task_id},
          {"epoch_loss", epoch_loss},
          {"epoch_task_loss", epoch_task_loss},
          {"epoch_ssl_loss", epoch_ssl_loss},
          {"epoch_prompt_loss", epoch_prompt_loss},
          {"epoch_penalty", epoch_penalty},
          {"steps", steps},
          {"skipped_windows", skipped_windows},
          {"ssl_skipped", ssl_skipped},
          {"warnings", warnings}};
}

TrainingLog TrainingLog::from_json(const nlohmann::json& j) {
  TrainingLog l;
  l.task_id = j.at("task_id").get<int>();
  l.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
  l.epoch_task_loss = j.at("epoch_task_loss").get<std::vector<double>>();
  l.epoch_ssl_loss = j.at("epoch_ssl_loss").get<std::vector<double>>();
  l.epoch_prompt_loss = j.at("epoch_prompt_loss").get<std::vector<double>>();
  l.epoch_penalty = j.at("epoch_penalty").get<std::vector<double>>();
  l.steps = j.at("steps").get<std::size_t>();
  l.skipped_windows = j.at("skipped_windows").get<std::size_t>();
  l.ssl_skipped = j.at("ssl_skipped").get<std::size_t>();
  l.warnings = j.at("warnings").get<std::vector<std::string>>();
  return l;
}

std::size_t required_classes(const data::TaskStream& stream) {
  if (stream.kind == data::TaskKind::NLQ) return 1;
  std::size_t c = 1;
  for (const auto& t : stream.tasks) c = std::max(c, t.vocabulary.size());
  return c;
}

Learner::Learner(const data::TaskStream& stream, const data::Manifest& data, xm::FusionConfig fusion,
                 StrategyConfig cfg)
    : stream_(&stream),
      data_(&data),
      fusion_(fusion),
      cfg_(std::move(cfg)),
      memory_(cfg_.replay_capacity, cfg_.seed + 2,
              cfg_.method == Method::Bic ? cfg_.bic_val_fraction : 0.0),
      order_rng_(cfg_.seed + 1),
      replay_rng_(cfg_.seed + 3),
      ssl_rng_(cfg_.seed + 4) {
  cfg_.validate();
  fusion_.validate();
  if (stream.tasks.empty()) throw ConfigError("task stream is empty");
  for (std::size_t p = 0; p < stream.tasks.size(); ++p) {
    const auto& vocab = stream.tasks[p].vocabulary;
    for (std::size_t i = 0; i < vocab.size(); ++i) {
      slot_[vocab[i]] = stream.kind == data::TaskKind::NLQ ? 0 : static_cast<int>(i);
      task_of_key_[vocab[i]] = static_cast<int>(p);
    }
  }
  for (std::size_t p = 0; p < stream.tasks.size(); ++p) {
    if (stream.kind != data::TaskKind::MQ) break;
    for (const auto* split : {&stream.tasks[p].train, &stream.tasks[p].val}) {
      for (const auto& it : *split) {
        auto& dst = video_labels_[{static_cast<int>(p), it.video_id}];
        for (const auto& w : labels(it.query)) {
          const bool dup = std::any_of(dst.begin(), dst.end(), [&](const xm::LabeledWindow& x) {
            return x.slot == w.slot && x.window == w.window;
          });
          if (!dup) dst.push_back(w);
        }
      }
    }
  }
  if (fusion_.num_classes < required_classes(stream)) {
    throw ConfigError("num_classes " + std::to_string(fusion_.num_classes) + " < " +
                      std::to_string(required_classes(stream)) + " slots needed by the stream");
  }
  // Every strategy shares one model initialization for a given seed.
  xm::init_model(params_, fusion_, cfg_.seed);
  if (cfg_.method == Method::Vilco) {
    mem::init_prompt_pool(params_, cfg_.prompt, fusion_.model_dim, cfg_.seed ^ kPromptSeedSalt);
  }
  frozen_query_w_ = params_.value("text_proj.w");
  frozen_query_b_ = params_.value("text_proj.b");
  cfg_.bic.focal_alpha = cfg_.loss.focal_alpha;
  cfg_.bic.focal_gamma = cfg_.loss.focal_gamma;
}

bool Learner::is_model_param(const std::string& name) { return name.rfind("prompt.", 0) != 0; }

const data::TaskItem& Learner::item(const mem::ItemRef& ref) const {
  return stream_->tasks.at(ref.task).train.at(ref.index);
}

int Learner::slot_of(int key) const {
  auto it = slot_.find(key);
  if (it == slot_.end()) throw ConfigError("query key " + std::to_string(key) + " is in no sub-task");
  return it->second;
}

int Learner::task_of(int key) const {
  auto it = task_of_key_.find(key);
  if (it == task_of_key_.end()) throw ConfigError("query key " + std::to_string(key) + " is in no sub-task");
  return it->second;
}

std::vector<xm::LabeledWindow> Learner::labels(const data::QueryRecord& q) const {
  std::vector<xm::LabeledWindow> out;
  std::vector<int> keys;
  if (q.kind == data::TaskKind::NLQ) {
    keys = {q.template_id};
  } else {
    keys = q.categories;
  }
  for (int key : keys)
    for (const auto& w : q.windows) out.push_back({w, slot_of(key)});
  return out;
}

const data::FeatureSequence& Learner::features(const std::string& video_id) const {
  auto it = data_->features.find(video_id);
  if (it == data_->features.end()) throw ConfigError("no features loaded for video " + video_id);
  return it->second;
}

Learner::Forward Learner::forward(Graph& g, const data::TaskItem& it, bool training) const {
  Forward f;
  Var tokens = xm::project_query(g, fusion_, it.query.query_tokens);
  Var block = tokens;
  const bool vilco = cfg_.method == Method::Vilco;
  if (vilco && (cfg_.inject_prompts || cfg_.lambda_prompt > 0.0)) {
    if (cfg_.prompt.frozen_query) {
      num::Tensor raw(num::Shape{it.query.query_tokens.size(), fusion_.text_dim});
      for (std::size_t r = 0; r < raw.rows(); ++r)
        std::copy(it.query.query_tokens[r].begin(), it.query.query_tokens[r].end(), raw.row(r).begin());
      num::Tensor q = num::matmul(raw, frozen_query_w_);
      num::Tensor mean(num::Shape{1, q.cols()});
      for (std::size_t r = 0; r < q.rows(); ++r)
        for (std::size_t c = 0; c < q.cols(); ++c)
          mean.at(0, c) += (q.at(r, c) + frozen_query_b_.data()[c]) / static_cast<double>(q.rows());
      f.query = g.constant(std::move(mean));
    } else {
      f.query = num::mean_rows(tokens);
    }
    std::vector<std::size_t> candidates;
    if (training && cfg_.prompt.task_masked_training) {
      candidates = mem::task_prompt_keys(cfg_.prompt, static_cast<std::size_t>(task_of(query_key(it.query))));
    }
    f.selection = mem::prompt_select(params_.value(mem::kPromptKeys), f.query->value().data(),
                                     cfg_.prompt.top_n, candidates);
    if (cfg_.inject_prompts) {
      Var prompts = mem::selected_prompts(g, cfg_.prompt, *f.selection, fusion_.model_dim);
      block = mem::prompt_inject(prompts, tokens, cfg_.prompt.mode, cfg_.prompt.blend_beta);
    }
  }
  f.pyramid = xm::encode_fuse(g, fusion_, features(it.video_id), block);
  f.dense = xm::predict_moments(g, fusion_, f.pyramid);
  return f;
}

std::vector<int> Learner::query_slots(const data::QueryRecord& q) const {
  std::vector<int> keys = q.kind == data::TaskKind::NLQ ? std::vector<int>{q.template_id} : q.categories;
  std::vector<int> slots;
  for (int k : keys) slots.push_back(slot_of(k));
  return sorted_unique(slots);
}

std::vector<xm::LabeledWindow> Learner::training_labels(const data::TaskItem& it) const {
  if (it.query.kind == data::TaskKind::NLQ) return labels(it.query);
  // MQ: every annotated category of this video within the query's sub-task.
  const int task = task_of(query_key(it.query));
  auto found = video_labels_.find({task, it.video_id});
  if (found == video_labels_.end()) return labels(it.query);
  return found->second;
}

xm::LocalizationLoss Learner::query_loss(const Forward& f, const data::TaskItem& it) const {
  return xm::loss_localization(f.dense, training_labels(it), features(it.video_id).clip_stride_s, cfg_.loss);
}

Var Learner::batch_loss(Graph& g, const std::vector<mem::ItemRef>& batch, std::size_t position,
                        StepLoss* parts, std::vector<Forward>* forwards) {
  if (batch.empty()) throw ConfigError("empty training batch");
  StepLoss local;
  std::vector<Forward> fwd;
  std::vector<Var> task_terms;
  for (const auto& ref : batch) {
    const auto& it = item(ref);
    fwd.push_back(forward(g, it, true));
    auto l = query_loss(fwd.back(), it);
    local.skipped_windows += l.skipped_windows;
    task_terms.push_back(l.total);
  }
  Var task = task_terms.front();
  for (std::size_t i = 1; i < task_terms.size(); ++i) task = num::add(task, task_terms[i]);
  task = num::scale(task, 1.0 / static_cast<double>(task_terms.size()));
  local.task = task.value().data()[0];
  Var total = task;

  const double lambda_reg = cfg_.method == Method::Ewc ? cfg_.lambda_ewc
                            : cfg_.method == Method::Mas ? cfg_.lambda_mas
                                                         : 0.0;
  if (lambda_reg > 0.0 && !importance_.empty()) {
    Var pen = importance_penalty(g, importance_, lambda_reg);
    local.penalty = pen.value().data()[0];
    total = num::add(total, pen);
  }

  if (cfg_.method == Method::Vilco && cfg_.lambda_prompt > 0.0) {
    std::vector<Var> terms;
    Var keys = g.param(mem::kPromptKeys);
    for (const auto& f : fwd) {
      Var q = cfg_.prompt.detach_query ? g.detach(*f.query) : *f.query;
      terms.push_back(mem::prompt_loss(keys, q, f.selection->indices, cfg_.prompt.margin));
    }
    Var p = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) p = num::add(p, terms[i]);
    p = num::scale(p, 1.0 / static_cast<double>(terms.size()));
    local.prompt = p.value().data()[0];
    total = num::add(total, num::scale(p, cfg_.lambda_prompt));
  }

  if (cfg_.method == Method::Vilco && cfg_.lambda_ssl > 0.0) {
    std::vector<ssl::CurrentPair> pairs;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (batch[i].task != position) continue;
      const auto& it = item(batch[i]);
      const auto& seq = features(it.video_id);
      ssl::CurrentPair pair;
      const data::Window span =
          it.query.narrations.empty() ? it.query.windows.front() : it.query.narrations.front().span;
      const auto [a, b] = span_rows(span, seq.clip_stride_s, seq.length());
      pair.video = num::mean_rows(num::slice_rows(fwd[i].pyramid.video_tokens, a, b));
      if (!it.query.narrations.empty()) {
        pair.text = num::linear(g, "text_proj", g.constant(row_tensor(it.query.narrations.front().embedding)));
      }
      pairs.push_back(pair);
    }
    const bool any_text = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.text.has_value(); });
    if (any_text) {
      auto ab = ssl::build_alignment_batch(pairs, memory_, cfg_.ssl_negatives, static_cast<int>(position),
                                           ssl_rng_, cfg_.ssl_temperature);
      local.ssl_skipped += ab.skipped;
      Var s = ssl::ssl_loss(ab).total;
      local.ssl = s.value().data()[0];
      total = num::add(total, num::scale(s, cfg_.lambda_ssl));
    } else {
      local.ssl_skipped += pairs.size();
    }
  }

  local.total = total.value().data()[0];
  if (!std::isfinite(local.total)) throw NumericalError("non-finite training loss");
  if (parts) *parts = local;
  if (forwards) *forwards = std::move(fwd);
  return total;
}

void Learner::store_in_memory(const std::vector<mem::ItemRef>& batch, const std::vector<Forward>& fwd,
                              std::size_t position) {
  const auto& w = params_.value("text_proj.w");
  const auto& bias = params_.value("text_proj.b");
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch[i].task != position) continue;
    const auto& it = item(batch[i]);
    const auto& seq = features(it.video_id);
    mem::MemoryEntry e;
    e.item = batch[i];
    e.key = query_key(it.query);
    const data::Window span =
        it.query.narrations.empty() ? it.query.windows.front() : it.query.narrations.front().span;
    const auto [a, b] = span_rows(span, seq.clip_stride_s, seq.length());
    const auto& vt = fwd[i].pyramid.video_tokens.value();
    e.video_embedding.assign(vt.cols(), 0.0);
    for (std::size_t r = a; r < b; ++r)
      for (std::size_t c = 0; c < vt.cols(); ++c) e.video_embedding[c] += vt.at(r, c) / static_cast<double>(b - a);
    if (!it.query.narrations.empty()) {
      num::Tensor t = num::matmul(row_tensor(it.query.narrations.front().embedding), w);
      e.text_embedding.resize(t.cols());
      for (std::size_t c = 0; c < t.cols(); ++c) e.text_embedding[c] = t.at(0, c) + bias.data()[c];
    }
    memory_.store(std::move(e));
  }
}

StepLoss Learner::train_step(const std::vector<mem::ItemRef>& batch, std::size_t position, bool store) {
  params_.zero_grad();
  Graph g(&params_);
  StepLoss parts;
  std::vector<Forward> fwd;
  Var loss = batch_loss(g, batch, position, &parts, &fwd);
  g.backward(loss);
  num::adamw_step(params_, cfg_.optim);
  if (store) store_in_memory(batch, fwd, position);
  return parts;
}

std::vector<mem::ItemRef> Learner::task_refs(std::size_t position) const {
  std::vector<mem::ItemRef> refs;
  const std::size_t first = cfg_.method == Method::Joint ? 0 : position;
  for (std::size_t p = first; p <= position; ++p)
    for (std::size_t i = 0; i < stream_->tasks[p].train.size(); ++i) refs.push_back({p, i});
  return refs;
}

TrainingLog Learner::train_task(std::size_t position) {
  if (position != tasks_trained_) throw ConfigError("tasks must be trained in stream order");
  if (position >= stream_->tasks.size()) throw ConfigError("task position out of range");
  TrainingLog log;
  log.task_id = static_cast<int>(position);
  auto refs = task_refs(position);
  if (refs.empty()) throw ConfigError("task " + std::to_string(position) + " has no training items");
  if (cfg_.uses_memory()) memory_.begin_task(static_cast<int>(position));
  for (std::size_t epoch = 0; epoch < cfg_.epochs; ++epoch) {
    for (std::size_t i = refs.size(); i > 1; --i) {
      std::swap(refs[i - 1], refs[static_cast<std::size_t>(order_rng_() % i)]);
    }
    std::vector<double> tot, task, ssl_l, prompt, pen;
    for (std::size_t b = 0; b < refs.size(); b += cfg_.batch_size) {
      std::vector<mem::ItemRef> batch(refs.begin() + static_cast<long>(b),
                                      refs.begin() + static_cast<long>(std::min(refs.size(), b + cfg_.batch_size)));
      batch = mix_replay(std::move(batch), position);
      StepLoss s;
      try {
        s = train_step(batch, position, epoch == 0 && cfg_.uses_memory());
      } catch (const NumericalError& e) {
        throw NumericalError("task " + std::to_string(position) + " epoch " + std::to_string(epoch) +
                             " step " + std::to_string(log.steps) + ": " + e.what());
      }
      ++log.steps;
      tot.push_back(s.total);
      task.push_back(s.task);
      ssl_l.push_back(s.ssl);
      prompt.push_back(s.prompt);
      pen.push_back(s.penalty);
      log.skipped_windows += epoch == 0 ? s.skipped_windows : 0;
      log.ssl_skipped += epoch == 0 ? s.ssl_skipped : 0;
    }
    log.epoch_loss.push_back(mean_of(tot));
    log.epoch_task_loss.push_back(mean_of(task));
    log.epoch_ssl_loss.push_back(mean_of(ssl_l));
    log.epoch_prompt_loss.push_back(mean_of(prompt));
    log.epoch_penalty.push_back(mean_of(pen));
  }
  after_task(position, log);
  ++tasks_trained_;
  logs_.push_back(log);
  return log;
}

std::vector<mem::ItemRef> Learner::mix_replay(std::vector<mem::ItemRef> batch, std::size_t position) {
  if (!cfg_.replays() || position == 0) return batch;
  const auto n = static_cast<std::size_t>(std::ceil(cfg_.replay_mix * static_cast<double>(cfg_.batch_size)));
  if (n == 0) return batch;
  auto past = mem::st_sample_negatives(memory_, n, {}, replay_rng_, [&](const mem::MemoryEntry& e) {
    return e.task_id < static_cast<int>(position) && !e.held_out;
  });
  for (const auto* e : past) batch.push_back(e->item);
  return batch;
}

void Learner::after_task(std::size_t position, TrainingLog& log) {
  if (cfg_.method == Method::Ewc || cfg_.method == Method::Mas) {
    const auto refs = task_refs(position);
    const std::size_t n = std::min(cfg_.importance_samples, refs.size());
    // Evenly spaced items of the task, in stream order.
    auto sample_ref = [&](std::size_t i) { return refs[i * refs.size() / n]; };
    ImportanceMap next;
    if (cfg_.method == Method::Ewc) {
      next = estimate_fisher(params_, n, [&](Graph& g, std::size_t i) {
        const auto& it = item(sample_ref(i));
        return query_loss(forward(g, it), it).total;
      }, is_model_param);
    } else {
      next = mas_importance(params_, n, [&](Graph& g, std::size_t i) {
        auto f = forward(g, item(sample_ref(i)));
        return num::concat_rows({num::reshape(f.dense.logits, {f.dense.logits.value().data().size(), 1}),
                                 num::reshape(f.dense.offsets, {f.dense.offsets.value().data().size(), 1})});
      }, is_model_param);
    }
    accumulate(importance_, next, cfg_.importance_accumulation);
  }

  if (cfg_.method == Method::Bic && position > 0) {
    std::vector<BicSample> samples;
    for (const auto* e : memory_.entries()) {
      if (!e->held_out) continue;
      const auto& it = item(e->item);
      Graph g(&params_);
      auto f = forward(g, it);
      const auto slots = query_slots(it.query);
      const auto tg = xm::assign_targets(f.dense.points, fusion_.num_classes, training_labels(it),
                                         features(it.video_id).clip_stride_s, cfg_.loss);
      const auto& z = f.dense.logits.value();
      BicSample sample{num::Tensor(num::Shape{z.rows(), slots.size()}),
                       num::Tensor(num::Shape{z.rows(), slots.size()}),
                       e->task_id == static_cast<int>(position)};
      for (std::size_t p = 0; p < z.rows(); ++p) {
        for (std::size_t c = 0; c < slots.size(); ++c) {
          sample.logits.at(p, c) = z.at(p, static_cast<std::size_t>(slots[c]));
          sample.targets.at(p, c) = tg.cls.at(p, static_cast<std::size_t>(slots[c]));
        }
      }
      samples.push_back(std::move(sample));
    }
    if (samples.empty()) {
      log.warnings.push_back("bias correction: empty validation split, identity kept");
      bic_ = BicCorrection{};
    } else {
      bic_ = fit_bic(samples, static_cast<int>(position), cfg_.bic);
    }
  }
}

std::vector<xm::MomentPrediction> Learner::predict(const data::TaskItem& it) const {
  // Forward passes only read parameter values; the graph never writes back.
  Graph g(const_cast<num::ParamSet*>(&params_));
  auto f = forward(g, it);
  auto dense = xm::values_of(f.dense);
  auto opts = cfg_.decode;
  opts.classes = query_slots(it.query);
  const std::vector<int> keys =
      it.query.kind == data::TaskKind::NLQ ? std::vector<int>{it.query.template_id} : it.query.categories;
  if (bic_.task_id >= 0 && !bic_.identity() && task_of(keys.front()) == bic_.task_id) {
    for (int slot : opts.classes)
      for (std::size_t p = 0; p < dense.logits.rows(); ++p) {
        auto& z = dense.logits.at(p, static_cast<std::size_t>(slot));
        z = bic_.apply(z);
      }
  }
  return xm::decode_windows(dense, opts);
}

eval::TaskScores Learner::evaluate(std::size_t position, const eval::EvalConfig& cfg,
                                   std::size_t threads) const {
  const auto& items = stream_->tasks.at(position).val;
  return eval::evaluate_task(
      [&](const data::TaskItem& it) {
        std::vector<data::Window> out;
        for (const auto& p : predict(it)) out.push_back(p.window);
        return out;
      },
      items, cfg, threads);
}

nlohmann::json params_to_json(const num::ParamSet& ps) {
  nlohmann::json values = nlohmann::json::object();
  for (const auto& [name, t] : ps.values()) {
    values[name] = {{"shape", t.shape()},
                    {"data", t.data()},
                    {"m", ps.first_moment(name).data()},
                    {"v", ps.second_moment(name).data()}};
  }
  return {{"step", ps.step()}, {"values", values}};
}

void params_from_json(num::ParamSet& ps, const nlohmann::json& j) {
  const auto& values = j.at("values");
  if (values.size() != ps.values().size()) throw ConfigError("checkpoint parameter set differs");
  for (const auto& [name, t] : values.items()) {
    if (!ps.contains(name)) throw ConfigError("checkpoint has unknown parameter " + name);
    auto& v = ps.value(name);
    if (t.at("shape").get<num::Shape>() != v.shape()) {
      throw ConfigError("checkpoint shape mismatch for " + name);
    }
    v.data() = t.at("data").get<std::vector<double>>();
    ps.first_moment(name).data() = t.at("m").get<std::vector<double>>();
    ps.second_moment(name).data() = t.at("v").get<std::vector<double>>();
    const std::size_t n = v.data().size();
    if (ps.first_moment(name).data().size() != n || ps.second_moment(name).data().size() != n) {
      throw FormatError("checkpoint tensor length mismatch for " + name);
    }
  }
  ps.set_step(j.at("step").get<std::int64_t>());
}

nlohmann::json Learner::state_to_json() const {
  nlohmann::json logs = nlohmann::json::array();
  for (const auto& l : logs_) logs.push_back(l.to_json());
  return {{"params", params_to_json(params_)},
          {"memory", memory_.to_json()},
          {"importance", importance_.to_json()},
          {"bic", bic_.to_json()},
          {"order_rng", mem::rng_state(order_rng_)},
          {"replay_rng", mem::rng_state(replay_rng_)},
          {"ssl_rng", mem::rng_state(ssl_rng_)},
          {"tasks_trained", tasks_trained_},
          {"logs", logs}};
}

void Learner::load_state(const nlohmann::json& j) {
  params_from_json(params_, j.at("params"));
  memory_ = mem::ShortTermMemory::from_json(j.at("memory"));
  importance_ = ImportanceMap::from_json(j.at("importance"));
  bic_ = BicCorrection::from_json(j.at("bic"));
  order_rng_ = mem::rng_from_state(j.at("order_rng").get<std::string>());
  replay_rng_ = mem::rng_from_state(j.at("replay_rng").get<std::string>());
  ssl_rng_ = mem::rng_from_state(j.at("ssl_rng").get<std::string>());
  tasks_trained_ = j.at("tasks_trained").get<std::size_t>();
  logs_.clear();
  for (const auto& l : j.at("logs")) logs_.push_back(TrainingLog::from_json(l));
}

}  // namespace vilco::cl
