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

#include "vilco/clictl/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <thread>

#include "vilco/datastream/features.hpp"
#include "vilco/datastream/manifest.hpp"
#include "vilco/datastream/stream.hpp"
#include "vilco/error.hpp"
#include "vilco/evalkit/evaluate.hpp"
#include "vilco/io.hpp"
#include "vilco/clictl/report.hpp"
#include "vilco/version.hpp"

namespace vilco::ctl {

namespace fs = std::filesystem;

namespace {

const char* kCheckpointFormat = "vilco-checkpoint";

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

nlohmann::json eval_config_to_json(const eval::EvalConfig& e) { return {{"ks", e.ks}, {"ious", e.ious}}; }

eval::EvalConfig eval_config_from_json(const nlohmann::json& j) {
  eval::EvalConfig e;
  if (j.contains("ks")) e.ks = j.at("ks").get<std::vector<std::size_t>>();
  if (j.contains("ious")) e.ious = j.at("ious").get<std::vector<double>>();
  e.validate();
  return e;
}

struct Prepared {
  data::Manifest manifest;
  data::TaskStream stream;
};

Prepared prepare_data(const ExperimentConfig& cfg) {
  Prepared p;
  if (cfg.synthetic) {
    data::SynthConfig sc = cfg.synth;
    sc.kind = cfg.task_kind;
    if (cfg.task_kind == data::TaskKind::MQ) sc.num_tasks = cfg.num_tasks;
    sc.seed = cfg.seed;
    sc.order_seed = cfg.order_seed;
    auto sd = data::synthesize_stream(sc);
    p.manifest = std::move(sd.manifest);
    p.stream = std::move(sd.stream);
    return p;
  }
  data::Manifest m = data::load_manifest(cfg.manifest);
  if (m.kind != cfg.task_kind) throw ConfigError("manifest task kind differs from task_kind");
  data::load_all_features(m);
  data::validate_manifest(m);
  auto part = cfg.task_kind == data::TaskKind::MQ
                  ? data::partition_videos(m, cfg.num_tasks)
                  : data::partition_videos(m, static_cast<std::size_t>(data::kNumNlqTemplates));
  p.manifest = std::move(part.manifest);
  data::StreamOptions opts;
  opts.num_tasks = cfg.num_tasks;
  opts.order_seed = cfg.order_seed;
  p.stream = data::build_task_stream(p.manifest, cfg.task_kind, opts);
  return p;
}

xm::FusionConfig fusion_for(const ExperimentConfig& cfg, const Prepared& p) {
  xm::FusionConfig f = cfg.fusion;
  if (p.manifest.features.empty()) throw ConfigError("no features available");
  f.video_dim = p.manifest.features.begin()->second.dim();
  f.num_classes = cl::required_classes(p.stream);
  for (const auto& t : p.stream.tasks) {
    for (const auto& it : t.train) {
      if (!it.query.query_tokens.empty()) {
        f.text_dim = it.query.query_tokens.front().size();
        return f;
      }
    }
  }
  throw ConfigError("no query tokens in the training data");
}

cl::StrategyConfig strategy_for(const ExperimentConfig& cfg) {
  cl::StrategyConfig s = cfg.strategy;
  s.method = cfg.method;
  s.seed = cfg.seed;
  s.replay_capacity = cfg.mem_capacity;
  return s;
}

fs::path checkpoint_path(const fs::path& dir, std::size_t tasks_done) {
  return dir / "checkpoints" / ("task_" + std::to_string(tasks_done) + ".ckpt");
}

void record_scores(ExperimentResult& r, std::size_t row, std::size_t col, const eval::TaskScores& s,
                   const eval::EvalConfig& ec) {
  for (auto k : ec.ks) {
    for (double m : ec.ious) r.matrices.at(eval::metric_label(k, m)).set(row, col, s.at(k, m));
    r.matrices.at(eval::metric_mean_label(k)).set(row, col, s.mean_over_iou.at(k));
  }
}

std::string summary_csv(const ExperimentResult& r) {
  std::ostringstream os;
  os << "method,task_kind,seed,order_seed,num_tasks,mem_capacity,bwf,avg_r1,avg_r5,status\n";
  os << r.method << ',' << data::to_string(r.task_kind) << ',' << r.seed << ',' << r.order_seed << ','
     << r.num_tasks << ',' << r.mem_capacity << ',' << fmt(r.headline_bwf()) << ','
     << fmt(r.headline_avg(1)) << ',' << fmt(r.headline_avg(5)) << ',' << r.status << '\n';
  return os.str();
}

void write_outputs(const ExperimentResult& r, const fs::path& dir) {
  write_file_atomic(dir / "result.json", r.to_json().dump(2));
  nlohmann::json mj = nlohmann::json::object();
  for (const auto& [label, m] : r.matrices) mj[label] = m.to_json();
  write_file_atomic(dir / "metrics.json", mj.dump(2));
  write_file_atomic(dir / "summary.csv", summary_csv(r));
  write_file_atomic(dir / "curve.csv", curve_rows_csv({r}));
}

}  // namespace

void ExperimentConfig::validate() const {
  if (num_tasks == 0) throw ConfigError("num_tasks must be >= 1");
  if (!synthetic) {
    if (manifest.empty()) throw ConfigError("a manifest path is required when synthetic is false");
    if (!fs::exists(manifest)) throw ConfigError("manifest not found: " + manifest.string());
  }
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
  fusion.validate();
  strategy.validate();
  eval.validate();
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  return {{"task_kind", data::to_string(c.task_kind)},
          {"method", cl::to_string(c.method)},
          {"seed", c.seed},
          {"order_seed", c.order_seed},
          {"mem_capacity", c.mem_capacity},
          {"num_tasks", c.num_tasks},
          {"data", {{"synthetic", c.synthetic}, {"manifest", c.manifest.string()}}},
          {"synth", data::synth_config_to_json(c.synth)},
          {"fusion", xm::fusion_config_to_json(c.fusion)},
          {"strategy", cl::strategy_config_to_json(c.strategy)},
          {"eval", eval_config_to_json(c.eval)},
          {"output_dir", c.output_dir.string()}};
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"task_kind", "method", "seed",  "order_seed", "mem_capacity",
                                              "num_tasks", "data",   "synth", "fusion",     "strategy",
                                              "eval",      "output_dir"};
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (known.count(k) == 0) throw ConfigError("unknown config key '" + k + "'");
  }
  try {
    ExperimentConfig c;
    if (j.contains("task_kind")) c.task_kind = data::task_kind_from_string(j.at("task_kind").get<std::string>());
    if (j.contains("method")) c.method = cl::method_from_string(j.at("method").get<std::string>());
    c.seed = j.value("seed", c.seed);
    c.order_seed = j.value("order_seed", c.order_seed);
    c.mem_capacity = j.value("mem_capacity", c.mem_capacity);
    c.num_tasks = j.value("num_tasks", c.num_tasks);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.synthetic = d.value("synthetic", c.synthetic);
      c.manifest = d.value("manifest", std::string());
    }
    if (j.contains("synth")) c.synth = data::synth_config_from_json(j.at("synth"), c.synth);
    if (j.contains("fusion")) c.fusion = xm::fusion_config_from_json(j.at("fusion"), c.fusion);
    if (j.contains("strategy")) c.strategy = cl::strategy_config_from_json(j.at("strategy"), c.strategy);
    if (j.contains("eval")) c.eval = eval_config_from_json(j.at("eval"));
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config not found: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  auto c = experiment_config_from_json(j);
  // Relative manifest paths resolve against the config's directory.
  if (!c.manifest.empty() && c.manifest.is_relative()) c.manifest = path.parent_path() / c.manifest;
  return c;
}

ExperimentConfig standard_synthetic_config(cl::Method method, std::uint64_t seed) {
  ExperimentConfig c;
  c.task_kind = data::TaskKind::MQ;
  c.method = method;
  c.seed = seed;
  c.num_tasks = 5;
  c.mem_capacity = 1010;
  c.synth.cats_per_task = 22;
  c.synth.videos_per_task = 60;
  c.synth.steps = 32;
  c.synth.video_dim = 128;
  c.synth.text_dim = 32;
  c.synth.windows_min = 3;
  c.synth.windows_max = 5;
  c.synth.distractor_prob = 1.0;
  c.fusion.model_dim = 32;
  c.fusion.heads = 4;
  c.fusion.fusion_layers = 1;
  c.fusion.pyramid_levels = 3;
  c.strategy.epochs = 15;
  c.strategy.batch_size = 2;
  c.strategy.optim.lr = 3e-3;
  return c;
}

std::vector<double> ExperimentResult::avg_performance(const std::string& label) const {
  const auto& m = matrices.at(label);
  std::vector<double> out;
  for (std::size_t i = 1; i <= m.complete_rows(); ++i) out.push_back(eval::avg_performance(m, i));
  return out;
}

std::vector<double> ExperimentResult::forgetting(const std::string& label) const {
  const auto& m = matrices.at(label);
  std::vector<double> out;
  for (std::size_t i = 1; i <= m.complete_rows(); ++i) {
    out.push_back(i == 1 ? std::nan("") : eval::backward_forgetting(m, i));
  }
  return out;
}

double ExperimentResult::headline_bwf() const {
  auto f = forgetting(eval::metric_mean_label(1));
  return f.empty() ? std::nan("") : f.back();
}

double ExperimentResult::headline_avg(std::size_t k) const {
  const auto label = eval::metric_mean_label(k);
  if (matrices.count(label) == 0) return std::nan("");
  auto p = avg_performance(label);
  return p.empty() ? std::nan("") : p.back();
}

nlohmann::json ExperimentResult::to_json() const {
  auto num_or_null = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json mats = nlohmann::json::object(), perf = nlohmann::json::object(),
                 bwf = nlohmann::json::object();
  for (const auto& [label, m] : matrices) {
    mats[label] = m.to_json();
    perf[label] = avg_performance(label);
    nlohmann::json f = nlohmann::json::array();
    for (double v : forgetting(label)) f.push_back(num_or_null(v));
    bwf[label] = f;
  }
  nlohmann::json logs_j = nlohmann::json::array();
  for (const auto& l : logs) logs_j.push_back(l.to_json());
  return {{"schema_version", kResultSchemaVersion},
          {"engine_version", kEngineVersion},
          {"status", status},
          {"message", message},
          {"task_kind", data::to_string(task_kind)},
          {"method", method},
          {"seed", seed},
          {"order_seed", order_seed},
          {"mem_capacity", mem_capacity},
          {"num_tasks", num_tasks},
          {"task_order", task_order},
          {"metrics", mats},
          {"avg_performance", perf},
          {"backward_forgetting", bwf},
          {"headline", {{"bwf", num_or_null(headline_bwf())},
                        {"avg_r1", num_or_null(headline_avg(1))},
                        {"avg_r5", num_or_null(headline_avg(5))}}},
          {"loss_curves", logs_j},
          {"wall_clock_s", wall_clock_s},
          {"config", config}};
}

ExperimentResult ExperimentResult::from_json(const nlohmann::json& j) {
  if (j.value("schema_version", 0) != kResultSchemaVersion) {
    throw FormatError("unsupported result schema version");
  }
  ExperimentResult r;
  r.status = j.at("status").get<std::string>();
  r.message = j.value("message", "");
  r.config = j.at("config");
  r.task_kind = data::task_kind_from_string(j.at("task_kind").get<std::string>());
  r.method = j.at("method").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.order_seed = j.at("order_seed").get<std::uint64_t>();
  r.mem_capacity = j.at("mem_capacity").get<std::size_t>();
  r.num_tasks = j.at("num_tasks").get<std::size_t>();
  r.task_order = j.at("task_order").get<std::vector<int>>();
  for (const auto& [label, m] : j.at("metrics").items()) r.matrices.emplace(label, eval::MetricsMatrix::from_json(m));
  for (const auto& l : j.at("loss_curves")) r.logs.push_back(cl::TrainingLog::from_json(l));
  r.wall_clock_s = j.value("wall_clock_s", 0.0);
  return r;
}

std::size_t threads_from_env() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VILCO_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) throw ConfigError("VILCO_THREADS must be a positive integer");
    n = static_cast<std::size_t>(v);
  }
  return n;
}

void save_checkpoint(const fs::path& path, const nlohmann::json& payload) {
  nlohmann::json stamped = payload;
  stamped["format"] = kCheckpointFormat;
  stamped["version"] = kCheckpointVersion;
  const auto bytes = nlohmann::json::to_cbor(stamped);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

nlohmann::json load_checkpoint(const fs::path& path) {
  const auto raw = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::from_cbor(std::vector<std::uint8_t>(raw.begin(), raw.end()));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw FormatError(path.string() + " is not a vilco checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
  return j;
}

void check_checkpoint_compatible(const nlohmann::json& ckpt, const xm::FusionConfig& fusion,
                                 const nlohmann::json& config_echo) {
  if (xm::fusion_config_from_json(ckpt.at("fusion")) != fusion) {
    throw ConfigError("checkpoint fusion config differs from the requested model");
  }
  if (ckpt.at("config") != config_echo) throw ConfigError("checkpoint was written for a different config");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunControl& ctl) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  Prepared prep = prepare_data(cfg);
  const xm::FusionConfig fusion = fusion_for(cfg, prep);
  cl::Learner learner(prep.stream, prep.manifest, fusion, strategy_for(cfg));

  ExperimentResult r;
  r.config = experiment_config_to_json(cfg);
  r.config.erase("output_dir");  // results are identical wherever they are written
  r.task_kind = cfg.task_kind;
  r.method = cl::to_string(cfg.method);
  r.seed = cfg.seed;
  r.order_seed = cfg.order_seed;
  r.mem_capacity = learner.config().uses_memory() ? cfg.mem_capacity : 0;
  const std::size_t n = prep.stream.tasks.size();
  r.num_tasks = n;
  for (const auto& t : prep.stream.tasks) r.task_order.push_back(t.index);
  for (auto k : cfg.eval.ks) {
    for (double m : cfg.eval.ious) r.matrices.emplace(eval::metric_label(k, m), eval::MetricsMatrix(n));
    r.matrices.emplace(eval::metric_mean_label(k), eval::MetricsMatrix(n));
  }

  std::size_t start = 0;
  if (ctl.resume) {
    for (std::size_t done = n; done >= 1; --done) {
      const auto path = checkpoint_path(cfg.output_dir, done);
      if (!fs::exists(path)) continue;
      auto ck = load_checkpoint(path);
      check_checkpoint_compatible(ck, fusion, r.config);
      learner.load_state(ck.at("state"));
      for (const auto& [label, m] : ck.at("metrics").items()) r.matrices[label] = eval::MetricsMatrix::from_json(m);
      start = done;
      break;
    }
  }

  try {
    for (std::size_t i = start; i < n; ++i) {
      if (i >= ctl.stop_after) break;
      auto log = learner.train_task(i);
      for (std::size_t j = 0; j <= i; ++j) {
        record_scores(r, i + 1, j + 1, learner.evaluate(j, cfg.eval, ctl.threads), cfg.eval);
      }
      nlohmann::json mats = nlohmann::json::object();
      for (const auto& [label, m] : r.matrices) mats[label] = m.to_json();
      save_checkpoint(checkpoint_path(cfg.output_dir, i + 1),
                      {{"format", kCheckpointFormat},
                       {"version", kCheckpointVersion},
                       {"engine_version", kEngineVersion},
                       {"config", r.config},
                       {"fusion", xm::fusion_config_to_json(fusion)},
                       {"tasks_done", i + 1},
                       {"metrics", mats},
                       {"state", learner.state_to_json()}});
      if (!ctl.quiet) {
        std::fprintf(stderr, "[%s] task %zu/%zu done, last loss %.4f\n", r.method.c_str(), i + 1, n,
                     log.epoch_loss.empty() ? 0.0 : log.epoch_loss.back());
      }
    }
  } catch (const NumericalError& e) {
    r.status = "numerical_abort";
    r.message = e.what();
    r.logs = learner.logs();
    r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(r, cfg.output_dir);
    throw;
  }
  r.logs = learner.logs();
  if (learner.tasks_trained() < n) {
    r.status = "partial";
    r.message = "stopped after " + std::to_string(learner.tasks_trained()) + " tasks";
  }
  r.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_outputs(r, cfg.output_dir);
  return r;
}

}  // namespace vilco::ctl
