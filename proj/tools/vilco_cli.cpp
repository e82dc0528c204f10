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

// vilco: run continual-learning experiments, aggregate reports, check gradients.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

#include "vilco/clictl/experiment.hpp"
#include "vilco/clictl/gradcheck.hpp"
#include "vilco/clictl/report.hpp"
#include "vilco/error.hpp"
#include "vilco/version.hpp"

using namespace vilco;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct RunArgs {
  std::string config;
  std::string method;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> order_seed;
  std::optional<std::size_t> mem_capacity;
  bool synthetic = false;
  std::string out;
  bool fresh = false;
  bool verbose = false;
  std::optional<std::size_t> stop_after;
};

int cmd_run(const RunArgs& a) {
  auto cfg = ctl::load_experiment_config(a.config);
  if (!a.method.empty()) cfg.method = cl::method_from_string(a.method);
  if (a.seed) cfg.seed = *a.seed;
  if (a.order_seed) cfg.order_seed = *a.order_seed;
  if (a.mem_capacity) cfg.mem_capacity = *a.mem_capacity;
  if (a.synthetic) cfg.synthetic = true;
  if (!a.out.empty()) cfg.output_dir = a.out;

  ctl::RunControl ctl;
  ctl.resume = !a.fresh;
  ctl.quiet = !a.verbose;
  ctl.threads = ctl::threads_from_env();
  if (a.stop_after) ctl.stop_after = *a.stop_after;
  const auto r = ctl::run_experiment(cfg, ctl);
  std::printf("%s %s: BwF %.2f  Avg R@1 %.2f  Avg R@5 %.2f  (%s, %.1f s) -> %s\n", r.method.c_str(),
              data::to_string(r.task_kind).c_str(), r.headline_bwf(), r.headline_avg(1), r.headline_avg(5),
              r.status.c_str(), r.wall_clock_s, cfg.output_dir.string().c_str());
  return kExitOk;
}

int cmd_report(const std::vector<std::string>& in, const std::string& out) {
  std::vector<std::filesystem::path> dirs(in.begin(), in.end());
  const auto results = ctl::load_results(dirs);
  const auto files = ctl::emit_report(results, out);
  std::cout << ctl::render_markdown(ctl::aggregate_results(results));
  std::printf("wrote %s, %s, %s\n", files.table_md.string().c_str(), files.table_csv.string().c_str(),
              files.curves_csv.string().c_str());
  return kExitOk;
}

int cmd_gradcheck(std::size_t configs, std::uint64_t seed, double tol) {
  bool ok = true;
  for (const auto& e : ctl::run_gradcheck_suite(configs, seed, tol)) {
    std::printf("%-14s %3zu configs  %3zu failed  worst rel err %.3e (%s)\n", e.loss.c_str(), e.configs,
                e.failures, e.worst, e.worst_param.c_str());
    ok = ok && e.failures == 0;
  }
  std::printf("%s\n", ok ? "gradcheck passed" : "gradcheck FAILED");
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Query-incremental video-language continual learning"};
  app.set_version_flag("--version", std::string(kEngineVersion));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Train and evaluate one method over a task stream");
  run_cmd->add_option("--config", run.config, "Experiment config JSON")->required();
  run_cmd->add_option("--method", run.method, "naive|joint|ewc|mas|replay|bic|vilco");
  run_cmd->add_option("--seed", run.seed, "Model and data seed");
  run_cmd->add_option("--order-seed", run.order_seed, "Sub-task order seed");
  run_cmd->add_option("--mem-capacity", run.mem_capacity, "Short-term memory capacity");
  run_cmd->add_flag("--synthetic", run.synthetic, "Use the synthetic stream instead of a manifest");
  run_cmd->add_option("--out", run.out, "Output directory");
  run_cmd->add_flag("--fresh", run.fresh, "Ignore existing checkpoints");
  run_cmd->add_flag("-v,--verbose", run.verbose, "Print progress per task");
  run_cmd->add_option("--stop-after", run.stop_after, "Stop after this many tasks");

  std::vector<std::string> report_in;
  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Aggregate run directories into a table and curves");
  report_cmd->add_option("--in", report_in, "Run directories (or parents of run directories)")->required();
  report_cmd->add_option("--out", report_out, "Markdown table path")->required();

  std::size_t gc_configs = 50;
  std::uint64_t gc_seed = 0;
  double gc_tol = 1e-4;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference checks of every training loss");
  gc_cmd->add_option("--configs", gc_configs, "Random configurations per loss");
  gc_cmd->add_option("--seed", gc_seed, "Seed");
  gc_cmd->add_option("--tol", gc_tol, "Relative tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*report_cmd) return cmd_report(report_in, report_out);
    if (*gc_cmd) return cmd_gradcheck(gc_configs, gc_seed, gc_tol);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical abort: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
