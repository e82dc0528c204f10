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

#include <filesystem>
#include <string>
#include <vector>

#include "vilco/clictl/experiment.hpp"

namespace vilco::ctl {

/// One table row: all runs of a method, metrics averaged over runs.
struct MethodRow {
  std::string method;
  std::size_t num_tasks = 0;
  std::size_t mem_capacity = 0;  // 0 for memoryless methods, printed as "-"
  double bwf = 0.0;
  double avg_r1 = 0.0;
  double avg_r5 = 0.0;
  std::size_t runs = 0;
};

/// Groups by method, sorted by method name. Throws ConfigError on mixed task
/// kinds or an empty input.
std::vector<MethodRow> aggregate_results(const std::vector<ExperimentResult>& results);

/// Markdown table with columns Method, Num. Task, Mem. Capacity, BwF↓,
/// Avg R@1, Avg R@5, Runs.
std::string render_markdown(const std::vector<MethodRow>& rows);
/// Same columns as CSV.
std::string render_table_csv(const std::vector<MethodRow>& rows);

/// Plot data, one row per (run, task index, metric):
/// method,seed,order_seed,task,metric,value with metric in {bwf, avg_r1}.
/// BwF at task 1 is undefined and left empty.
std::string curve_rows_csv(const std::vector<ExperimentResult>& results);

/// Reads result.json from each directory, or from its immediate
/// subdirectories when the directory itself holds none.
std::vector<ExperimentResult> load_results(const std::vector<std::filesystem::path>& dirs);

struct ReportFiles {
  std::filesystem::path table_md;
  std::filesystem::path table_csv;
  std::filesystem::path curves_csv;
};

/// Writes `out` (markdown), `<stem>.csv` and `<stem>_curves.csv` next to it.
ReportFiles emit_report(const std::vector<ExperimentResult>& results, const std::filesystem::path& out);

}  // namespace vilco::ctl
