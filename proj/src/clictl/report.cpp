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

#include "vilco/clictl/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "vilco/error.hpp"
#include "vilco/evalkit/metrics.hpp"
#include "vilco/io.hpp"

namespace vilco::ctl {

namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string capacity(const MethodRow& r) { return r.mem_capacity == 0 ? "-" : std::to_string(r.mem_capacity); }

const std::vector<std::string> kHeaders = {"Method", "Num. Task", "Mem. Capacity", "BwF↓",
                                           "Avg R@1", "Avg R@5", "Runs"};

std::vector<std::string> cells(const MethodRow& r) {
  return {r.method,          std::to_string(r.num_tasks), capacity(r),
          fixed(r.bwf, 2),   fixed(r.avg_r1, 2),          fixed(r.avg_r5, 2),
          std::to_string(r.runs)};
}

}  // namespace

std::vector<MethodRow> aggregate_results(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw ConfigError("report: no results");
  for (const auto& r : results) {
    if (r.task_kind != results.front().task_kind) throw ConfigError("report: results mix MQ and NLQ runs");
  }
  std::map<std::string, MethodRow> rows;
  for (const auto& r : results) {
    auto& row = rows[r.method];
    if (row.runs > 0 && (row.num_tasks != r.num_tasks || row.mem_capacity != r.mem_capacity)) {
      throw ConfigError("report: runs of '" + r.method + "' differ in task count or memory capacity");
    }
    row.method = r.method;
    row.num_tasks = r.num_tasks;
    row.mem_capacity = r.mem_capacity;
    row.bwf += r.headline_bwf();
    row.avg_r1 += r.headline_avg(1);
    row.avg_r5 += r.headline_avg(5);
    ++row.runs;
  }
  std::vector<MethodRow> out;
  for (auto& [name, row] : rows) {
    const double n = static_cast<double>(row.runs);
    row.bwf /= n;
    row.avg_r1 /= n;
    row.avg_r5 /= n;
    out.push_back(row);
  }
  return out;
}

std::string render_markdown(const std::vector<MethodRow>& rows) {
  std::ostringstream os;
  os << '|';
  for (const auto& h : kHeaders) os << ' ' << h << " |";
  os << "\n|";
  for (std::size_t i = 0; i < kHeaders.size(); ++i) os << (i == 0 ? " --- |" : " ---: |");
  os << '\n';
  for (const auto& r : rows) {
    os << '|';
    for (const auto& c : cells(r)) os << ' ' << c << " |";
    os << '\n';
  }
  return os.str();
}

std::string render_table_csv(const std::vector<MethodRow>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < kHeaders.size(); ++i) os << (i ? "," : "") << kHeaders[i];
  os << '\n';
  for (const auto& r : rows) {
    const auto c = cells(r);
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << '\n';
  }
  return os.str();
}

std::string curve_rows_csv(const std::vector<ExperimentResult>& results) {
  std::ostringstream os;
  os << "method,seed,order_seed,task,metric,value\n";
  const std::string label = eval::metric_mean_label(1);
  for (const auto& r : results) {
    if (r.matrices.count(label) == 0) continue;
    const auto bwf = r.forgetting(label);
    const auto avg = r.avg_performance(label);
    for (std::size_t i = 0; i < avg.size(); ++i) {
      const std::string prefix =
          r.method + ',' + std::to_string(r.seed) + ',' + std::to_string(r.order_seed) + ',' + std::to_string(i + 1);
      os << prefix << ",bwf," << fixed(bwf[i], 6) << '\n';
      os << prefix << ",avg_r1," << fixed(avg[i], 6) << '\n';
    }
  }
  return os.str();
}

std::vector<ExperimentResult> load_results(const std::vector<fs::path>& dirs) {
  auto load_one = [](const fs::path& p) {
    try {
      return ExperimentResult::from_json(nlohmann::json::parse(read_file(p)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("cannot read " + p.string() + ": " + e.what());
    }
  };
  std::vector<ExperimentResult> out;
  for (const auto& d : dirs) {
    if (!fs::is_directory(d)) throw ConfigError("report input is not a directory: " + d.string());
    if (fs::exists(d / "result.json")) {
      out.push_back(load_one(d / "result.json"));
      continue;
    }
    std::vector<fs::path> subs;
    for (const auto& e : fs::directory_iterator(d)) {
      if (e.is_directory() && fs::exists(e.path() / "result.json")) subs.push_back(e.path() / "result.json");
    }
    if (subs.empty()) throw ConfigError("no result.json under " + d.string());
    std::sort(subs.begin(), subs.end());
    for (const auto& p : subs) out.push_back(load_one(p));
  }
  return out;
}

ReportFiles emit_report(const std::vector<ExperimentResult>& results, const fs::path& out) {
  const auto rows = aggregate_results(results);
  ReportFiles f;
  f.table_md = out;
  const auto stem = out.parent_path() / out.stem();
  f.table_csv = stem.string() + ".csv";
  f.curves_csv = stem.string() + "_curves.csv";
  if (f.table_csv == f.table_md) f.table_csv = stem.string() + "_table.csv";
  write_file_atomic(f.table_md, render_markdown(rows));
  write_file_atomic(f.table_csv, render_table_csv(rows));
  write_file_atomic(f.curves_csv, curve_rows_csv(results));
  return f;
}

}  // namespace vilco::ctl
