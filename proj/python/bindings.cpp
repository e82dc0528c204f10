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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "vilco/clictl/experiment.hpp"
#include "vilco/clictl/gradcheck.hpp"
#include "vilco/clictl/report.hpp"
#include "vilco/datastream/features.hpp"
#include "vilco/error.hpp"
#include "vilco/evalkit/metrics.hpp"
#include "vilco/version.hpp"

namespace py = pybind11;
using namespace vilco;

namespace {

nlohmann::json to_json(const py::object& o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

py::object from_json(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

data::Window window(const std::pair<double, double>& w) { return {w.first, w.second}; }

std::vector<std::vector<data::Window>> windows(const std::vector<std::vector<std::pair<double, double>>>& v) {
  std::vector<std::vector<data::Window>> out;
  for (const auto& row : v) {
    auto& o = out.emplace_back();
    for (const auto& w : row) o.push_back(window(w));
  }
  return out;
}

// Lower-triangular rows: rows[i-1] holds p(i, 1..i).
eval::MetricsMatrix matrix(const std::vector<std::vector<double>>& rows) {
  eval::MetricsMatrix m(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != i + 1) throw ConfigError("row " + std::to_string(i + 1) + " needs " +
                                                   std::to_string(i + 1) + " entries");
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i + 1, j + 1, rows[i][j]);
  }
  return m;
}

ctl::ExperimentConfig config_of(const py::object& cfg) {
  if (py::isinstance<py::dict>(cfg)) return ctl::experiment_config_from_json(to_json(cfg));
  return ctl::load_experiment_config(cfg.cast<std::filesystem::path>());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Query-incremental video-language continual learning engine";
  m.attr("__version__") = kEngineVersion;

  auto base = py::register_exception<Error>(m, "VilcoError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());

  m.def("interval_iou", [](std::pair<double, double> a, std::pair<double, double> b) {
    return eval::interval_iou(window(a), window(b));
  });
  m.def(
      "recall_at_k",
      [](const std::vector<std::vector<std::pair<double, double>>>& pred,
         const std::vector<std::vector<std::pair<double, double>>>& gt, std::size_t k, double iou) {
        return eval::recall_at_k(windows(pred), windows(gt), k, iou);
      },
      py::arg("predictions"), py::arg("ground_truth"), py::arg("k"), py::arg("iou"));
  m.def("avg_performance", [](const std::vector<std::vector<double>>& rows, std::size_t i) {
    return eval::avg_performance(matrix(rows), i);
  });
  m.def("backward_forgetting", [](const std::vector<std::vector<double>>& rows, std::size_t i) {
    return eval::backward_forgetting(matrix(rows), i);
  });

  m.def(
      "load_features",
      [](const std::filesystem::path& path) {
        auto seq = data::load_features(path);
        py::array_t<double> a({seq.length(), seq.dim()});
        std::copy(seq.data.data().begin(), seq.data.data().end(), a.mutable_data());
        return py::make_tuple(a, seq.clip_stride_s);
      },
      "Returns (T x D float64 array, clip stride in seconds).");
  m.def(
      "save_features",
      [](const std::filesystem::path& path, py::array_t<double, py::array::c_style | py::array::forcecast> a,
         double stride) {
        if (a.ndim() != 2) throw ShapeError("features must be a 2-D array");
        data::FeatureSequence seq;
        seq.clip_stride_s = stride;
        seq.data = num::Tensor(num::Shape{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1))});
        std::copy(a.data(), a.data() + a.size(), seq.data.data().begin());
        data::save_features(path, seq);
      },
      py::arg("path"), py::arg("features"), py::arg("clip_stride_s") = 1.0);

  m.def("standard_config", [](const std::string& method, std::uint64_t seed) {
    return from_json(ctl::experiment_config_to_json(
        ctl::standard_synthetic_config(cl::method_from_string(method), seed)));
  }, py::arg("method") = "vilco", py::arg("seed") = 0);

  m.def(
      "run",
      [](const py::object& config, std::optional<std::string> method, std::optional<std::uint64_t> seed,
         std::optional<std::uint64_t> order_seed, std::optional<std::size_t> mem_capacity,
         std::optional<std::filesystem::path> out, bool resume, std::optional<std::size_t> threads) {
        auto cfg = config_of(config);
        if (method) cfg.method = cl::method_from_string(*method);
        if (seed) cfg.seed = *seed;
        if (order_seed) cfg.order_seed = *order_seed;
        if (mem_capacity) cfg.mem_capacity = *mem_capacity;
        if (out) cfg.output_dir = *out;
        cfg.validate();
        ctl::RunControl ctl;
        ctl.resume = resume;
        ctl.threads = threads ? *threads : ctl::threads_from_env();
        ctl::ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = ctl::run_experiment(cfg, ctl);
        }
        return from_json(r.to_json());
      },
      py::arg("config"), py::arg("method") = py::none(), py::arg("seed") = py::none(),
      py::arg("order_seed") = py::none(), py::arg("mem_capacity") = py::none(), py::arg("out") = py::none(),
      py::arg("resume") = true, py::arg("threads") = py::none(),
      "Runs one experiment from a config dict or JSON path; returns the result document.");

  m.def(
      "report",
      [](const std::vector<std::filesystem::path>& dirs, const std::filesystem::path& out) {
        const auto f = ctl::emit_report(ctl::load_results(dirs), out);
        py::dict d;
        d["table_md"] = f.table_md.string();
        d["table_csv"] = f.table_csv.string();
        d["curves_csv"] = f.curves_csv.string();
        return d;
      },
      py::arg("inputs"), py::arg("out"));

  m.def(
      "gradcheck",
      [](std::size_t configs, std::uint64_t seed, double tol) {
        py::list out;
        for (const auto& e : ctl::run_gradcheck_suite(configs, seed, tol)) {
          py::dict d;
          d["loss"] = e.loss;
          d["configs"] = e.configs;
          d["failures"] = e.failures;
          d["worst"] = e.worst;
          d["worst_param"] = e.worst_param;
          out.append(d);
        }
        return out;
      },
      py::arg("configs") = 50, py::arg("seed") = 0, py::arg("tol") = 1e-4);
}
