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

#include "vilco/evalkit/evaluate.hpp"

#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "vilco/error.hpp"

namespace vilco::eval {

double TaskScores::at(std::size_t k, double m) const {
  auto it = recall.find({k, m});
  if (it == recall.end()) throw ConfigError("no score for " + metric_label(k, m));
  return it->second;
}

TaskScores evaluate_task(const Predictor& predict, const std::vector<data::TaskItem>& items,
                         const EvalConfig& cfg, std::size_t threads) {
  cfg.validate();
  if (items.empty()) throw ConfigError("evaluate_task: empty evaluation split");
  std::vector<std::vector<data::Window>> preds(items.size()), gts(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) gts[i] = items[i].query.windows;

  threads = std::max<std::size_t>(1, std::min(threads, items.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) preds[i] = predict(items[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) {
          try {
            preds[i] = predict(items[i]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mu);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  TaskScores out;
  for (auto k : cfg.ks) {
    double sum = 0.0;
    for (double m : cfg.ious) {
      const double r = recall_at_k(preds, gts, k, m);
      out.recall[{k, m}] = r;
      sum += r;
    }
    out.mean_over_iou[k] = sum / static_cast<double>(cfg.ious.size());
  }
  return out;
}

std::string metric_label(std::size_t k, double m) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "R@%zu,IoU=%g", k, m);
  return buf;
}

std::string metric_mean_label(std::size_t k) { return "R@" + std::to_string(k) + ",mean"; }

}  // namespace vilco::eval
