/*
 * Copyright 2026 The TIN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/model.hpp"
#include "tin/optimizer.hpp"

namespace tin {

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t epochs = 1;
  std::uint64_t seed = 1;
  bool shuffle = true;
  std::size_t eval_every = 0;  // batches between callbacks; 0 disables
  std::size_t threads = 1;
  OptimizerConfig optimizer;

  void validate() const {
    if (batch_size == 0) throw InputError("batch_size must be at least 1");
    if (epochs == 0) throw InputError("epochs must be at least 1");
    if (threads == 0) throw InputError("threads must be at least 1");
    if (!(optimizer.learning_rate >= 0.0)) throw InputError("learning_rate must be non-negative");
  }
};

struct TrainResult {
  std::vector<double> batch_loss;  // mean loss of each applied batch
  std::uint64_t steps = 0;
};

// Called every eval_every batches with the number of batches applied so far.
using TrainCallback = std::function<void(const Model&, std::uint64_t step)>;

// Mini-batch training on the mean per-sample cross-entropy. With threads > 1
// each worker accumulates a contiguous slice of the batch into its own
// buffers; buffers are merged in worker order, so results are reproducible
// for a fixed thread count. threads == 1 is the reference path.
inline TrainResult train(Model& model, std::span<const Sample> data, const TrainConfig& cfg,
                         const TrainCallback& callback = {}) {
  cfg.validate();
  if (data.empty()) throw DataError("train: empty training set");

  std::mt19937_64 rng(cfg.seed);
  Optimizer opt(cfg.optimizer);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  std::span<Parameter> params = model.parameters();
  const std::vector<GradAccumulator*> own = model.own_sinks();
  for (Parameter& p : params) p.grad.clear();

  const std::size_t n_workers = std::min(cfg.threads, cfg.batch_size);
  std::vector<std::vector<GradAccumulator>> local;
  std::vector<std::vector<GradAccumulator*>> local_sinks;
  if (n_workers > 1) {
    local.resize(n_workers);
    local_sinks.resize(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      for (const Parameter& p : params) local[w].emplace_back(p.value.rows(), p.value.cols());
      for (GradAccumulator& a : local[w]) local_sinks[w].push_back(&a);
    }
  }

  TrainResult result;
  std::size_t batch_index = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (cfg.shuffle) std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(start + cfg.batch_size, order.size());
      const std::size_t n = end - start;
      double total = 0.0;
      if (n_workers <= 1 || n < n_workers) {
        for (std::size_t k = start; k < end; ++k) total += model.loss_and_grad(data[order[k]], own);
      } else {
        std::vector<double> partial(n_workers, 0.0);
        std::vector<std::exception_ptr> errors(n_workers);
        {
          std::vector<std::jthread> pool;
          for (std::size_t w = 0; w < n_workers; ++w) {
            const std::size_t lo = start + n * w / n_workers;
            const std::size_t hi = start + n * (w + 1) / n_workers;
            pool.emplace_back([&, w, lo, hi] {
              try {
                for (std::size_t k = lo; k < hi; ++k) {
                  partial[w] += model.loss_and_grad(data[order[k]], local_sinks[w]);
                }
              } catch (...) {
                errors[w] = std::current_exception();
              }
            });
          }
        }
        for (auto& e : errors) {
          if (e) std::rethrow_exception(e);
        }
        for (std::size_t w = 0; w < n_workers; ++w) {
          total += partial[w];
          for (std::size_t p = 0; p < params.size(); ++p) {
            params[p].grad.merge(local[w][p]);
            local[w][p].clear();
          }
        }
      }
      const double mean = total / static_cast<double>(n);
      if (!std::isfinite(mean)) {
        throw NumericError("train: non-finite loss in epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch_index));
      }
      opt.step(params, 1.0 / static_cast<double>(n));
      for (Parameter& p : params) p.grad.clear();
      result.batch_loss.push_back(mean);
      ++result.steps;
      if (callback && cfg.eval_every > 0 && result.steps % cfg.eval_every == 0) {
        callback(model, result.steps);
      }
    }
  }
  return result;
}

}  // namespace tin
