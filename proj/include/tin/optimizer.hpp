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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "tin/error.hpp"
#include "tin/parameter.hpp"

namespace tin {

enum class OptimizerKind { kAdam, kAdagrad };

inline std::string optimizer_name(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "adagrad"; }

inline OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "adam") return OptimizerKind::kAdam;
  if (s == "adagrad") return OptimizerKind::kAdagrad;
  throw InputError("unknown optimizer '" + std::string(s) + "' (expected adam|adagrad)");
}

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One bias-corrected Adam update of `param` at timestep t >= 1. `scale`
// multiplies the raw gradient (1/batch for a mean gradient).
inline void adam_step(std::span<double> param, std::span<const double> grad, std::span<double> m,
                      std::span<double> v, std::uint64_t t, const OptimizerConfig& cfg,
                      double scale = 1.0) {
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] * scale;
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    param[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

inline void adagrad_step(std::span<double> param, std::span<const double> grad,
                         std::span<double> accum, const OptimizerConfig& cfg, double scale = 1.0) {
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double g = grad[i] * scale;
    accum[i] += g * g;
    param[i] -= cfg.learning_rate * g / (std::sqrt(accum[i]) + cfg.epsilon);
  }
}

// Applies accumulated gradients. Dense parameters update every entry each
// step; sparse parameters update only the rows touched since the last step
// (lazy moments, shared global timestep for bias correction).
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  const OptimizerConfig& config() const { return cfg_; }
  std::uint64_t timestep() const { return t_; }

  void step(std::span<Parameter> params, double grad_scale) {
    ++t_;
    for (Parameter& p : params) {
      if (p.slot_a.size() != p.value.size()) {
        p.slot_a = Dense(p.value.rows(), p.value.cols());
        p.slot_b = Dense(p.value.rows(), p.value.cols());
      }
      if (p.sparse) {
        for (std::size_t r : p.grad.touched_rows()) update_row(p, r, grad_scale);
      } else {
        for (std::size_t r = 0; r < p.value.rows(); ++r) update_row(p, r, grad_scale);
      }
    }
  }

 private:
  void update_row(Parameter& p, std::size_t r, double scale) {
    if (cfg_.kind == OptimizerKind::kAdam) {
      adam_step(p.value.row(r), p.grad.grad().row(r), p.slot_a.row(r), p.slot_b.row(r), t_, cfg_, scale);
    } else {
      adagrad_step(p.value.row(r), p.grad.grad().row(r), p.slot_a.row(r), cfg_, scale);
    }
  }

  OptimizerConfig cfg_;
  std::uint64_t t_ = 0;
};

}  // namespace tin
