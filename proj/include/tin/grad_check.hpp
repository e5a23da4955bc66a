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
#include <functional>
#include <span>
#include <string>

#include "tin/error.hpp"
#include "tin/tensor.hpp"

namespace tin {

// A trainable tensor together with the analytic gradient to be verified.
struct CheckedParam {
  std::string name;
  Dense* value = nullptr;
  const Dense* analytic = nullptr;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t n_checked = 0;
  std::string worst;  // "name[index]" of the worst entry
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool passed = true;
};

// Relative error with a floor on the denominator so that entries where both
// gradients vanish compare on absolute terms.
inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

// Central differences (f(x+h) - f(x-h)) / 2h for every scalar of every
// parameter, compared against the analytic gradients. `loss` must be a
// deterministic function of the parameters' current values.
inline GradCheckReport grad_check(std::span<const CheckedParam> params,
                                  const std::function<double()>& loss, double step, double tol,
                                  double floor = 1e-8) {
  if (!(step > 0.0)) throw InputError("grad_check: step must be positive");
  GradCheckReport report;
  auto eval = [&](const std::string& where) {
    const double f = loss();
    if (!std::isfinite(f)) throw NumericError("grad_check: non-finite forward value at " + where);
    return f;
  };
  eval("base point");
  for (const CheckedParam& p : params) {
    if (!p.value || !p.analytic || !p.value->same_shape(*p.analytic)) {
      throw DimensionError("grad_check: parameter '" + p.name + "' has no matching gradient");
    }
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      const std::string where = p.name + "[" + std::to_string(i) + "]";
      double& x = (*p.value)[i];
      const double saved = x;
      x = saved + step;
      const double fp = eval(where);
      x = saved - step;
      const double fm = eval(where);
      x = saved;
      const double numeric = (fp - fm) / (2.0 * step);
      const double analytic = (*p.analytic)[i];
      const double err = relative_error(analytic, numeric, floor);
      ++report.n_checked;
      if (err > report.max_rel_error || report.worst.empty()) {
        report.max_rel_error = std::max(report.max_rel_error, err);
        if (err >= report.max_rel_error) {
          report.worst = where;
          report.worst_analytic = analytic;
          report.worst_numeric = numeric;
        }
      }
    }
  }
  report.passed = report.max_rel_error < tol;
  return report;
}

}  // namespace tin
