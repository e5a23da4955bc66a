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

#include <cstddef>
#include <random>
#include <string>
#include <utility>

#include "tin/tensor.hpp"

namespace tin {

// A named trainable tensor with its gradient accumulator and two optimizer
// slots (Adam m/v, or the Adagrad accumulator in `slot_a`). Sparse parameters
// are updated only on rows that received a gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name_, std::size_t rows, std::size_t cols, bool sparse_)
      : name(std::move(name_)), value(rows, cols), grad(rows, cols), sparse(sparse_) {}

  std::string name;
  Dense value;
  GradAccumulator grad;
  Dense slot_a;
  Dense slot_b;
  bool sparse = false;
};

inline void init_uniform(Dense& d, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : d.values()) v = dist(rng);
}

}  // namespace tin
