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
#include <random>
#include <span>
#include <vector>

#include "tin/error.hpp"
#include "tin/tape.hpp"
#include "tin/tensor.hpp"

namespace tin {

struct DenseLayer {
  Dense weight;  // fan_in x fan_out
  Dense bias;    // 1 x fan_out
};

// Layer shapes for input width `n_in`, the given hidden widths and a scalar
// output. Weights are drawn from U(+-sqrt(6 / (fan_in + fan_out))), biases 0.
inline std::vector<DenseLayer> make_mlp(std::size_t n_in, std::span<const std::size_t> hidden,
                                        std::mt19937_64& rng) {
  std::vector<DenseLayer> layers;
  std::size_t fan_in = n_in;
  auto push = [&](std::size_t fan_out) {
    DenseLayer l{Dense(fan_in, fan_out), Dense(1, fan_out)};
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& v : l.weight.values()) v = dist(rng);
    layers.push_back(std::move(l));
    fan_in = fan_out;
  };
  for (std::size_t h : hidden) push(h);
  push(1);
  return layers;
}

// Non-owning view of a layer whose tensors live elsewhere (e.g. in Parameters).
struct DenseLayerRef {
  const Dense* weight;
  const Dense* bias;
};

inline std::vector<DenseLayerRef> layer_refs(std::span<const DenseLayer> layers) {
  std::vector<DenseLayerRef> refs;
  refs.reserve(layers.size());
  for (const DenseLayer& l : layers) refs.push_back({&l.weight, &l.bias});
  return refs;
}

inline void check_mlp_chain(std::size_t n_in, std::span<const DenseLayerRef> layers) {
  if (layers.empty()) throw DimensionError("mlp: no layers");
  std::size_t width = n_in;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Dense& w = *layers[k].weight;
    const Dense& b = *layers[k].bias;
    if (w.rows() != width || b.rows() != 1 || b.cols() != w.cols()) {
      throw DimensionError("mlp: layer " + std::to_string(k) + " has weight " + w.shape_string() +
                           " / bias " + b.shape_string() + " but receives width " +
                           std::to_string(width));
    }
    width = w.cols();
  }
  if (width != 1) throw DimensionError("mlp: final layer must produce a single logit");
}

// ReLU on hidden layers, linear output. `sinks` is either empty (frozen) or
// holds one accumulator per weight and per bias, interleaved.
inline Var mlp_forward(Tape& tape, Var x, std::span<const DenseLayerRef> layers,
                       std::span<GradAccumulator* const> sinks = {}) {
  check_mlp_chain(tape.value(x).cols(), layers);
  if (!sinks.empty() && sinks.size() != 2 * layers.size()) {
    throw DimensionError("mlp: expected two gradient sinks per layer");
  }
  Var h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    Var w = tape.param(*layers[k].weight, sinks.empty() ? nullptr : sinks[2 * k]);
    Var b = tape.param(*layers[k].bias, sinks.empty() ? nullptr : sinks[2 * k + 1]);
    h = tape.linear(h, w, b);
    if (k + 1 < layers.size()) h = tape.relu(h);
  }
  return h;
}

inline Var mlp_forward(Tape& tape, Var x, std::span<const DenseLayer> layers,
                       std::span<GradAccumulator* const> sinks = {}) {
  const auto refs = layer_refs(layers);
  return mlp_forward(tape, x, std::span<const DenseLayerRef>(refs), sinks);
}

inline Dense mlp_forward(const Dense& x, std::span<const DenseLayer> layers) {
  const auto refs = layer_refs(layers);
  check_mlp_chain(x.cols(), refs);
  Dense h = x;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    h = add_broadcast(matmul(h, layers[k].weight), layers[k].bias);
    if (k + 1 < layers.size()) h = relu(h);
  }
  return h;
}

}  // namespace tin
