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
#include <span>
#include <vector>

#include "tin/error.hpp"
#include "tin/tensor.hpp"

namespace tin {

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Records primitive ops in execution order together with the forward values
// their backward rules need. backward() replays the list in reverse.
class Tape {
 public:
  enum class Op {
    kConstant,
    kParam,
    kGather,
    kAdd,
    kAddBroadcast,
    kHadamard,
    kHadamardBroadcast,
    kMatMul,
    kLinear,
    kRelu,
    kConcatCols,
    kScaledDotSoftmax,
    kSum,
    kSigmoidXent,
  };

  Tape() { nodes_.reserve(32); }

  // Non-trainable input.
  Var constant(Dense value) {
    Node& n = push(Op::kConstant);
    n.value = std::move(value);
    return last();
  }

  // Trainable leaf that borrows `value`. Gradients are added into `sink`
  // during backward(); a null sink makes the leaf frozen.
  Var param(const Dense& value, GradAccumulator* sink) {
    Node& n = push(Op::kParam);
    n.source = &value;
    n.sink = sink;
    return last();
  }

  // Rows `ids` of `table` stacked into a len(ids) x cols matrix.
  Var gather(const Dense& table, std::span<const std::size_t> ids, GradAccumulator* sink) {
    Node& n = push(Op::kGather);
    n.value = Dense(ids.size(), table.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] >= table.rows()) {
        throw DimensionError("gather: row " + std::to_string(ids[i]) + " out of range for " +
                             table.shape_string() + " table");
      }
      auto src = table.row(ids[i]);
      std::copy(src.begin(), src.end(), n.value.row(i).begin());
    }
    n.rows.assign(ids.begin(), ids.end());
    n.source = &table;
    n.sink = sink;
    return last();
  }

  Var add(Var a, Var b) { return binary(Op::kAdd, a, b, tin::add(value(a), value(b))); }
  Var add_broadcast(Var a, Var b) {
    return binary(Op::kAddBroadcast, a, b, tin::add_broadcast(value(a), value(b)));
  }
  Var hadamard(Var a, Var b) {
    return binary(Op::kHadamard, a, b, tin::hadamard(value(a), value(b)));
  }
  Var hadamard_broadcast(Var a, Var b) {
    return binary(Op::kHadamardBroadcast, a, b, tin::hadamard_broadcast(value(a), value(b)));
  }
  Var matmul(Var a, Var b) { return binary(Op::kMatMul, a, b, tin::matmul(value(a), value(b))); }

  // x * weight + bias, bias broadcast over rows.
  Var linear(Var x, Var weight, Var bias) {
    Dense out = tin::add_broadcast(tin::matmul(value(x), value(weight)), value(bias));
    Node& n = push(Op::kLinear);
    n.inputs = {x.id, weight.id, bias.id};
    n.value = std::move(out);
    return last();
  }

  Var relu(Var x) {
    Dense out = tin::relu(value(x));
    Node& n = push(Op::kRelu);
    n.inputs = {x.id};
    n.value = std::move(out);
    return last();
  }

  Var concat_cols(std::span<const Var> parts) {
    std::vector<const Dense*> ptrs;
    ptrs.reserve(parts.size());
    for (Var p : parts) ptrs.push_back(&value(p));
    Dense out = tin::concat_cols(ptrs);
    Node& n = push(Op::kConcatCols);
    for (Var p : parts) n.inputs.push_back(p.id);
    n.value = std::move(out);
    return last();
  }

  Var scaled_dot_softmax(Var keys, Var query, double scale) {
    Dense out = tin::scaled_dot_softmax(value(keys), value(query), scale);
    Node& n = push(Op::kScaledDotSoftmax);
    n.inputs = {keys.id, query.id};
    n.scalar = scale;
    n.value = std::move(out);
    return last();
  }

  // Sum of all entries as a 1x1 value.
  Var sum(Var x) {
    double total = 0.0;
    for (double v : value(x).values()) total += v;
    Node& n = push(Op::kSum);
    n.inputs = {x.id};
    n.value = Dense(1, 1, total);
    return last();
  }

  Var sigmoid_xent(Var logit, int label) {
    const Dense& z = value(logit);
    if (z.size() != 1) throw DimensionError("sigmoid_xent: logit must be 1x1");
    const XentResult r = tin::sigmoid_xent(z[0], label);
    Node& n = push(Op::kSigmoidXent);
    n.inputs = {logit.id};
    n.scalar = label;
    n.value = Dense(1, 1, r.loss);
    return last();
  }

  const Dense& value(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.op == Op::kParam ? *n.source : n.value;
  }

  // Gradient of the last backward() root with respect to `v`.
  const Dense& grad(Var v) const { return nodes_.at(v.id).grad; }

  std::size_t size() const { return nodes_.size(); }

  // Reverse-mode sweep from a 1x1 root. Parameter and gather leaves forward
  // their gradients into their sinks.
  void backward(Var root) {
    if (value(root).size() != 1) throw DimensionError("backward: root must be 1x1");
    for (Node& n : nodes_) {
      const Dense& v = n.op == Op::kParam ? *n.source : n.value;
      n.grad = Dense(v.rows(), v.cols());
    }
    nodes_[root.id].grad[0] = 1.0;
    for (std::size_t k = root.id + 1; k-- > 0;) backward_node(nodes_[k]);
  }

 private:
  struct Node {
    Op op = Op::kConstant;
    std::vector<std::size_t> inputs;
    Dense value;
    Dense grad;
    const Dense* source = nullptr;
    GradAccumulator* sink = nullptr;
    std::vector<std::size_t> rows;
    double scalar = 0.0;
  };

  Node& push(Op op) {
    nodes_.emplace_back();
    nodes_.back().op = op;
    return nodes_.back();
  }
  Var last() const { return Var{nodes_.size() - 1}; }

  Var binary(Op op, Var a, Var b, Dense out) {
    Node& n = push(op);
    n.inputs = {a.id, b.id};
    n.value = std::move(out);
    return last();
  }

  Dense& g(std::size_t id) { return nodes_[id].grad; }
  const Dense& val(std::size_t id) const { return value(Var{id}); }

  void backward_node(Node& n) {
    const Dense& go = n.grad;
    switch (n.op) {
      case Op::kConstant:
        break;
      case Op::kParam:
        if (n.sink) n.sink->add(go);
        break;
      case Op::kGather:
        if (n.sink) {
          for (std::size_t i = 0; i < n.rows.size(); ++i) n.sink->add_row(n.rows[i], go.row(i));
        }
        break;
      case Op::kAdd: {
        Dense& ga = g(n.inputs[0]);
        Dense& gb = g(n.inputs[1]);
        for (std::size_t i = 0; i < go.size(); ++i) {
          ga[i] += go[i];
          gb[i] += go[i];
        }
        break;
      }
      case Op::kAddBroadcast: {
        Dense& ga = g(n.inputs[0]);
        Dense& gb = g(n.inputs[1]);
        for (std::size_t r = 0; r < go.rows(); ++r) {
          for (std::size_t c = 0; c < go.cols(); ++c) {
            ga(r, c) += go(r, c);
            gb[c] += go(r, c);
          }
        }
        break;
      }
      case Op::kHadamard: {
        const Dense& a = val(n.inputs[0]);
        const Dense& b = val(n.inputs[1]);
        Dense& ga = g(n.inputs[0]);
        Dense& gb = g(n.inputs[1]);
        for (std::size_t i = 0; i < go.size(); ++i) {
          ga[i] += go[i] * b[i];
          gb[i] += go[i] * a[i];
        }
        break;
      }
      case Op::kHadamardBroadcast: {
        const Dense& a = val(n.inputs[0]);
        const Dense& b = val(n.inputs[1]);
        Dense& ga = g(n.inputs[0]);
        Dense& gb = g(n.inputs[1]);
        for (std::size_t r = 0; r < go.rows(); ++r) {
          for (std::size_t c = 0; c < go.cols(); ++c) {
            ga(r, c) += go(r, c) * b[c];
            gb[c] += go(r, c) * a(r, c);
          }
        }
        break;
      }
      case Op::kMatMul:
        matmul_backward(go, n.inputs[0], n.inputs[1]);
        break;
      case Op::kLinear: {
        matmul_backward(go, n.inputs[0], n.inputs[1]);
        Dense& gb = g(n.inputs[2]);
        for (std::size_t r = 0; r < go.rows(); ++r) {
          for (std::size_t c = 0; c < go.cols(); ++c) gb[c] += go(r, c);
        }
        break;
      }
      case Op::kRelu: {
        const Dense& x = val(n.inputs[0]);
        Dense& gx = g(n.inputs[0]);
        for (std::size_t i = 0; i < go.size(); ++i) {
          if (x[i] > 0.0) gx[i] += go[i];
        }
        break;
      }
      case Op::kConcatCols: {
        std::size_t off = 0;
        for (std::size_t in : n.inputs) {
          Dense& gi = g(in);
          for (std::size_t r = 0; r < gi.rows(); ++r) {
            for (std::size_t c = 0; c < gi.cols(); ++c) gi(r, c) += go(r, off + c);
          }
          off += gi.cols();
        }
        break;
      }
      case Op::kScaledDotSoftmax: {
        // d logit_i = s_i * (g_i - <g, s>)
        const Dense& s = n.value;
        const Dense& keys = val(n.inputs[0]);
        const Dense& query = val(n.inputs[1]);
        Dense& gk = g(n.inputs[0]);
        Dense& gq = g(n.inputs[1]);
        double gs = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) gs += go[i] * s[i];
        for (std::size_t i = 0; i < s.size(); ++i) {
          const double dz = s[i] * (go[i] - gs) * n.scalar;
          for (std::size_t c = 0; c < keys.cols(); ++c) {
            gk(i, c) += dz * query[c];
            gq[c] += dz * keys(i, c);
          }
        }
        break;
      }
      case Op::kSum: {
        Dense& gx = g(n.inputs[0]);
        for (double& v : gx.values()) v += go[0];
        break;
      }
      case Op::kSigmoidXent: {
        const double z = val(n.inputs[0])[0];
        g(n.inputs[0])[0] += go[0] * (sigmoid(z) - n.scalar);
        break;
      }
    }
  }

  // out = a * b: ga += go * b^T, gb += a^T * go.
  void matmul_backward(const Dense& go, std::size_t ia, std::size_t ib) {
    const Dense& a = val(ia);
    const Dense& b = val(ib);
    Dense& ga = g(ia);
    Dense& gb = g(ib);
    for (std::size_t i = 0; i < a.rows(); ++i) {
      auto gor = go.row(i);
      for (std::size_t k = 0; k < a.cols(); ++k) {
        auto br = b.row(k);
        auto gbr = gb.row(k);
        const double aik = a(i, k);
        double acc = 0.0;
        for (std::size_t j = 0; j < b.cols(); ++j) {
          acc += gor[j] * br[j];
          gbr[j] += aik * gor[j];
        }
        ga(i, k) += acc;
      }
    }
  }

  std::vector<Node> nodes_;
};

}  // namespace tin
