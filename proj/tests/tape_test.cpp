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

#include "tin/tape.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "tin/grad_check.hpp"

namespace tin {
namespace {

constexpr int kTrials = 100;
constexpr double kStep = 1e-4;
constexpr double kTol = 1e-4;

Dense random_dense(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dense d(r, c);
  for (auto& v : d.values()) v = u(rng);
  return d;
}

// Builds op(leaves) on a fresh tape, reduces it to a scalar through a fixed
// random projection, and compares tape gradients with central differences.
using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double fd_max_error(std::vector<Dense>& leaves, const Builder& build, std::mt19937_64& rng) {
  std::optional<Dense> proj;
  auto forward = [&](Tape& tape, std::vector<Var>& vars) {
    vars.clear();
    for (const Dense& l : leaves) vars.push_back(tape.param(l, nullptr));
    Var out = build(tape, vars);
    if (!proj) proj = random_dense(tape.value(out).rows(), tape.value(out).cols(), rng);
    return tape.sum(tape.hadamard(out, tape.constant(*proj)));
  };
  Tape tape;
  std::vector<Var> vars;
  Var root = forward(tape, vars);
  tape.backward(root);
  std::vector<Dense> grads;
  for (Var v : vars) grads.push_back(tape.grad(v));
  std::vector<CheckedParam> params;
  for (std::size_t i = 0; i < leaves.size(); ++i) params.push_back({"leaf" + std::to_string(i), &leaves[i], &grads[i]});
  const auto report = grad_check(params,
                                 [&] {
                                   Tape t;
                                   std::vector<Var> vs;
                                   return t.value(forward(t, vs))[0];
                                 },
                                 kStep, kTol);
  return report.max_rel_error;
}

void run_property(const char* name, const std::function<std::vector<Dense>(std::mt19937_64&)>& make,
                  const Builder& build, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    auto leaves = make(rng);
    worst = std::max(worst, fd_max_error(leaves, build, rng));
  }
  EXPECT_LT(worst, kTol) << name;
}

std::size_t dim(std::mt19937_64& rng, int lo = 1, int hi = 5) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

TEST(TapeGradProperty, Add) {
  run_property("add", [](auto& rng) {
    const auto r = dim(rng), c = dim(rng);
    return std::vector<Dense>{random_dense(r, c, rng), random_dense(r, c, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.add(v[0], v[1]); }, 1);
}

TEST(TapeGradProperty, AddBroadcast) {
  run_property("add_broadcast", [](auto& rng) {
    const auto r = dim(rng), c = dim(rng);
    return std::vector<Dense>{random_dense(r, c, rng), random_dense(1, c, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.add_broadcast(v[0], v[1]); }, 2);
}

TEST(TapeGradProperty, Hadamard) {
  run_property("hadamard", [](auto& rng) {
    const auto r = dim(rng), c = dim(rng);
    return std::vector<Dense>{random_dense(r, c, rng), random_dense(r, c, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.hadamard(v[0], v[1]); }, 3);
}

TEST(TapeGradProperty, HadamardBroadcast) {
  run_property("hadamard_broadcast", [](auto& rng) {
    const auto r = dim(rng), c = dim(rng);
    return std::vector<Dense>{random_dense(r, c, rng), random_dense(1, c, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.hadamard_broadcast(v[0], v[1]); }, 4);
}

TEST(TapeGradProperty, Matmul) {
  run_property("matmul", [](auto& rng) {
    const auto n = dim(rng), k = dim(rng), m = dim(rng);
    return std::vector<Dense>{random_dense(n, k, rng), random_dense(k, m, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.matmul(v[0], v[1]); }, 5);
}

TEST(TapeGradProperty, Linear) {
  run_property("linear", [](auto& rng) {
    const auto n = dim(rng, 1, 3), k = dim(rng), m = dim(rng);
    return std::vector<Dense>{random_dense(n, k, rng), random_dense(k, m, rng), random_dense(1, m, rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.linear(v[0], v[1], v[2]); }, 6);
}

TEST(TapeGradProperty, Relu) {
  // Entries within 1e-3 of the kink are redrawn; the derivative is undefined there.
  run_property("relu", [](auto& rng) {
    Dense x = random_dense(dim(rng), dim(rng), rng);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& v : x.values()) {
      while (std::abs(v) < 1e-3) v = u(rng);
    }
    return std::vector<Dense>{x};
  }, [](Tape& t, const std::vector<Var>& v) { return t.relu(v[0]); }, 7);
}

TEST(TapeGradProperty, ConcatCols) {
  run_property("concat_cols", [](auto& rng) {
    const auto r = dim(rng);
    return std::vector<Dense>{random_dense(r, dim(rng), rng), random_dense(r, dim(rng), rng),
                              random_dense(r, dim(rng), rng)};
  }, [](Tape& t, const std::vector<Var>& v) { return t.concat_cols(v); }, 8);
}

TEST(TapeGradProperty, ScaledDotSoftmax) {
  run_property("scaled_dot_softmax", [](auto& rng) {
    const auto h = dim(rng, 1, 8), d = dim(rng, 1, 6);
    return std::vector<Dense>{random_dense(h, d, rng), random_dense(1, d, rng)};
  }, [](Tape& t, const std::vector<Var>& v) {
    return t.scaled_dot_softmax(v[0], v[1], 1.0 / std::sqrt(static_cast<double>(t.value(v[1]).cols())));
  }, 9);
}

TEST(TapeGradProperty, Sum) {
  run_property("sum", [](auto& rng) { return std::vector<Dense>{random_dense(dim(rng), dim(rng), rng)}; },
               [](Tape& t, const std::vector<Var>& v) { return t.sum(v[0]); }, 10);
}

TEST(TapeGradProperty, SigmoidXent) {
  for (int label : {0, 1}) {
    run_property("sigmoid_xent", [](auto& rng) { return std::vector<Dense>{random_dense(1, 1, rng)}; },
                 [label](Tape& t, const std::vector<Var>& v) { return t.sigmoid_xent(v[0], label); },
                 11 + label);
  }
}

TEST(TapeGradProperty, ComposedAttentionPooling) {
  // keys -> softmax weights -> weighted hadamard sum, as the interest module does.
  run_property("pooling", [](auto& rng) {
    const auto h = dim(rng, 1, 6), d = dim(rng, 2, 6);
    return std::vector<Dense>{random_dense(h, d, rng), random_dense(1, d, rng)};
  }, [](Tape& t, const std::vector<Var>& v) {
    Var alpha = t.scaled_dot_softmax(v[0], v[1], 0.5);
    return t.matmul(alpha, t.hadamard_broadcast(v[0], v[1]));
  }, 13);
}

TEST(TapeGatherTest, GradAccumulatesRepeatedRows) {
  const Dense table{{1, 2}, {3, 4}, {5, 6}};
  GradAccumulator sink(3, 2);
  Tape t;
  const std::size_t ids[] = {2, 0, 2};
  Var g = t.gather(table, ids, &sink);
  EXPECT_EQ(t.value(g), (Dense{{5, 6}, {1, 2}, {5, 6}}));
  t.backward(t.sum(g));
  EXPECT_EQ(sink.grad(), (Dense{{1, 1}, {0, 0}, {2, 2}}));
  EXPECT_FALSE(sink.touched(1));
  const std::size_t bad[] = {3};
  EXPECT_THROW(t.gather(table, bad, &sink), DimensionError);
}

TEST(TapeGatherTest, FiniteDifferenceOverTable) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < kTrials; ++trial) {
    Dense table = random_dense(5, 3, rng);
    std::vector<std::size_t> ids(dim(rng, 1, 8));
    for (auto& id : ids) id = dim(rng, 0, 4);
    const Dense proj = random_dense(ids.size(), 3, rng);
    auto loss = [&](GradAccumulator* sink) {
      Tape t;
      Var root = t.sum(t.hadamard(t.relu(t.add(t.gather(table, ids, sink), t.constant(Dense(ids.size(), 3, 2.0)))),
                                  t.constant(proj)));
      if (sink) t.backward(root);
      return t.value(root)[0];
    };
    GradAccumulator sink(5, 3);
    loss(&sink);
    CheckedParam p{"table", &table, &sink.grad()};
    const auto r = grad_check(std::span(&p, 1), [&] { return loss(nullptr); }, kStep, kTol);
    ASSERT_TRUE(r.passed) << r.worst << " " << r.max_rel_error;
  }
}

TEST(TapeTest, AddBroadcastBackwardExample) {
  const Dense a{{1, 2}, {3, 4}};
  const Dense b{{10, 20}};
  Tape t;
  Var va = t.param(a, nullptr), vb = t.param(b, nullptr);
  t.backward(t.sum(t.add_broadcast(va, vb)));
  EXPECT_EQ(t.grad(vb), (Dense{{2, 2}}));
  EXPECT_EQ(t.grad(va), (Dense{{1, 1}, {1, 1}}));
}

TEST(TapeTest, HadamardGradientExample) {
  const Dense a{{1, 2}};
  const Dense b{{3, 7}};
  Tape t;
  Var va = t.param(a, nullptr), vb = t.param(b, nullptr);
  t.backward(t.sum(t.hadamard(va, vb)));
  EXPECT_EQ(t.grad(va), b);
  EXPECT_EQ(t.grad(vb), a);
}

TEST(TapeTest, UnusedLeafHasExactlyZeroGradient) {
  std::mt19937_64 rng(5);
  const Dense a = random_dense(3, 3, rng), unused = random_dense(2, 4, rng);
  GradAccumulator sink(2, 4);
  Tape t;
  Var va = t.param(a, nullptr);
  Var vu = t.param(unused, &sink);
  t.backward(t.sum(t.relu(va)));
  EXPECT_EQ(t.grad(vu), Dense(2, 4));
  EXPECT_EQ(sink.grad(), Dense(2, 4));
  EXPECT_TRUE(sink.touched_rows().empty() || sink.grad() == Dense(2, 4));
}

TEST(TapeTest, SinkReceivesParamGradient) {
  const Dense w{{2.0}};
  GradAccumulator sink(1, 1);
  Tape t;
  Var x = t.constant(Dense{{3.0}});
  Var vw = t.param(w, &sink);
  t.backward(t.sum(t.matmul(x, vw)));
  EXPECT_EQ(sink.grad()(0, 0), 3.0);
}

TEST(TapeTest, BackwardNeedsScalarRoot) {
  Tape t;
  Var x = t.constant(Dense(2, 2));
  EXPECT_THROW(t.backward(x), DimensionError);
}

TEST(GradCheckTest, LinearFunctionIsExact) {
  Dense theta{{0.37}};
  Dense analytic{{3.0}};
  CheckedParam p{"theta", &theta, &analytic};
  const auto r = grad_check(std::span(&p, 1), [&] { return 3.0 * theta[0]; }, kStep, kTol);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.max_rel_error, 1e-10);
  EXPECT_EQ(r.n_checked, 1u);
}

TEST(GradCheckTest, ConstantFunctionHasZeroDifferences) {
  Dense theta{{1.0, -2.0}};
  Dense analytic(1, 2);
  CheckedParam p{"theta", &theta, &analytic};
  const auto r = grad_check(std::span(&p, 1), [] { return 4.0; }, kStep, kTol);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.max_rel_error, 0.0);
}

TEST(GradCheckTest, DetectsWrongGradient) {
  Dense theta{{0.5}};
  Dense analytic{{1.0}};
  CheckedParam p{"theta", &theta, &analytic};
  const auto r = grad_check(std::span(&p, 1), [&] { return theta[0] * theta[0] * 3.0; }, kStep, kTol);
  EXPECT_FALSE(r.passed);
  EXPECT_EQ(r.worst, "theta[0]");
  EXPECT_NEAR(r.worst_numeric, 3.0, 1e-8);
}

TEST(GradCheckTest, NonFiniteForwardAborts) {
  Dense theta{{0.0}};
  Dense analytic{{0.0}};
  CheckedParam p{"theta", &theta, &analytic};
  EXPECT_THROW(grad_check(std::span(&p, 1), [&] { return std::log(theta[0]); }, kStep, kTol), NumericError);
  EXPECT_THROW(grad_check(std::span(&p, 1), [] { return 0.0; }, 0.0, kTol), InputError);
}

}  // namespace
}  // namespace tin
