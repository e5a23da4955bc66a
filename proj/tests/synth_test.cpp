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

#include "tin/synth.hpp"

#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "tin/analysis.hpp"

namespace tin {
namespace {

// Entropy-form MI, H(X) + H(Y) - H(X, Y), of the indicator "behavior at
// position p has category c" against the label, over target category c_t.
double brute_mi(const std::vector<Sample>& samples, std::size_t c_t, std::size_t c, std::size_t p) {
  std::map<std::pair<int, int>, double> joint;
  double n = 0;
  for (const Sample& s : samples) {
    if (s.target.category != c_t) continue;
    const int x = s.history.size() >= p && s.history[s.history.size() - p].category == c;
    joint[{x, s.label}] += 1;
    n += 1;
  }
  auto h = [n](const std::map<int, double>& m) {
    double out = 0;
    for (auto [k, v] : m) out -= v / n * std::log(v / n);
    return out;
  };
  std::map<int, double> px, py;
  double hxy = 0;
  for (auto [k, v] : joint) {
    px[k.first] += v;
    py[k.second] += v;
    hxy -= v / n * std::log(v / n);
  }
  return h(px) + h(py) - hxy;
}

TEST(SynthTest, ShapesAndSplit) {
  SynthConfig cfg;
  cfg.n_users = 100;
  const auto ds = synth_generate(cfg);
  EXPECT_EQ(ds.train.size(), 80u * cfg.samples_per_user);
  EXPECT_EQ(ds.test.size(), 20u * cfg.samples_per_user);
  EXPECT_EQ(ds.stats.n_users, 100u);
  EXPECT_EQ(ds.stats.n_categories, cfg.n_categories);
  for (const auto& s : ds.test) EXPECT_GE(s.user, 80u);
  for (const auto& s : ds.train) {
    EXPECT_GE(s.history.size(), cfg.min_len);
    EXPECT_LE(s.history.size(), cfg.max_len);
    for (const auto& b : s.history) EXPECT_LE(b.timestamp, s.target.timestamp);
    EXPECT_EQ(s.target.item / cfg.items_per_category, s.target.category);
  }
}

TEST(SynthTest, SeedReproducible) {
  SynthConfig cfg;
  cfg.n_users = 200;
  const auto a = synth_generate(cfg), b = synth_generate(cfg);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  cfg.seed = 2;
  EXPECT_NE(synth_generate(cfg).train, a.train);
}

TEST(SynthTest, PlantedLogit) {
  SynthConfig cfg;
  Sample s;
  s.history = {{0, 0, 3, 1}, {0, 0, 1, 2}, {0, 0, 3, 3}};
  s.target = {0, 0, 3, 4};
  // Matches at positions 1 and 3.
  EXPECT_NEAR(planted_logit(cfg, s), -1.0 + 3.0 * (0.7 + 0.7 * 0.7 * 0.7), 1e-15);
}

TEST(SynthTest, InvalidConfig) {
  SynthConfig cfg;
  cfg.n_categories = 0;
  EXPECT_THROW(synth_generate(cfg), InputError);
  cfg = {};
  cfg.min_len = 30;
  EXPECT_THROW(synth_generate(cfg), InputError);
  cfg = {};
  cfg.test_fraction = 1.5;
  EXPECT_THROW(synth_generate(cfg), InputError);
}

TEST(SynthTest, ZeroBoostGivesNearZeroMi) {
  SynthConfig cfg;
  cfg.boost = 0.0;
  const auto ds = synth_generate(cfg);
  const std::vector<std::size_t> rows{0, 1, 2};
  const auto grid = ground_truth_ctc(ds.train, 0, rows, 10);
  for (const auto& v : grid.values) {
    ASSERT_TRUE(v.has_value());
    EXPECT_LT(*v, 2e-3);
  }
}

TEST(SynthTest, UnitDecayIsFlatAcrossPositions) {
  SynthConfig cfg;
  cfg.decay = 1.0;
  cfg.min_len = cfg.max_len;  // every history reaches every position
  const auto ds = synth_generate(cfg);
  const std::vector<std::size_t> rows{0};
  const auto grid = ground_truth_ctc(ds.train, 0, rows, 10);
  double lo = 1e9, hi = 0;
  for (const auto& v : grid.values) {
    lo = std::min(lo, *v);
    hi = std::max(hi, *v);
  }
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(hi - lo, 0.5 * hi);
}

TEST(SynthTest, MatchingRowMiDecreasesWithPosition) {
  const auto ds = synth_generate(SynthConfig{});
  // Past position 4 the planted effect (3 * 0.7^p logits) sinks below the
  // sampling noise of ~6400 restricted samples, around 1e-3 nats.
  constexpr std::size_t kPositions = 4;
  const std::vector<std::size_t> rows{0};
  const auto grid = ground_truth_ctc(ds.train, 0, rows, kPositions);
  for (std::size_t p = 1; p <= kPositions; ++p) {
    EXPECT_NEAR(*grid.at(0, p), brute_mi(ds.train, 0, 0, p), 1e-12);
    if (p > 1) EXPECT_LT(*grid.at(0, p), *grid.at(0, p - 1)) << "position " << p;
  }
}

}  // namespace
}  // namespace tin
