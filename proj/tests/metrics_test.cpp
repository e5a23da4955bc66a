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

#include "tin/metrics.hpp"

#include <cmath>
#include <map>
#include <random>

#include <gtest/gtest.h>

namespace tin {
namespace {

// Fraction of (positive, negative) pairs ordered correctly, ties one half.
double pair_auc(const std::vector<EvalRecord>& recs) {
  double good = 0, pairs = 0;
  double n_pos = 0, n_neg = 0;
  for (const auto& r : recs) (r.label ? n_pos : n_neg) += 1;
  for (const auto& p : recs) {
    if (!p.label) continue;
    for (const auto& n : recs) {
      if (n.label) continue;
      if (p.prob > n.prob) good += 1;
      else if (p.prob == n.prob) good += 0.5;
      pairs += 1;
    }
  }
  return good / (n_pos * n_neg);
}

double pair_gauc(const std::vector<EvalRecord>& recs) {
  std::map<std::size_t, std::vector<EvalRecord>> by_user;
  for (const auto& r : recs) by_user[r.user].push_back(r);
  double num = 0, den = 0;
  for (const auto& [u, rs] : by_user) {
    int pos = 0;
    for (const auto& r : rs) pos += r.label;
    if (pos == 0 || pos == static_cast<int>(rs.size())) continue;
    num += static_cast<double>(rs.size()) * pair_auc(rs);
    den += static_cast<double>(rs.size());
  }
  return num / den;
}

// Scores on a coarse grid so ties are common.
std::vector<EvalRecord> random_records(std::size_t n, std::size_t users, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> grid(1, 9), label(0, 1);
  std::uniform_int_distribution<std::size_t> user(0, users - 1);
  std::vector<EvalRecord> out(n);
  for (auto& r : out) r = {user(rng), label(rng), grid(rng) / 10.0};
  return out;
}

TEST(LoglossTest, Examples) {
  std::vector<EvalRecord> half{{0, 1, 0.5}, {0, 0, 0.5}, {1, 1, 0.5}};
  EXPECT_NEAR(logloss(half), std::log(2.0), 1e-15);
  std::vector<EvalRecord> perfect{{0, 1, 1.0}, {0, 0, 0.0}};
  EXPECT_NEAR(logloss(perfect), 1e-15, 1e-16);
  std::vector<EvalRecord> mixed{{0, 1, 0.9}, {0, 0, 0.2}};
  EXPECT_NEAR(logloss(mixed), (-std::log(0.9) - std::log(0.8)) / 2, 1e-15);
  EXPECT_NEAR(logloss(mixed), 0.1643, 5e-5);
  EXPECT_THROW(logloss(std::vector<EvalRecord>{}), DataError);
}

TEST(AucTest, Examples) {
  std::vector<EvalRecord> sep{{0, 1, 0.9}, {0, 1, 0.8}, {0, 0, 0.1}};
  EXPECT_EQ(auc(sep), 1.0);
  std::vector<EvalRecord> ties{{0, 1, 0.5}, {0, 0, 0.5}, {0, 1, 0.5}, {0, 0, 0.5}};
  EXPECT_EQ(auc(ties), 0.5);
  std::vector<EvalRecord> mixed{{0, 1, 0.8}, {0, 1, 0.4}, {0, 0, 0.6}, {0, 0, 0.3}};
  EXPECT_EQ(auc(mixed), 0.75);
  std::vector<EvalRecord> one_class{{0, 1, 0.8}, {0, 1, 0.4}};
  EXPECT_THROW(auc(one_class), DataError);
}

TEST(AucProperty, EqualsPairCountingExactly) {
  std::mt19937_64 rng(1);
  for (std::size_t n = 2; n <= 200; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      auto recs = random_records(n, 1, rng);
      recs[0].label = 1;
      recs[1].label = 0;
      EXPECT_EQ(auc(recs), pair_auc(recs)) << "n=" << n;
    }
  }
}

TEST(AucProperty, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    auto recs = random_records(60, 1, rng);
    recs[0].label = 1;
    recs[1].label = 0;
    auto moved = recs;
    for (auto& r : moved) r.prob = 1.0 / (1.0 + std::exp(-7.0 * r.prob + 2.0));
    EXPECT_EQ(auc(recs), auc(moved));
  }
}

TEST(GaucTest, Examples) {
  std::vector<EvalRecord> one{{3, 1, 0.8}, {3, 1, 0.4}, {3, 0, 0.6}, {3, 0, 0.3}};
  EXPECT_EQ(gauc(one), auc(one));
  std::vector<EvalRecord> two{{0, 1, 0.9}, {0, 0, 0.1}, {1, 1, 0.5}, {1, 0, 0.5}};
  EXPECT_EQ(gauc(two), 0.75);
  std::vector<EvalRecord> none{{0, 1, 0.9}, {1, 0, 0.1}};
  EXPECT_THROW(gauc(none), DataError);
}

TEST(GaucProperty, EqualsPairCountingOracle) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 4; n <= 200; n += 4) {
    for (int rep = 0; rep < 3; ++rep) {
      auto recs = random_records(n, 1 + n / 10, rng);
      recs[0] = {0, 1, 0.3};
      recs[1] = {0, 0, 0.7};
      EXPECT_EQ(gauc(recs), pair_gauc(recs)) << "n=" << n;
    }
  }
}

TEST(GaucProperty, SingleClassUserIsIgnored) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 30; ++trial) {
    auto recs = random_records(100, 8, rng);
    recs[0] = {0, 1, 0.3};
    recs[1] = {0, 0, 0.7};
    const double base = gauc(recs);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    auto more = recs;
    more.push_back({99, 1, 0.2});
    more.push_back({99, 1, 0.9});
    EXPECT_EQ(gauc(more), base);
  }
}

TEST(EvaluateTest, Report) {
  std::vector<EvalRecord> two{{0, 1, 0.9}, {0, 0, 0.1}, {1, 1, 0.5}, {1, 0, 0.5}, {2, 1, 0.5}};
  const auto r = evaluate(two);
  EXPECT_EQ(r.n_records, 5u);
  EXPECT_EQ(r.n_users, 3u);
  EXPECT_EQ(r.gauc, 0.75);
}

}  // namespace
}  // namespace tin
