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
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/model.hpp"

namespace tin {

struct EvalRecord {
  std::size_t user = 0;
  int label = 0;
  double prob = 0.5;
};

inline constexpr double kProbClip = 1e-15;

// Mean binary cross-entropy, probabilities clipped to [1e-15, 1 - 1e-15].
inline double logloss(std::span<const EvalRecord> records) {
  if (records.empty()) throw DataError("logloss: no records");
  double total = 0.0;
  for (const EvalRecord& r : records) {
    const double p = std::clamp(r.prob, kProbClip, 1.0 - kProbClip);
    total -= r.label ? std::log(p) : std::log(1.0 - p);
  }
  return total / static_cast<double>(records.size());
}

// Mann-Whitney U over mid-ranks; ties between a positive and a negative count
// one half.
inline double auc(std::span<const EvalRecord> records) {
  std::vector<std::size_t> idx(records.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return records[a].prob < records[b].prob; });
  double n_pos = 0, n_neg = 0, rank_sum = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && records[idx[j]].prob == records[idx[i]].prob) ++j;
    // 1-based ranks i+1..j share the mid-rank
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (records[idx[k]].label) {
        ++n_pos;
        rank_sum += mid;
      } else {
        ++n_neg;
      }
    }
    i = j;
  }
  if (n_pos == 0 || n_neg == 0) throw DataError("auc: undefined for single-class input");
  const double u = rank_sum - n_pos * (n_pos + 1) / 2.0;
  return u / (n_pos * n_neg);
}

// Per-user AUC averaged with per-user record counts as weights. Users with a
// single class are skipped.
inline double gauc(std::span<const EvalRecord> records) {
  std::map<std::size_t, std::vector<EvalRecord>> by_user;
  for (const EvalRecord& r : records) by_user[r.user].push_back(r);
  double num = 0.0, den = 0.0;
  for (const auto& [user, recs] : by_user) {
    bool pos = false, neg = false;
    for (const EvalRecord& r : recs) (r.label ? pos : neg) = true;
    if (!pos || !neg) continue;
    const double w = static_cast<double>(recs.size());
    num += w * auc(recs);
    den += w;
  }
  if (den == 0.0) throw DataError("gauc: no user has both a positive and a negative record");
  return num / den;
}

struct EvalReport {
  double logloss = 0.0;
  double gauc = 0.0;
  std::size_t n_records = 0;
  std::size_t n_users = 0;
};

inline std::vector<EvalRecord> score(const Model& model, std::span<const Sample> samples) {
  std::vector<EvalRecord> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back({s.user, s.label, model.predict(s)});
  return out;
}

inline EvalReport evaluate(std::span<const EvalRecord> records) {
  EvalReport rep;
  rep.logloss = logloss(records);
  rep.gauc = gauc(records);
  rep.n_records = records.size();
  std::set<std::size_t> users;
  for (const EvalRecord& r : records) users.insert(r.user);
  rep.n_users = users.size();
  return rep;
}

inline EvalReport evaluate(const Model& model, std::span<const Sample> samples) {
  const auto records = score(model, samples);
  return evaluate(records);
}

}  // namespace tin
