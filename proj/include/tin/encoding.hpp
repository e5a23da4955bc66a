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
#include <cstddef>
#include <cstdint>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/parameter.hpp"
#include "tin/tensor.hpp"

namespace tin {

// id -> dense vector table backed by a sparse Parameter.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string name, std::size_t n_ids, std::size_t dim)
      : param_(std::move(name), n_ids, dim, /*sparse=*/true) {}

  void init_uniform(std::mt19937_64& rng, double bound = 0.01) {
    tin::init_uniform(param_.value, bound, rng);
  }

  std::size_t n_ids() const { return param_.value.rows(); }
  std::size_t dim() const { return param_.value.cols(); }

  std::span<const double> lookup(std::size_t id) const {
    if (id >= n_ids()) {
      throw DimensionError("embedding '" + param_.name + "': id " + std::to_string(id) +
                           " out of range (" + std::to_string(n_ids()) + " rows)");
    }
    return param_.value.row(id);
  }

  Parameter& param() { return param_; }
  const Parameter& param() const { return param_; }
  const Dense& weights() const { return param_.value; }
  Dense& weights() { return param_.value; }

 private:
  Parameter param_;
};

// e = [c(x), it(x)]
inline Dense semantic_embed(const Interaction& x, const EmbeddingTable& categories,
                            const EmbeddingTable& items) {
  const auto c = categories.lookup(x.category);
  const auto it = items.lookup(x.item);
  Dense out(1, c.size() + it.size());
  std::copy(c.begin(), c.end(), out.values().begin());
  std::copy(it.begin(), it.end(), out.values().begin() + static_cast<std::ptrdiff_t>(c.size()));
  return out;
}

enum class EncoderKind { kNone, kTteP, kTteT, kCoe };

inline std::string encoder_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::kNone: return "none";
    case EncoderKind::kTteP: return "tte-p";
    case EncoderKind::kTteT: return "tte-t";
    case EncoderKind::kCoe: return "coe";
  }
  return "none";
}

inline EncoderKind parse_encoder(std::string_view s) {
  if (s == "none") return EncoderKind::kNone;
  if (s == "tte-p") return EncoderKind::kTteP;
  if (s == "tte-t") return EncoderKind::kTteT;
  if (s == "coe") return EncoderKind::kCoe;
  throw InputError("unknown encoder '" + std::string(s) + "' (expected tte-p|tte-t|coe|none)");
}

// Target-relative position: H - i + 1 for behavior i (1-based, oldest first),
// clamped to n_buckets - 1. The target itself is the origin, bucket 0.
inline std::size_t tte_p(std::size_t h, std::size_t i, std::size_t n_buckets) {
  if (i < 1 || i > h) {
    throw DimensionError("tte_p: behavior index " + std::to_string(i) + " outside [1, " +
                         std::to_string(h) + "]");
  }
  return std::min(h - i + 1, n_buckets - 1);
}

// Chronological order, target-agnostic: i, clamped to n_buckets - 1.
inline std::size_t coe(std::size_t h, std::size_t i, std::size_t n_buckets) {
  if (i < 1 || i > h) {
    throw DimensionError("coe: behavior index " + std::to_string(i) + " outside [1, " +
                         std::to_string(h) + "]");
  }
  return std::min(i, n_buckets - 1);
}

// Equal-frequency edges over the intervals TS_t - TS_i of every behavior in
// `samples`: edge k is the ceil(k*n/B)-th smallest interval, k = 1..B-1.
inline std::vector<double> fit_tte_t_bins(std::span<const Sample> samples, std::size_t n_buckets = 10) {
  if (n_buckets < 2) throw InputError("tte-t: need at least 2 buckets");
  std::vector<double> tau;
  for (const Sample& s : samples) {
    for (const Interaction& x : s.history) {
      tau.push_back(static_cast<double>(s.target.timestamp - x.timestamp));
    }
  }
  std::sort(tau.begin(), tau.end());
  std::set<double> distinct_positive;
  for (double t : tau) {
    if (t > 0) distinct_positive.insert(t);
    if (distinct_positive.size() >= n_buckets) break;
  }
  if (distinct_positive.size() < n_buckets) {
    throw DataError("tte-t: only " + std::to_string(distinct_positive.size()) +
                    " distinct positive time intervals for " + std::to_string(n_buckets) +
                    " buckets; use fewer buckets");
  }
  const std::size_t n = tau.size();
  std::vector<double> edges;
  for (std::size_t k = 1; k < n_buckets; ++k) {
    const std::size_t rank = (k * n + n_buckets - 1) / n_buckets;  // ceil(k*n/B)
    edges.push_back(tau[rank - 1]);
  }
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) {
      throw DataError("tte-t: interval distribution too concentrated for " +
                      std::to_string(n_buckets) + " equal-frequency buckets; use fewer buckets");
    }
  }
  return edges;
}

// Bucket 1 + #{edges < tau}, so buckets run 1..edges.size()+1.
inline std::size_t tte_t_bucket(std::span<const double> edges, double tau) {
  return 1 + static_cast<std::size_t>(std::lower_bound(edges.begin(), edges.end(), tau) - edges.begin());
}

// f(.) mapping a behavior or the target to a temporal bucket id.
class TemporalEncoder {
 public:
  TemporalEncoder() = default;

  static TemporalEncoder none() { return {}; }
  static TemporalEncoder tte_p(std::size_t max_len) {
    return TemporalEncoder(EncoderKind::kTteP, max_len + 1, {});
  }
  static TemporalEncoder coe(std::size_t max_len) {
    return TemporalEncoder(EncoderKind::kCoe, max_len + 2, {});
  }
  static TemporalEncoder tte_t(std::vector<double> edges) {
    for (std::size_t k = 1; k < edges.size(); ++k) {
      if (!(edges[k] > edges[k - 1])) throw DataError("tte-t: bin edges must be strictly increasing");
    }
    const std::size_t n = edges.size() + 2;
    return TemporalEncoder(EncoderKind::kTteT, n, std::move(edges));
  }
  static TemporalEncoder fit(EncoderKind kind, std::size_t max_len, std::span<const Sample> train,
                             std::size_t tte_t_buckets = 10) {
    switch (kind) {
      case EncoderKind::kNone: return none();
      case EncoderKind::kTteP: return tte_p(max_len);
      case EncoderKind::kCoe: return coe(max_len);
      case EncoderKind::kTteT: return tte_t(fit_tte_t_bins(train, tte_t_buckets));
    }
    return none();
  }

  EncoderKind kind() const { return kind_; }
  bool enabled() const { return kind_ != EncoderKind::kNone; }
  // Rows of the temporal embedding table.
  std::size_t n_buckets() const { return n_buckets_; }
  const std::vector<double>& bin_edges() const { return edges_; }

  // Behavior i is 1-based, oldest first.
  std::size_t behavior_bucket(const Sample& s, std::size_t i) const {
    switch (kind_) {
      case EncoderKind::kTteP: return tin::tte_p(s.length(), i, n_buckets_);
      case EncoderKind::kCoe: return tin::coe(s.length(), i, n_buckets_);
      case EncoderKind::kTteT: {
        if (i < 1 || i > s.length()) throw DimensionError("tte-t: behavior index out of range");
        const double tau = static_cast<double>(s.target.timestamp - s.history[i - 1].timestamp);
        return tte_t_bucket(edges_, tau);
      }
      case EncoderKind::kNone: break;
    }
    throw InputError("temporal encoder is disabled");
  }

  std::size_t target_bucket(const Sample& s) const {
    switch (kind_) {
      case EncoderKind::kTteP:
      case EncoderKind::kTteT: return 0;
      case EncoderKind::kCoe: return std::min(s.length() + 1, n_buckets_ - 1);
      case EncoderKind::kNone: break;
    }
    throw InputError("temporal encoder is disabled");
  }

  friend bool operator==(const TemporalEncoder&, const TemporalEncoder&) = default;

 private:
  TemporalEncoder(EncoderKind kind, std::size_t n, std::vector<double> edges)
      : kind_(kind), n_buckets_(n), edges_(std::move(edges)) {}

  EncoderKind kind_ = EncoderKind::kNone;
  std::size_t n_buckets_ = 0;
  std::vector<double> edges_;
};

// e~_i = e_i (+) p_f(X_i); index 0 stands for the target, 1..H for behaviors.
inline Dense encode_behavior(const Sample& s, std::size_t i, const EmbeddingTable& categories,
                             const EmbeddingTable& items, const EmbeddingTable* temporal,
                             const TemporalEncoder& enc) {
  const Interaction& x = i == 0 ? s.target : s.history.at(i - 1);
  Dense e = semantic_embed(x, categories, items);
  if (!enc.enabled()) return e;
  if (!temporal || temporal->dim() != e.cols()) {
    throw DimensionError("encode_behavior: temporal table dim must equal semantic dim " +
                         std::to_string(e.cols()));
  }
  const std::size_t bucket = i == 0 ? enc.target_bucket(s) : enc.behavior_bucket(s, i);
  const auto p = temporal->lookup(bucket);
  for (std::size_t j = 0; j < p.size(); ++j) e[j] += p[j];
  return e;
}

}  // namespace tin
