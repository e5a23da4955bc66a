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
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tin/error.hpp"

namespace tin {

// Row-major matrix of doubles. Vectors are 1xN instances.
class Dense {
 public:
  Dense() = default;
  Dense(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Dense(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw DimensionError("Dense: data length " + std::to_string(data_.size()) +
                           " does not match " + shape_string());
    }
  }
  Dense(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("Dense: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Dense row_vector(std::span<const double> values) {
    return Dense(1, values.size(), std::vector<double>(values.begin(), values.end()));
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Dense& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Dense&, const Dense&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void require(bool ok, const char* op, const Dense& a, const Dense& b) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_string() +
                         " and " + b.shape_string());
  }
}

}  // namespace detail

// out[i][j] = a[i][j] + b[0][j]
inline Dense add_broadcast(const Dense& a, const Dense& b) {
  detail::require(b.rows() == 1 && a.cols() == b.cols(), "add_broadcast", a, b);
  Dense out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] += b[j];
  }
  return out;
}

inline Dense add(const Dense& a, const Dense& b) {
  detail::require(a.same_shape(b), "add", a, b);
  Dense out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

inline Dense hadamard(const Dense& a, const Dense& b) {
  detail::require(a.same_shape(b), "hadamard", a, b);
  Dense out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

// Row-wise product of an HxD matrix with a 1xD vector.
inline Dense hadamard_broadcast(const Dense& a, const Dense& b) {
  detail::require(b.rows() == 1 && a.cols() == b.cols(), "hadamard_broadcast", a, b);
  Dense out = a;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto r = out.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] *= b[j];
  }
  return out;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  detail::require(a.cols() == b.rows(), "matmul", a, b);
  Dense out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto o = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      auto br = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) o[j] += aik * br[j];
    }
  }
  return out;
}

inline Dense concat_cols(std::span<const Dense* const> parts) {
  if (parts.empty()) return Dense(1, 0);
  const std::size_t rows = parts.front()->rows();
  std::size_t cols = 0;
  for (const Dense* p : parts) {
    detail::require(p->rows() == rows, "concat_cols", *parts.front(), *p);
    cols += p->cols();
  }
  Dense out(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t off = 0;
    for (const Dense* p : parts) {
      auto src = p->row(i);
      std::copy(src.begin(), src.end(), out.row(i).begin() + off);
      off += p->cols();
    }
  }
  return out;
}

inline Dense relu(const Dense& x) {
  Dense out = x;
  for (auto& v : out.values()) v = v > 0.0 ? v : 0.0;
  return out;
}

// Softmax over a row vector with max-subtraction.
inline Dense softmax_row(const Dense& logits) {
  if (logits.rows() != 1 || logits.cols() == 0) {
    throw DimensionError("softmax_row: expected a non-empty 1xH row, got " +
                         logits.shape_string());
  }
  Dense out = logits;
  const double mx = *std::max_element(out.values().begin(), out.values().end());
  double total = 0.0;
  for (auto& v : out.values()) {
    v = std::exp(v - mx);
    total += v;
  }
  for (auto& v : out.values()) v /= total;
  return out;
}

// z_i = <query, keys_i> * scale.
inline Dense scaled_dot_logits(const Dense& keys, const Dense& query, double scale) {
  detail::require(query.rows() == 1 && keys.cols() == query.cols(), "scaled_dot", keys, query);
  if (keys.rows() == 0) throw DataError("scaled_dot_softmax: empty behavior sequence");
  Dense z(1, keys.rows());
  for (std::size_t i = 0; i < keys.rows(); ++i) {
    auto k = keys.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) dot += k[j] * query[j];
    z[i] = dot * scale;
  }
  return z;
}

inline Dense scaled_dot_softmax(const Dense& keys, const Dense& query, double scale) {
  return softmax_row(scaled_dot_logits(keys, query, scale));
}

struct XentResult {
  double loss;
  double grad_logit;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Binary cross-entropy on a logit: loss = max(z,0) - z*y + log1p(exp(-|z|)).
inline XentResult sigmoid_xent(double logit, int label) {
  if (label != 0 && label != 1) throw InputError("sigmoid_xent: label must be 0 or 1");
  const double y = label;
  const double loss =
      std::max(logit, 0.0) - logit * y + std::log1p(std::exp(-std::abs(logit)));
  return {loss, sigmoid(logit) - y};
}

// Gradient sink for one parameter. Tracks which rows received a contribution
// so that sparse (embedding) parameters can be updated lazily.
class GradAccumulator {
 public:
  GradAccumulator() = default;
  GradAccumulator(std::size_t rows, std::size_t cols)
      : grad_(rows, cols), marked_(rows, 0) {}

  void add_row(std::size_t r, std::span<const double> g) {
    auto dst = grad_.row(r);
    for (std::size_t j = 0; j < g.size(); ++j) dst[j] += g[j];
    mark(r);
  }

  void add(const Dense& g) {
    detail::require(g.same_shape(grad_), "GradAccumulator::add", grad_, g);
    for (std::size_t i = 0; i < g.size(); ++i) grad_[i] += g[i];
    for (std::size_t r = 0; r < grad_.rows(); ++r) mark(r);
  }

  // Adds another accumulator's contribution row by row in its touch order.
  void merge(const GradAccumulator& other) {
    for (std::size_t r : other.rows_) add_row(r, other.grad_.row(r));
  }

  void clear() {
    for (std::size_t r : rows_) {
      auto row = grad_.row(r);
      std::fill(row.begin(), row.end(), 0.0);
      marked_[r] = 0;
    }
    rows_.clear();
  }

  const Dense& grad() const { return grad_; }
  Dense& grad() { return grad_; }
  // Rows touched since the last clear(), in first-touch order.
  std::span<const std::size_t> touched_rows() const { return rows_; }
  bool touched(std::size_t r) const { return marked_[r] != 0; }

 private:
  void mark(std::size_t r) {
    if (!marked_[r]) {
      marked_[r] = 1;
      rows_.push_back(r);
    }
  }

  Dense grad_;
  std::vector<unsigned char> marked_;
  std::vector<std::size_t> rows_;
};

}  // namespace tin
