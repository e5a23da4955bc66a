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
#include <array>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/model.hpp"

namespace tin {

enum class GridKind { kGroundTruth, kLearned };

inline std::string grid_kind_name(GridKind k) {
  return k == GridKind::kGroundTruth ? "ground_truth" : "learned";
}

// Categories x target-relative positions 1..P. Missing cells are nullopt.
struct CorrelationGrid {
  std::size_t target_category = 0;
  std::vector<std::size_t> categories;
  std::size_t positions = 0;
  std::vector<std::optional<double>> values;  // row-major, categories x positions
  GridKind kind = GridKind::kGroundTruth;
  std::vector<std::pair<std::string, std::string>> metadata;

  std::optional<double>& at(std::size_t row, std::size_t pos) {
    return values.at(row * positions + (pos - 1));
  }
  const std::optional<double>& at(std::size_t row, std::size_t pos) const {
    return values.at(row * positions + (pos - 1));
  }

  std::optional<std::size_t> row_index(std::size_t category) const {
    for (std::size_t k = 0; k < categories.size(); ++k) {
      if (categories[k] == category) return k;
    }
    return std::nullopt;
  }

  std::vector<std::optional<double>> row(std::size_t category) const {
    const auto k = row_index(category);
    if (!k) throw DataError("grid has no row for category " + std::to_string(category));
    return {values.begin() + static_cast<std::ptrdiff_t>(*k * positions),
            values.begin() + static_cast<std::ptrdiff_t>((*k + 1) * positions)};
  }

  void validate() const {
    if (values.size() != categories.size() * positions) {
      throw DimensionError("grid: values do not match categories x positions");
    }
  }

  friend bool operator==(const CorrelationGrid&, const CorrelationGrid&) = default;
};

// Empirical 2x2 table: n[x][y].
struct JointCounts {
  std::array<std::array<double, 2>, 2> n{};
  double total() const { return n[0][0] + n[0][1] + n[1][0] + n[1][1]; }
};

// MI(x; y) in nats from counts, with 0 * ln(0 / q) := 0.
inline double mutual_information(const JointCounts& c) {
  const double total = c.total();
  if (total == 0.0) return 0.0;
  const double nx[2] = {c.n[0][0] + c.n[0][1], c.n[1][0] + c.n[1][1]};
  const double ny[2] = {c.n[0][0] + c.n[1][0], c.n[0][1] + c.n[1][1]};
  double mi = 0.0;
  for (int x = 0; x < 2; ++x) {
    for (int y = 0; y < 2; ++y) {
      const double nxy = c.n[x][y];
      if (nxy == 0.0) continue;
      mi += nxy / total * std::log(nxy * total / (nx[x] * ny[y]));
    }
  }
  return std::max(mi, 0.0);
}

namespace detail {

inline std::vector<const Sample*> restrict_to_target(std::span<const Sample> samples, std::size_t c_t) {
  std::vector<const Sample*> out;
  for (const Sample& s : samples) {
    if (s.target.category == c_t) out.push_back(&s);
  }
  if (out.empty()) {
    throw DataError("no samples with target category " + std::to_string(c_t));
  }
  return out;
}

inline void check_grid_args(std::span<const std::size_t> rows, std::size_t positions) {
  if (rows.empty()) throw InputError("grid needs at least one row category");
  if (positions == 0) throw InputError("grid needs at least one position");
}

}  // namespace detail

// The K most frequent behavior categories at positions 1..P among samples
// whose target has category c_t, by descending count then ascending id. c_t
// itself always appears: it replaces the K-th entry when it would not.
inline std::vector<std::size_t> top_categories(std::span<const Sample> samples, std::size_t c_t,
                                               std::size_t k, std::size_t positions) {
  if (k == 0) throw InputError("top-k must be positive");
  const auto restricted = detail::restrict_to_target(samples, c_t);
  std::map<std::size_t, std::size_t> freq;
  for (const Sample* s : restricted) {
    const std::size_t h = s->length();
    for (std::size_t p = 1; p <= std::min(positions, h); ++p) ++freq[s->history[h - p].category];
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::size_t> out;
  for (const auto& [cat, n] : ranked) {
    if (out.size() == k) break;
    out.push_back(cat);
  }
  if (std::find(out.begin(), out.end(), c_t) == out.end()) {
    if (out.size() == k) out.pop_back();
    out.push_back(c_t);
  }
  return out;
}

// Ground-truth category-wise target-aware correlation. Restricted to samples
// with target category c_t; cell (c, p) is MI between x = [behavior at
// position p exists and has category c] and the label. Samples shorter than
// p contribute x = 0.
inline CorrelationGrid ground_truth_ctc(std::span<const Sample> samples, std::size_t c_t,
                                        std::span<const std::size_t> rows, std::size_t positions) {
  detail::check_grid_args(rows, positions);
  const auto restricted = detail::restrict_to_target(samples, c_t);
  std::map<std::size_t, std::size_t> row_of;
  for (std::size_t k = 0; k < rows.size(); ++k) row_of.emplace(rows[k], k);

  const std::size_t cells = rows.size() * positions;
  std::vector<double> x1y1(cells, 0.0), x1y0(cells, 0.0);
  double n_pos = 0.0, n_neg = 0.0;
  for (const Sample* s : restricted) {
    (s->label ? n_pos : n_neg) += 1.0;
    const std::size_t h = s->length();
    for (std::size_t p = 1; p <= std::min(positions, h); ++p) {
      auto it = row_of.find(s->history[h - p].category);
      if (it == row_of.end()) continue;
      const std::size_t cell = it->second * positions + (p - 1);
      (s->label ? x1y1 : x1y0)[cell] += 1.0;
    }
  }

  CorrelationGrid grid;
  grid.kind = GridKind::kGroundTruth;
  grid.target_category = c_t;
  grid.categories.assign(rows.begin(), rows.end());
  grid.positions = positions;
  grid.values.resize(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    JointCounts jc;
    jc.n[1][1] = x1y1[cell];
    jc.n[1][0] = x1y0[cell];
    jc.n[0][1] = n_pos - x1y1[cell];
    jc.n[0][0] = n_neg - x1y0[cell];
    grid.values[cell] = mutual_information(jc);
  }
  grid.metadata = {{"estimator", "mutual information, natural log"},
                   {"population", std::to_string(restricted.size()) + " samples"},
                   {"absent_position", "x=0"}};
  return grid;
}

enum class Aggregation { kMean, kMedian };

// Learned correlation e^z * ||r||_2 averaged over behavior occurrences at
// each (category, position). Cells without occurrences are missing.
inline CorrelationGrid learned_ctc(const Model& model, std::span<const Sample> samples,
                                   std::size_t c_t, std::span<const std::size_t> rows,
                                   std::size_t positions, Aggregation agg = Aggregation::kMean) {
  detail::check_grid_args(rows, positions);
  const auto restricted = detail::restrict_to_target(samples, c_t);
  std::map<std::size_t, std::size_t> row_of;
  for (std::size_t k = 0; k < rows.size(); ++k) row_of.emplace(rows[k], k);

  const std::size_t cells = rows.size() * positions;
  std::vector<std::vector<double>> occ(cells);
  for (const Sample* s : restricted) {
    const std::size_t h = s->length();
    std::optional<std::vector<CtcTerm>> terms;
    for (std::size_t p = 1; p <= std::min(positions, h); ++p) {
      auto it = row_of.find(s->history[h - p].category);
      if (it == row_of.end()) continue;
      if (!terms) terms = model.extract_learned_ctc_terms(*s);
      occ[it->second * positions + (p - 1)].push_back((*terms)[h - p].value());
    }
  }

  CorrelationGrid grid;
  grid.kind = GridKind::kLearned;
  grid.target_category = c_t;
  grid.categories.assign(rows.begin(), rows.end());
  grid.positions = positions;
  grid.values.resize(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    auto& v = occ[cell];
    if (v.empty()) continue;
    if (agg == Aggregation::kMean) {
      double sum = 0.0;
      for (double x : v) sum += x;
      grid.values[cell] = sum / static_cast<double>(v.size());
    } else {
      std::sort(v.begin(), v.end());
      const std::size_t m = v.size() / 2;
      grid.values[cell] = v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
    }
  }
  const bool has_attention = model.spec().code().ta;
  grid.metadata = {{"model", variant_name(model.spec().variant)},
                   {"encoder", encoder_name(model.spec().encoder)},
                   {"aggregation", agg == Aggregation::kMean ? "mean" : "median"},
                   {"attention_term", has_attention ? "exp(<e~,v~>/sqrt(d))" : "1 (no attention)"},
                   {"scaling_note", "logit scaled by 1/sqrt(d); the unscaled form exp(<e~,v~>) differs"}};
  return grid;
}

enum class PearsonBin { kPoor, kMedium, kStrong };

inline std::string bin_name(PearsonBin b) {
  switch (b) {
    case PearsonBin::kPoor: return "poor";
    case PearsonBin::kMedium: return "medium";
    case PearsonBin::kStrong: return "strong";
  }
  return "poor";
}

// [-1, 0.2] poor, (0.2, 0.8] medium, (0.8, 1] strong.
inline PearsonBin pearson_bin(double r) {
  if (r <= 0.2) return PearsonBin::kPoor;
  if (r <= 0.8) return PearsonBin::kMedium;
  return PearsonBin::kStrong;
}

inline bool is_constant(std::span<const double> x, double rel_tol = 1e-12) {
  if (x.empty()) return true;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo <= rel_tol * std::max(std::abs(*hi), std::abs(*lo));
}

// Pearson correlation; a constant input (within 1e-12 relative) yields 0.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("pearson: length mismatch");
  if (a.size() < 2) throw DataError("pearson: need at least two paired values");
  if (is_constant(a) || is_constant(b)) return 0.0;
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

struct PearsonReport {
  std::size_t target_category = 0;
  double coefficient = 0.0;
  PearsonBin bin = PearsonBin::kPoor;
  std::size_t n_positions = 0;  // paired cells used
};

// Pearson between the matching-category rows (row category == target
// category) of a ground-truth and a learned grid, over positions present in both.
inline PearsonReport pearson_compare(const CorrelationGrid& gt, const CorrelationGrid& learned) {
  if (gt.positions != learned.positions) throw DimensionError("pearson_compare: position axes differ");
  if (gt.target_category != learned.target_category) {
    throw DataError("pearson_compare: grids are for different target categories");
  }
  const std::size_t c_t = gt.target_category;
  const auto a = gt.row(c_t);
  const auto b = learned.row(c_t);
  std::vector<double> x, y;
  for (std::size_t p = 0; p < a.size(); ++p) {
    if (a[p] && b[p]) {
      x.push_back(*a[p]);
      y.push_back(*b[p]);
    }
  }
  if (x.size() < 2) throw DataError("pearson_compare: fewer than two positions present in both rows");
  PearsonReport rep;
  rep.target_category = c_t;
  rep.coefficient = pearson(x, y);
  rep.bin = pearson_bin(rep.coefficient);
  rep.n_positions = x.size();
  return rep;
}

struct BinDistribution {
  std::array<std::size_t, 3> count{};
  std::size_t total() const { return count[0] + count[1] + count[2]; }
  double fraction(PearsonBin b) const {
    const std::size_t t = total();
    return t == 0 ? 0.0 : static_cast<double>(count[static_cast<int>(b)]) / static_cast<double>(t);
  }
};

inline BinDistribution bin_distribution(std::span<const PearsonReport> reports) {
  BinDistribution d;
  for (const auto& r : reports) ++d.count[static_cast<int>(r.bin)];
  return d;
}

// --- files ------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// `# key: value` metadata, then `category,1,..,P`, then one row per category.
inline void export_grid(const CorrelationGrid& grid, std::ostream& out) {
  grid.validate();
  out << "# target_category: " << grid.target_category << '\n';
  out << "# kind: " << grid_kind_name(grid.kind) << '\n';
  for (const auto& [k, v] : grid.metadata) out << "# " << k << ": " << v << '\n';
  out << "category";
  for (std::size_t p = 1; p <= grid.positions; ++p) out << ',' << p;
  out << '\n';
  for (std::size_t r = 0; r < grid.categories.size(); ++r) {
    out << grid.categories[r];
    for (std::size_t p = 1; p <= grid.positions; ++p) {
      out << ',';
      if (const auto& v = grid.at(r, p)) out << detail::format_double(*v);
    }
    out << '\n';
  }
}

inline void export_grid(const CorrelationGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write grid " + path);
  export_grid(grid, out);
  if (!out) throw InputError("write failed for " + path);
}

inline CorrelationGrid read_grid(std::istream& in, const std::string& name) {
  CorrelationGrid grid;
  std::string line;
  bool header = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    std::string_view row = detail::strip_cr(line);
    if (row.empty()) continue;
    if (row.front() == '#') {
      const auto colon = row.find(": ");
      if (colon == std::string_view::npos) throw InputError(where + ": malformed metadata line");
      const std::string key(row.substr(2, colon - 2));
      const std::string value(row.substr(colon + 2));
      if (key == "target_category") {
        const auto v = detail::parse_int<std::size_t>(value);
        if (!v) throw InputError(where + ": bad target_category");
        grid.target_category = *v;
      } else if (key == "kind") {
        if (value == "ground_truth") grid.kind = GridKind::kGroundTruth;
        else if (value == "learned") grid.kind = GridKind::kLearned;
        else throw InputError(where + ": unknown grid kind '" + value + "'");
      } else {
        grid.metadata.emplace_back(key, value);
      }
      continue;
    }
    const auto fields = detail::split(row, ',');
    if (!header) {
      header = true;
      grid.positions = fields.size() - 1;
      continue;
    }
    if (fields.size() != grid.positions + 1) throw InputError(where + ": wrong number of columns");
    const auto cat = detail::parse_int<std::size_t>(fields[0]);
    if (!cat) throw InputError(where + ": bad category id");
    grid.categories.push_back(*cat);
    for (std::size_t p = 1; p < fields.size(); ++p) {
      if (fields[p].empty()) {
        grid.values.emplace_back();
        continue;
      }
      const std::string cell(fields[p]);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end != cell.c_str() + cell.size()) throw InputError(where + ": bad value '" + cell + "'");
      grid.values.emplace_back(v);
    }
  }
  if (!header) throw InputError(name + ": missing grid header");
  return grid;
}

inline CorrelationGrid read_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open grid " + path);
  return read_grid(in, path);
}

inline void write_pearson_reports(const std::string& path, std::span<const PearsonReport> reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << "target_category,coefficient,bin\n";
  for (const auto& r : reports) {
    out << r.target_category << ',' << detail::format_double(r.coefficient) << ',' << bin_name(r.bin) << '\n';
  }
}

inline void write_bin_distribution(const std::string& path, const BinDistribution& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << "bin,count,fraction\n";
  for (PearsonBin b : {PearsonBin::kPoor, PearsonBin::kMedium, PearsonBin::kStrong}) {
    out << bin_name(b) << ',' << d.count[static_cast<int>(b)] << ','
        << detail::format_double(d.fraction(b)) << '\n';
  }
}

}  // namespace tin
