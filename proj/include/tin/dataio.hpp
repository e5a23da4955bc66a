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
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tin/error.hpp"

namespace tin {

struct Interaction {
  std::size_t user = 0;
  std::size_t item = 0;
  std::size_t category = 0;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

// One labeled instance. History is ordered oldest to newest.
struct Sample {
  std::size_t user = 0;
  std::vector<Interaction> history;
  Interaction target;
  int label = 0;

  std::size_t length() const { return history.size(); }
  friend bool operator==(const Sample&, const Sample&) = default;
};

struct DatasetStats {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_categories = 0;
  std::size_t n_samples = 0;

  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

// String key to dense id, assigned in first-seen order.
class IdDictionary {
 public:
  std::size_t intern(std::string_view key) {
    auto it = ids_.find(std::string(key));
    if (it != ids_.end()) return it->second;
    const std::size_t id = keys_.size();
    keys_.emplace_back(key);
    ids_.emplace(keys_.back(), id);
    return id;
  }

  std::optional<std::size_t> find(std::string_view key) const {
    auto it = ids_.find(std::string(key));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& key(std::size_t id) const { return keys_.at(id); }
  std::size_t size() const { return keys_.size(); }
  bool empty() const { return keys_.empty(); }

  // `key<TAB>id` per line, ids ascending.
  void write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write dictionary " + path);
    for (std::size_t i = 0; i < keys_.size(); ++i) out << keys_[i] << '\t' << i << '\n';
    if (!out) throw InputError("write failed for " + path);
  }

  static IdDictionary read(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open dictionary " + path);
    IdDictionary dict;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto tab = line.rfind('\t');
      if (tab == std::string::npos) {
        throw InputError(path + ":" + std::to_string(lineno) + ": expected key<TAB>id");
      }
      const std::size_t id = dict.intern(std::string_view(line).substr(0, tab));
      if (std::to_string(id) != line.substr(tab + 1)) {
        throw InputError(path + ":" + std::to_string(lineno) + ": ids must be dense and ordered");
      }
    }
    return dict;
  }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> keys_;
};

struct InteractionLog {
  std::vector<Interaction> interactions;
  IdDictionary users;
  IdDictionary items;
  IdDictionary categories;
};

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
std::optional<T> parse_int(std::string_view s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

inline std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace detail

// Parses `user<TAB>item<TAB>category<TAB>timestamp` lines. Blank lines are
// ignored; repeated rows are kept.
inline InteractionLog parse_interactions(std::istream& in, const std::string& name) {
  InteractionLog log;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::strip_cr(line);
    if (row.empty()) continue;
    const auto fields = detail::split(row, '\t');
    auto fail = [&](const std::string& why) {
      throw InputError(name + ":" + std::to_string(lineno) + ": " + why);
    };
    if (fields.size() != 4) fail("expected 4 tab-separated fields, got " + std::to_string(fields.size()));
    for (std::size_t k = 0; k < 3; ++k) {
      if (fields[k].empty()) fail("empty key in field " + std::to_string(k + 1));
    }
    const auto ts = detail::parse_int<std::int64_t>(fields[3]);
    if (!ts) fail("timestamp '" + std::string(fields[3]) + "' is not an integer");
    Interaction x;
    x.user = log.users.intern(fields[0]);
    x.item = log.items.intern(fields[1]);
    x.category = log.categories.intern(fields[2]);
    x.timestamp = *ts;
    log.interactions.push_back(x);
  }
  return log;
}

inline InteractionLog load_interactions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open interaction log " + path);
  return parse_interactions(in, path);
}

inline DatasetStats log_stats(const InteractionLog& log, std::size_t n_samples = 0) {
  return {log.users.size(), log.items.size(), log.categories.size(), n_samples};
}

struct SplitOptions {
  std::size_t min_user_len = 5;
  std::size_t max_len = 100;
  std::size_t neg_per_pos = 1;
};

struct Split {
  std::vector<Sample> train;
  std::vector<Sample> test;
};

// Category of each item: the category it carried at its first occurrence.
inline std::vector<std::size_t> item_categories(const InteractionLog& log) {
  std::vector<std::size_t> cat(log.items.size(), 0);
  std::vector<unsigned char> seen(log.items.size(), 0);
  for (const Interaction& x : log.interactions) {
    if (!seen[x.item]) {
      seen[x.item] = 1;
      cat[x.item] = x.category;
    }
  }
  return cat;
}

// Leave-one-out construction. For a user with n interactions sorted by time,
// interaction n is the test target with the first n-1 as history, and every
// prefix of length k in [1, n-2] predicts interaction k+1 for training. Each
// positive is followed by `neg_per_pos` copies whose target item is drawn
// uniformly from all items (redrawn when it equals the positive item).
inline Split build_leave_one_out(const InteractionLog& log, const SplitOptions& opt,
                                 std::uint64_t seed) {
  if (opt.max_len == 0) throw InputError("max_len must be at least 1");
  if (opt.min_user_len < 2) throw InputError("min_user_len must be at least 2");
  std::vector<std::vector<Interaction>> per_user(log.users.size());
  for (const Interaction& x : log.interactions) per_user[x.user].push_back(x);

  const std::vector<std::size_t> item_cat = item_categories(log);
  const std::size_t n_items = log.items.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_item(0, n_items == 0 ? 0 : n_items - 1);

  Split split;
  std::size_t eligible = 0;
  auto emit = [&](std::vector<Sample>& out, const std::vector<Interaction>& seq, std::size_t n_hist) {
    Sample pos;
    pos.user = seq.front().user;
    const std::size_t first = n_hist > opt.max_len ? n_hist - opt.max_len : 0;
    pos.history.assign(seq.begin() + static_cast<std::ptrdiff_t>(first),
                       seq.begin() + static_cast<std::ptrdiff_t>(n_hist));
    pos.target = seq[n_hist];
    pos.label = 1;
    out.push_back(pos);
    for (std::size_t k = 0; k < opt.neg_per_pos; ++k) {
      if (n_items < 2) throw DataError("negative sampling needs at least two items");
      std::size_t item = pick_item(rng);
      while (item == pos.target.item) item = pick_item(rng);
      Sample neg = pos;
      neg.target.item = item;
      neg.target.category = item_cat[item];
      neg.label = 0;
      out.push_back(std::move(neg));
    }
  };

  for (auto& seq : per_user) {
    if (seq.size() < opt.min_user_len) continue;
    ++eligible;
    std::stable_sort(seq.begin(), seq.end(), [](const Interaction& a, const Interaction& b) {
      return a.timestamp < b.timestamp;
    });
    const std::size_t n = seq.size();
    for (std::size_t k = 1; k + 2 <= n; ++k) emit(split.train, seq, k);
    emit(split.test, seq, n - 1);
  }
  if (eligible == 0) {
    throw DataError("no user has at least " + std::to_string(opt.min_user_len) + " interactions");
  }
  return split;
}

// --- sample files -----------------------------------------------------------
//
// label<TAB>H<TAB>item:cat:ts,...<TAB>target_item:target_cat:target_ts<TAB>user
// Lines starting with '#' are comments.

namespace detail {

inline void write_event(std::ostream& out, const Interaction& x) {
  out << x.item << ':' << x.category << ':' << x.timestamp;
}

inline Interaction parse_event(std::string_view s, std::size_t user, const std::string& where) {
  const auto parts = split(s, ':');
  if (parts.size() != 3) throw InputError(where + ": malformed event '" + std::string(s) + "'");
  const auto item = parse_int<std::size_t>(parts[0]);
  const auto cat = parse_int<std::size_t>(parts[1]);
  const auto ts = parse_int<std::int64_t>(parts[2]);
  if (!item || !cat || !ts) throw InputError(where + ": malformed event '" + std::string(s) + "'");
  return {user, *item, *cat, *ts};
}

}  // namespace detail

inline void write_samples(std::ostream& out, const std::vector<Sample>& samples) {
  for (const Sample& s : samples) {
    out << s.label << '\t' << s.history.size() << '\t';
    for (std::size_t i = 0; i < s.history.size(); ++i) {
      if (i) out << ',';
      detail::write_event(out, s.history[i]);
    }
    out << '\t';
    detail::write_event(out, s.target);
    out << '\t' << s.user << '\n';
  }
}

inline void write_samples(const std::string& path, const std::vector<Sample>& samples,
                          const std::vector<std::string>& header = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write samples to " + path);
  for (const std::string& h : header) out << "# " << h << '\n';
  write_samples(out, samples);
  if (!out) throw InputError("write failed for " + path);
}

inline std::vector<Sample> parse_samples(std::istream& in, const std::string& name) {
  std::vector<Sample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view row = detail::strip_cr(line);
    if (row.empty() || row.front() == '#') continue;
    const std::string where = name + ":" + std::to_string(lineno);
    const auto f = detail::split(row, '\t');
    if (f.size() != 5) throw InputError(where + ": expected 5 tab-separated fields");
    const auto label = detail::parse_int<int>(f[0]);
    const auto h = detail::parse_int<std::size_t>(f[1]);
    const auto user = detail::parse_int<std::size_t>(f[4]);
    if (!label || (*label != 0 && *label != 1)) throw InputError(where + ": label must be 0 or 1");
    if (!h || !user) throw InputError(where + ": malformed length or user field");
    Sample s;
    s.user = *user;
    s.label = *label;
    if (*h > 0) {
      for (std::string_view ev : detail::split(f[2], ',')) {
        s.history.push_back(detail::parse_event(ev, s.user, where));
      }
    }
    if (s.history.size() != *h) throw InputError(where + ": H does not match history length");
    s.target = detail::parse_event(f[3], s.user, where);
    out.push_back(std::move(s));
  }
  return out;
}

inline std::vector<Sample> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open sample file " + path);
  return parse_samples(in, path);
}

// `key=value` lines.
inline void write_stats(const std::string& path, const DatasetStats& st) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write stats to " + path);
  out << "n_users=" << st.n_users << '\n'
      << "n_items=" << st.n_items << '\n'
      << "n_categories=" << st.n_categories << '\n'
      << "n_samples=" << st.n_samples << '\n';
}

inline DatasetStats read_stats(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open stats file " + path);
  std::map<std::string, std::size_t> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto v = detail::parse_int<std::size_t>(detail::strip_cr(std::string_view(line).substr(eq + 1)));
    if (!v) throw InputError(path + ": malformed value for " + line.substr(0, eq));
    kv[line.substr(0, eq)] = *v;
  }
  for (const char* k : {"n_users", "n_items", "n_categories", "n_samples"}) {
    if (!kv.count(k)) throw InputError(path + ": missing " + std::string(k));
  }
  return {kv["n_users"], kv["n_items"], kv["n_categories"], kv["n_samples"]};
}

}  // namespace tin
