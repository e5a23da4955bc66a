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
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/tensor.hpp"

namespace tin {

// Generator for datasets with a planted semantic-temporal pattern. The label
// of a (history, target) pair is Bernoulli(sigmoid(base_logit + boost *
// sum_i [c_i == c_t] * decay^pos_i)), pos_i = 1 for the most recent behavior.
struct SynthConfig {
  std::size_t n_users = 20000;
  std::size_t n_categories = 10;
  std::size_t max_len = 20;  // H is uniform in [min_len, max_len]
  std::size_t min_len = 1;
  double decay = 0.7;
  double boost = 3.0;
  double base_logit = -1.0;
  std::size_t samples_per_user = 4;    // targets sharing one history
  std::size_t items_per_category = 1;  // item ids are category * items_per_category + j
  double test_fraction = 0.2;          // trailing users form the test split
  std::uint64_t seed = 1;

  void validate() const {
    auto bad = [](const std::string& why) { throw InputError("synth: " + why); };
    if (n_users == 0) bad("n_users must be positive");
    if (n_categories == 0) bad("n_categories must be positive");
    if (min_len == 0 || min_len > max_len) bad("need 1 <= min_len <= max_len");
    if (!(decay > 0.0 && decay <= 1.0)) bad("decay must lie in (0, 1]");
    if (!std::isfinite(boost) || !std::isfinite(base_logit)) bad("boost/base_logit must be finite");
    if (samples_per_user == 0) bad("samples_per_user must be positive");
    if (items_per_category == 0) bad("items_per_category must be positive");
    if (!(test_fraction >= 0.0 && test_fraction < 1.0)) bad("test_fraction must lie in [0, 1)");
  }

  std::vector<std::string> header() const {
    std::ostringstream os;
    os.precision(17);
    std::vector<std::string> h;
    auto put = [&](const std::string& k, auto v) {
      os.str("");
      os << k << ": " << v;
      h.push_back(os.str());
    };
    put("generator", "planted-decay");
    put("n_users", n_users);
    put("n_categories", n_categories);
    put("max_len", max_len);
    put("min_len", min_len);
    put("decay", decay);
    put("boost", boost);
    put("base_logit", base_logit);
    put("samples_per_user", samples_per_user);
    put("items_per_category", items_per_category);
    put("test_fraction", test_fraction);
    put("seed", seed);
    return h;
  }
};

// Planted logit for a sample under `cfg`.
inline double planted_logit(const SynthConfig& cfg, const Sample& s) {
  double signal = 0.0;
  const std::size_t h = s.history.size();
  for (std::size_t i = 0; i < h; ++i) {
    if (s.history[i].category == s.target.category) {
      signal += std::pow(cfg.decay, static_cast<double>(h - i));
    }
  }
  return cfg.base_logit + cfg.boost * signal;
}

struct SynthDataset {
  SynthConfig config;
  std::vector<Sample> train;
  std::vector<Sample> test;
  DatasetStats stats;
};

inline SynthDataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthDataset ds;
  ds.config = cfg;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<std::size_t> pick_len(cfg.min_len, cfg.max_len);
  std::uniform_int_distribution<std::size_t> pick_cat(0, cfg.n_categories - 1);
  std::uniform_int_distribution<std::size_t> pick_item(0, cfg.items_per_category - 1);
  std::uniform_int_distribution<std::int64_t> pick_gap(1, 86400);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const auto n_test = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.n_users) * cfg.test_fraction));
  const std::size_t n_train_users = cfg.n_users - n_test;

  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    const std::size_t h = pick_len(rng);
    Sample base;
    base.user = u;
    std::int64_t ts = 1'000'000'000 + pick_gap(rng);
    for (std::size_t i = 0; i < h; ++i) {
      const std::size_t c = pick_cat(rng);
      base.history.push_back({u, c * cfg.items_per_category + pick_item(rng), c, ts});
      ts += pick_gap(rng);
    }
    auto& out = u < n_train_users ? ds.train : ds.test;
    for (std::size_t k = 0; k < cfg.samples_per_user; ++k) {
      Sample s = base;
      const std::size_t c = pick_cat(rng);
      s.target = {u, c * cfg.items_per_category + pick_item(rng), c, ts};
      s.label = unit(rng) < sigmoid(planted_logit(cfg, s)) ? 1 : 0;
      out.push_back(std::move(s));
    }
  }
  ds.stats = {cfg.n_users, cfg.n_categories * cfg.items_per_category, cfg.n_categories,
              ds.train.size() + ds.test.size()};
  return ds;
}

}  // namespace tin
