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

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "tin/checkpoint.hpp"
#include "tin/dataio.hpp"
#include "tin/error.hpp"
#include "tin/model.hpp"
#include "tin/optimizer.hpp"
#include "tin/trainer.hpp"

namespace tin {

// Everything a `train` run reads from its config file.
struct RunConfig {
  ModelSpec model;
  TrainConfig train;
};

inline RunConfig default_run_config() {
  RunConfig c;
  c.model.d_cat = 64;
  c.model.d_item = 64;
  c.model.mlp_hidden = {80, 40};
  c.model.max_len = 100;
  c.train.optimizer.kind = OptimizerKind::kAdam;
  c.train.optimizer.learning_rate = 0.001;
  c.train.batch_size = 128;
  c.train.epochs = 2;
  return c;
}

// Reads `key = value` lines into `cfg`. '#' starts a comment. Unknown keys
// and malformed values are errors.
inline void apply_config(std::istream& in, const std::string& name, RunConfig& cfg) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = name + ":" + std::to_string(lineno);
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError(where + ": expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto as_size = [&]() {
      const auto v = detail::parse_int<std::size_t>(value);
      if (!v) throw InputError(where + ": " + key + " expects a non-negative integer");
      return *v;
    };
    auto as_double = [&]() {
      char* end = nullptr;
      const double v = std::strtod(value.c_str(), &end);
      if (value.empty() || end != value.c_str() + value.size()) {
        throw InputError(where + ": " + key + " expects a number");
      }
      return v;
    };
    auto as_bool = [&]() {
      if (value == "true" || value == "1") return true;
      if (value == "false" || value == "0") return false;
      throw InputError(where + ": " + key + " expects true|false");
    };

    if (key == "batch_size") cfg.train.batch_size = as_size();
    else if (key == "epochs") cfg.train.epochs = as_size();
    else if (key == "seed") cfg.train.seed = as_size();
    else if (key == "shuffle") cfg.train.shuffle = as_bool();
    else if (key == "eval_every") cfg.train.eval_every = as_size();
    else if (key == "threads") cfg.train.threads = as_size();
    else if (key == "optimizer") cfg.train.optimizer.kind = parse_optimizer(value);
    else if (key == "learning_rate") cfg.train.optimizer.learning_rate = as_double();
    else if (key == "beta1") cfg.train.optimizer.beta1 = as_double();
    else if (key == "beta2") cfg.train.optimizer.beta2 = as_double();
    else if (key == "epsilon") cfg.train.optimizer.epsilon = as_double();
    else if (key == "d_cat") cfg.model.d_cat = as_size();
    else if (key == "d_item") cfg.model.d_item = as_size();
    else if (key == "mlp_hidden") cfg.model.mlp_hidden = detail::parse_sizes(value);
    else if (key == "max_len") cfg.model.max_len = as_size();
    else if (key == "tte_t_buckets") cfg.model.tte_t_buckets = as_size();
    else if (key == "d_ta") cfg.model.d_ta = as_size();
    else if (key == "d_tr") cfg.model.d_tr = as_size();
    else throw InputError(where + ": unknown config key '" + key + "'");
  }
}

inline void load_config(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config " + path);
  apply_config(in, path, cfg);
}

// Canonical `key = value` dump, used in run manifests.
inline std::map<std::string, std::string> describe(const RunConfig& c) {
  std::map<std::string, std::string> m;
  auto d = [](double v) { return detail::hex_double(v); };
  m["batch_size"] = std::to_string(c.train.batch_size);
  m["epochs"] = std::to_string(c.train.epochs);
  m["seed"] = std::to_string(c.train.seed);
  m["shuffle"] = c.train.shuffle ? "true" : "false";
  m["eval_every"] = std::to_string(c.train.eval_every);
  m["threads"] = std::to_string(c.train.threads);
  m["optimizer"] = optimizer_name(c.train.optimizer.kind);
  m["learning_rate"] = d(c.train.optimizer.learning_rate);
  m["beta1"] = d(c.train.optimizer.beta1);
  m["beta2"] = d(c.train.optimizer.beta2);
  m["epsilon"] = d(c.train.optimizer.epsilon);
  m["variant"] = variant_name(c.model.variant);
  m["encoder"] = encoder_name(c.model.encoder);
  m["d_cat"] = std::to_string(c.model.d_cat);
  m["d_item"] = std::to_string(c.model.d_item);
  m["mlp_hidden"] = detail::join_sizes(c.model.mlp_hidden);
  m["max_len"] = std::to_string(c.model.max_len);
  m["tte_t_buckets"] = std::to_string(c.model.tte_t_buckets);
  m["d_ta"] = std::to_string(c.model.d_ta);
  m["d_tr"] = std::to_string(c.model.d_tr);
  return m;
}

}  // namespace tin
