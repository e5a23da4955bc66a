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

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tin/encoding.hpp"
#include "tin/error.hpp"
#include "tin/model.hpp"

namespace tin {

// Line-oriented checkpoint. Doubles are written as C99 hex floats so a
// save/load cycle is exact and the bytes depend only on the values.
//
//   tin-checkpoint 1
//   variant tin
//   ...
//   bin_edges <n> <e_1> ... <e_n>
//   param <name> <rows> <cols>
//   <one line per row>
//   end
inline constexpr int kCheckpointVersion = 1;

namespace detail {

inline std::string hex_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

inline double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) throw InputError("checkpoint: bad number '" + s + "'");
  return v;
}

inline std::string join_sizes(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out.empty() ? "-" : out;
}

inline std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  if (s == "-" || s.empty()) return out;
  for (std::string_view part : split(s, ',')) {
    const auto v = parse_int<std::size_t>(part);
    if (!v) throw InputError("bad size list '" + s + "'");
    out.push_back(*v);
  }
  return out;
}

}  // namespace detail

inline void save_checkpoint(const Model& model, std::ostream& out) {
  const ModelSpec& s = model.spec();
  out << "tin-checkpoint " << kCheckpointVersion << '\n';
  out << "variant " << variant_name(s.variant) << '\n';
  out << "code " << s.code().str() << '\n';
  out << "encoder " << encoder_name(s.encoder) << '\n';
  out << "d_cat " << s.d_cat << '\n';
  out << "d_item " << s.d_item << '\n';
  out << "d_ta " << s.d_ta << '\n';
  out << "d_tr " << s.d_tr << '\n';
  out << "mlp_hidden " << detail::join_sizes(s.mlp_hidden) << '\n';
  out << "max_len " << s.max_len << '\n';
  out << "tte_t_buckets " << s.tte_t_buckets << '\n';
  out << "n_items " << model.vocab().n_items << '\n';
  out << "n_categories " << model.vocab().n_categories << '\n';
  const auto& edges = model.encoder().bin_edges();
  out << "bin_edges " << edges.size();
  for (double e : edges) out << ' ' << detail::hex_double(e);
  out << '\n';
  for (const Parameter& p : model.parameters()) {
    out << "param " << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      const auto row = p.value.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) {
        if (c) out << ' ';
        out << detail::hex_double(row[c]);
      }
      out << '\n';
    }
  }
  out << "end\n";
}

inline void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path);
  save_checkpoint(model, out);
  if (!out) throw InputError("write failed for " + path);
}

inline Model load_checkpoint(std::istream& in, const std::string& name) {
  auto fail = [&](const std::string& why) -> void { throw InputError(name + ": " + why); };
  std::string line;
  auto next = [&]() {
    if (!std::getline(in, line)) fail("unexpected end of checkpoint");
    return line;
  };
  auto field = [&](const std::string& key) {
    std::istringstream ls(next());
    std::string k, v;
    ls >> k;
    std::getline(ls >> std::ws, v);
    if (k != key) fail("expected '" + key + "', found '" + k + "'");
    return v;
  };
  auto size_field = [&](const std::string& key) {
    const auto v = detail::parse_int<std::size_t>(field(key));
    if (!v) fail("bad value for " + key);
    return *v;
  };

  if (field("tin-checkpoint") != std::to_string(kCheckpointVersion)) fail("unsupported checkpoint version");
  ModelSpec spec;
  spec.variant = parse_variant(field("variant"));
  if (field("code") != spec.code().str()) fail("component code does not match variant");
  spec.encoder = parse_encoder(field("encoder"));
  spec.d_cat = size_field("d_cat");
  spec.d_item = size_field("d_item");
  spec.d_ta = size_field("d_ta");
  spec.d_tr = size_field("d_tr");
  spec.mlp_hidden = detail::parse_sizes(field("mlp_hidden"));
  spec.max_len = size_field("max_len");
  spec.tte_t_buckets = size_field("tte_t_buckets");
  Vocab vocab;
  vocab.n_items = size_field("n_items");
  vocab.n_categories = size_field("n_categories");

  std::istringstream es(field("bin_edges"));
  std::size_t n_edges = 0;
  es >> n_edges;
  std::vector<double> edges;
  for (std::size_t k = 0; k < n_edges; ++k) {
    std::string tok;
    if (!(es >> tok)) fail("truncated bin_edges");
    edges.push_back(detail::parse_hex_double(tok));
  }

  TemporalEncoder enc;
  switch (spec.encoder) {
    case EncoderKind::kNone: enc = TemporalEncoder::none(); break;
    case EncoderKind::kTteP: enc = TemporalEncoder::tte_p(spec.max_len); break;
    case EncoderKind::kCoe: enc = TemporalEncoder::coe(spec.max_len); break;
    case EncoderKind::kTteT: enc = TemporalEncoder::tte_t(edges); break;
  }
  Model model(spec, vocab, enc, 0);
  for (Parameter& p : model.parameters()) {
    std::istringstream hs(next());
    std::string tag, pname;
    std::size_t rows = 0, cols = 0;
    hs >> tag >> pname >> rows >> cols;
    if (tag != "param" || pname != p.name) fail("expected parameter '" + p.name + "'");
    if (rows != p.value.rows() || cols != p.value.cols()) {
      fail("parameter '" + p.name + "' has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
           ", expected " + p.value.shape_string());
    }
    for (std::size_t r = 0; r < rows; ++r) {
      std::istringstream rs(next());
      std::string tok;
      for (std::size_t c = 0; c < cols; ++c) {
        if (!(rs >> tok)) fail("truncated row in parameter '" + p.name + "'");
        p.value(r, c) = detail::parse_hex_double(tok);
      }
    }
  }
  if (next() != "end") fail("trailing data after parameters");
  return model;
}

inline Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path);
  return load_checkpoint(in, path);
}

}  // namespace tin
