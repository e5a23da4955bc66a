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
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tin/dataio.hpp"
#include "tin/encoding.hpp"
#include "tin/error.hpp"
#include "tin/mlp.hpp"
#include "tin/parameter.hpp"
#include "tin/tape.hpp"
#include "tin/tensor.hpp"

namespace tin {

enum class Variant {
  kTin,
  kTinWoTte,
  kTinWoTa,
  kTinWoTr,
  kDin,
  kDinPrime,
  kAvgConcat,
  kAvgProduct,
  kDinSplit,
};

// Presence of temporal information, target-aware attention and
// target-aware representation.
struct ComponentCode {
  bool ti = false;
  bool ta = false;
  bool tr = false;

  std::string str() const { return std::string{ti ? '1' : '0', ta ? '1' : '0', tr ? '1' : '0'}; }
  friend bool operator==(const ComponentCode&, const ComponentCode&) = default;
};

inline ComponentCode component_code(Variant v) {
  switch (v) {
    case Variant::kTin: return {true, true, true};
    case Variant::kTinWoTte: return {false, true, true};
    case Variant::kTinWoTa: return {true, false, true};
    case Variant::kTinWoTr: return {true, true, false};
    case Variant::kDin: return {false, true, true};
    case Variant::kDinPrime: return {false, true, false};
    case Variant::kAvgConcat: return {false, false, false};
    case Variant::kAvgProduct: return {false, false, true};
    case Variant::kDinSplit: return {false, true, true};
  }
  return {};
}

inline constexpr Variant kAllVariants[] = {
    Variant::kTin,      Variant::kTinWoTte,  Variant::kTinWoTa,    Variant::kTinWoTr, Variant::kDin,
    Variant::kDinPrime, Variant::kAvgConcat, Variant::kAvgProduct, Variant::kDinSplit,
};

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::kTin: return "tin";
    case Variant::kTinWoTte: return "tin-wo-tte";
    case Variant::kTinWoTa: return "tin-wo-ta";
    case Variant::kTinWoTr: return "tin-wo-tr";
    case Variant::kDin: return "din";
    case Variant::kDinPrime: return "din-prime";
    case Variant::kAvgConcat: return "avg-concat";
    case Variant::kAvgProduct: return "avg-product";
    case Variant::kDinSplit: return "din-split";
  }
  return "?";
}

inline Variant parse_variant(std::string_view s) {
  for (Variant v : kAllVariants) {
    if (variant_name(v) == s) return v;
  }
  throw InputError("unknown variant '" + std::string(s) + "'");
}

struct ModelSpec {
  Variant variant = Variant::kTin;
  EncoderKind encoder = EncoderKind::kTteP;
  std::size_t d_cat = 8;
  std::size_t d_item = 8;
  std::vector<std::size_t> mlp_hidden = {80, 40};
  std::size_t max_len = 100;       // sizes the TTE-P / COE vocabularies
  std::size_t tte_t_buckets = 10;
  std::size_t d_ta = 0;            // din-split only
  std::size_t d_tr = 0;            // din-split only

  ComponentCode code() const { return component_code(variant); }
  std::size_t dim() const { return variant == Variant::kDinSplit ? d_tr : d_cat + d_item; }

  void validate() const {
    const ComponentCode c = code();
    if (c.ti && encoder == EncoderKind::kNone) {
      throw InputError("variant " + variant_name(variant) + " needs a temporal encoder");
    }
    if (!c.ti && encoder != EncoderKind::kNone) {
      throw InputError("variant " + variant_name(variant) + " takes no temporal encoder");
    }
    if (variant == Variant::kDinSplit) {
      if (d_ta == 0 && d_tr == 0) throw InputError("din-split: d_ta and d_tr are both zero");
      if (d_tr == 0) throw InputError("din-split: d_tr must be positive");
    } else if (d_cat + d_item == 0) {
      throw InputError("embedding dimension must be positive");
    }
    if (max_len == 0) throw InputError("max_len must be positive");
  }
};

// Brings a (variant, encoder) request into a consistent pair. Returns a
// warning when it had to change something.
inline std::optional<std::string> reconcile(ModelSpec& spec) {
  const bool ti = spec.code().ti;
  if (ti && spec.encoder == EncoderKind::kNone) {
    if (spec.variant == Variant::kTin) {
      spec.variant = Variant::kTinWoTte;
      return "variant tin with encoder none is tin-wo-tte; using tin-wo-tte";
    }
    spec.encoder = EncoderKind::kTteP;
    return "variant " + variant_name(spec.variant) + " needs a temporal encoder; using tte-p";
  }
  if (!ti && spec.encoder != EncoderKind::kNone) {
    const std::string was = encoder_name(spec.encoder);
    spec.encoder = EncoderKind::kNone;
    return "variant " + variant_name(spec.variant) + " has no temporal component; ignoring encoder " + was;
  }
  return std::nullopt;
}

struct Vocab {
  std::size_t n_items = 0;
  std::size_t n_categories = 0;
  friend bool operator==(const Vocab&, const Vocab&) = default;
};

// Pooled interest and the per-behavior quantities behind it.
struct TimOutput {
  Dense u;       // sum_i alpha_i * value_i
  Dense pooled;  // sum_i alpha_i * e~_i
  Dense alpha;   // 1 x H
  std::vector<double> logits;     // z_i = <e~_i, v~_t> / sqrt(d); empty without TA
  std::vector<double> rep_norms;  // ||value_i||_2
};

// Terms of the learned correlation e^z * ||r||_2 for one behavior.
struct CtcTerm {
  std::optional<double> z;  // absent when the variant has no attention
  double r_norm = 0.0;
  double value() const { return (z ? std::exp(*z) : 1.0) * r_norm; }
};

class Model {
 public:
  Model(ModelSpec spec, Vocab vocab, TemporalEncoder encoder, std::uint64_t seed)
      : spec_(std::move(spec)), vocab_(vocab), encoder_(std::move(encoder)) {
    spec_.validate();
    if (encoder_.kind() != spec_.encoder) {
      throw InputError("model: encoder kind does not match spec");
    }
    if (vocab_.n_items == 0 || vocab_.n_categories == 0) throw DataError("model: empty vocabulary");
    build_parameters();
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k < first_mlp_; ++k) init_uniform(params_[k].value, 0.01, rng);
    const auto layers = make_mlp(mlp_input_dim(), spec_.mlp_hidden, rng);
    for (std::size_t k = 0; k < layers.size(); ++k) {
      params_[first_mlp_ + 2 * k].value = layers[k].weight;
      params_[first_mlp_ + 2 * k + 1].value = layers[k].bias;
    }
  }

  const ModelSpec& spec() const { return spec_; }
  const Vocab& vocab() const { return vocab_; }
  const TemporalEncoder& encoder() const { return encoder_; }

  std::span<Parameter> parameters() { return params_; }
  std::span<const Parameter> parameters() const { return params_; }
  Parameter& parameter(std::string_view name) {
    for (Parameter& p : params_) {
      if (p.name == name) return p;
    }
    throw InputError("model has no parameter '" + std::string(name) + "'");
  }
  const Parameter& parameter(std::string_view name) const {
    return const_cast<Model*>(this)->parameter(name);
  }
  bool has_parameter(std::string_view name) const {
    for (const Parameter& p : params_) {
      if (p.name == name) return true;
    }
    return false;
  }

  // One sink per parameter, in parameters() order.
  std::vector<GradAccumulator*> own_sinks() {
    std::vector<GradAccumulator*> s;
    for (Parameter& p : params_) s.push_back(&p.grad);
    return s;
  }

  std::size_t mlp_input_dim() const { return (spec_.code().tr ? 3 : 2) * spec_.dim(); }

  struct Graph {
    Var logit;
    Var alpha;
    Var pooled;
    Var u;
    Var behaviors;  // e~, H x d (representation space)
    Var target;     // v~, 1 x d
    Var head;       // MLP input
    std::optional<Var> attn_keys;
    std::optional<Var> attn_query;
  };

  // Records the forward pass for `s` on `tape`. With `sinks` empty all
  // parameters are frozen.
  Graph build(Tape& tape, const Sample& s, std::span<GradAccumulator* const> sinks = {}) const {
    const std::size_t h = s.length();
    if (h == 0) throw DataError("model: empty behavior history");
    auto sink = [&](std::size_t k) -> GradAccumulator* { return sinks.empty() ? nullptr : sinks[k]; };

    std::vector<std::size_t> cat_ids(h), item_ids(h);
    for (std::size_t i = 0; i < h; ++i) {
      cat_ids[i] = s.history[i].category;
      item_ids[i] = s.history[i].item;
    }
    const std::size_t tcat[] = {s.target.category};
    const std::size_t titem[] = {s.target.item};

    auto embed = [&](std::size_t cat_p, std::size_t item_p, std::span<const std::size_t> cats,
                     std::span<const std::size_t> items) {
      std::vector<Var> parts{tape.gather(params_[cat_p].value, cats, sink(cat_p)),
                             tape.gather(params_[item_p].value, items, sink(item_p))};
      return tape.concat_cols(parts);
    };

    Graph g;
    Var e = embed(kCat, kItem, cat_ids, item_ids);
    Var v = embed(kCat, kItem, tcat, titem);
    if (encoder_.enabled()) {
      std::vector<std::size_t> buckets(h);
      for (std::size_t i = 0; i < h; ++i) buckets[i] = encoder_.behavior_bucket(s, i + 1);
      const std::size_t tb[] = {encoder_.target_bucket(s)};
      e = tape.add(e, tape.gather(params_[temporal_].value, buckets, sink(temporal_)));
      v = tape.add(v, tape.gather(params_[temporal_].value, tb, sink(temporal_)));
    }
    g.behaviors = e;
    g.target = v;

    const ComponentCode code = spec_.code();
    if (spec_.variant == Variant::kDinSplit) {
      if (spec_.d_ta > 0) {
        Var ek = embed(cat_ta_, item_ta_, cat_ids, item_ids);
        Var vq = embed(cat_ta_, item_ta_, tcat, titem);
        g.attn_keys = ek;
        g.attn_query = vq;
        g.alpha = tape.scaled_dot_softmax(ek, vq, 1.0 / std::sqrt(static_cast<double>(spec_.d_ta)));
      } else {
        g.alpha = tape.constant(Dense(1, h, 1.0 / static_cast<double>(h)));
      }
    } else if (code.ta) {
      g.attn_keys = e;
      g.attn_query = v;
      g.alpha = tape.scaled_dot_softmax(e, v, 1.0 / std::sqrt(static_cast<double>(spec_.dim())));
    } else {
      g.alpha = tape.constant(Dense(1, h, 1.0 / static_cast<double>(h)));
    }

    g.pooled = tape.matmul(g.alpha, e);
    std::vector<Var> head{g.pooled, v};
    if (code.tr) {
      g.u = tape.matmul(g.alpha, tape.hadamard_broadcast(e, v));
      head.push_back(g.u);
    } else {
      g.u = g.pooled;
    }
    Var x = tape.concat_cols(head);
    g.head = x;

    std::vector<DenseLayerRef> layers;
    std::vector<GradAccumulator*> mlp_sinks;
    for (std::size_t k = first_mlp_; k < params_.size(); k += 2) {
      layers.push_back({&params_[k].value, &params_[k + 1].value});
      if (!sinks.empty()) {
        mlp_sinks.push_back(sinks[k]);
        mlp_sinks.push_back(sinks[k + 1]);
      }
    }
    g.logit = mlp_forward(tape, x, layers, mlp_sinks);
    return g;
  }

  double logit(const Sample& s) const {
    Tape tape;
    return tape.value(build(tape, s).logit)[0];
  }

  double predict(const Sample& s) const { return sigmoid(logit(s)); }

  // Cross-entropy for `s`; gradients are added into `sinks` (one per
  // parameter), which must be non-empty.
  double loss_and_grad(const Sample& s, std::span<GradAccumulator* const> sinks) const {
    if (sinks.size() != params_.size()) throw DimensionError("loss_and_grad: one sink per parameter");
    Tape tape;
    const Graph g = build(tape, s, sinks);
    Var loss = tape.sigmoid_xent(g.logit, s.label);
    tape.backward(loss);
    return tape.value(loss)[0];
  }

  double loss(const Sample& s) const {
    Tape tape;
    const Graph g = build(tape, s);
    return tape.value(tape.sigmoid_xent(g.logit, s.label))[0];
  }

  TimOutput tim_forward(const Sample& s) const {
    Tape tape;
    const Graph g = build(tape, s);
    TimOutput out;
    out.u = tape.value(g.u);
    out.pooled = tape.value(g.pooled);
    out.alpha = tape.value(g.alpha);
    if (g.attn_keys) {
      const double scale = 1.0 / std::sqrt(static_cast<double>(tape.value(*g.attn_query).cols()));
      const Dense z = scaled_dot_logits(tape.value(*g.attn_keys), tape.value(*g.attn_query), scale);
      out.logits.assign(z.values().begin(), z.values().end());
    }
    const Dense& e = tape.value(g.behaviors);
    const Dense& v = tape.value(g.target);
    const Dense values = spec_.code().tr ? hadamard_broadcast(e, v) : e;
    for (std::size_t i = 0; i < values.rows(); ++i) out.rep_norms.push_back(norm(values.row(i)));
    return out;
  }

  // Per-behavior (z, ||r||) for the learned correlation e^z * ||r||_2.
  std::vector<CtcTerm> extract_learned_ctc_terms(const Sample& s) const {
    switch (spec_.variant) {
      case Variant::kTin:
      case Variant::kTinWoTte:
      case Variant::kDin:
      case Variant::kTinWoTa:
      case Variant::kTinWoTr:
        break;
      default:
        throw InputError("learned correlation is not defined for variant " +
                         variant_name(spec_.variant) +
                         " (supported: tin, tin-wo-tte, din, tin-wo-ta, tin-wo-tr)");
    }
    const TimOutput tim = tim_forward(s);
    std::vector<CtcTerm> terms(s.length());
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (!tim.logits.empty()) terms[i].z = tim.logits[i];
      terms[i].r_norm = tim.rep_norms[i];
    }
    return terms;
  }

  static double norm(std::span<const double> x) {
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc);
  }

 private:
  static constexpr std::size_t kCat = 0;
  static constexpr std::size_t kItem = 1;
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void build_parameters() {
    std::size_t dc = spec_.d_cat, di = spec_.d_item;
    if (spec_.variant == Variant::kDinSplit) {
      dc = (spec_.d_tr + 1) / 2;
      di = spec_.d_tr / 2;
    }
    params_.reserve(8 + 2 * (spec_.mlp_hidden.size() + 1));
    params_.emplace_back("category", vocab_.n_categories, dc, true);
    params_.emplace_back("item", vocab_.n_items, di, true);
    if (encoder_.enabled()) {
      temporal_ = params_.size();
      params_.emplace_back("temporal", encoder_.n_buckets(), dc + di, true);
    }
    if (spec_.variant == Variant::kDinSplit && spec_.d_ta > 0) {
      cat_ta_ = params_.size();
      params_.emplace_back("category_ta", vocab_.n_categories, (spec_.d_ta + 1) / 2, true);
      item_ta_ = params_.size();
      params_.emplace_back("item_ta", vocab_.n_items, spec_.d_ta / 2, true);
    }
    first_mlp_ = params_.size();
    std::size_t fan_in = mlp_input_dim();
    std::vector<std::size_t> widths = spec_.mlp_hidden;
    widths.push_back(1);
    for (std::size_t k = 0; k < widths.size(); ++k) {
      params_.emplace_back("mlp" + std::to_string(k) + ".weight", fan_in, widths[k], false);
      params_.emplace_back("mlp" + std::to_string(k) + ".bias", 1, widths[k], false);
      fan_in = widths[k];
    }
  }

  ModelSpec spec_;
  Vocab vocab_;
  TemporalEncoder encoder_;
  std::vector<Parameter> params_;
  std::size_t temporal_ = kNone;
  std::size_t cat_ta_ = kNone;
  std::size_t item_ta_ = kNone;
  std::size_t first_mlp_ = 0;
};

}  // namespace tin
