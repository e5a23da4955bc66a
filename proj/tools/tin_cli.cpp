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

// Command-line front end: synth | prepare | train | eval | analyze.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tin/tin.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct DataDir {
  std::string root;
  std::string file(const std::string& name) const { return (fs::path(root) / name).string(); }
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw tin::InputError("cannot create directory " + dir + ": " + ec.message());
}

void require_exists(const std::string& path, const std::string& what) {
  if (!fs::exists(path)) throw tin::InputError(what + " not found: " + path);
}

std::string fmt(double v) { return tin::detail::format_double(v); }

// ---------------------------------------------------------------------------

struct SynthArgs {
  tin::SynthConfig cfg;
  std::string out;
};

void run_synth(const SynthArgs& a) {
  const tin::SynthDataset ds = tin::synth_generate(a.cfg);
  ensure_dir(a.out);
  DataDir d{a.out};
  const auto header = a.cfg.header();
  tin::write_samples(d.file("train.samples"), ds.train, header);
  tin::write_samples(d.file("test.samples"), ds.test, header);
  tin::write_stats(d.file("stats.txt"), ds.stats);
  tin::IdDictionary users, items, cats;
  for (std::size_t i = 0; i < ds.stats.n_users; ++i) users.intern(std::to_string(i));
  for (std::size_t i = 0; i < ds.stats.n_items; ++i) items.intern(std::to_string(i));
  for (std::size_t i = 0; i < ds.stats.n_categories; ++i) cats.intern(std::to_string(i));
  users.write(d.file("user_dict.tsv"));
  items.write(d.file("item_dict.tsv"));
  cats.write(d.file("category_dict.tsv"));
  {
    std::ofstream p(d.file("synth.params"), std::ios::binary);
    for (const auto& h : header) p << h << '\n';
  }
  tin::RunManifest m;
  m.subcommand = "synth";
  for (const auto& h : header) {
    const auto colon = h.find(": ");
    m.config[h.substr(0, colon)] = h.substr(colon + 2);
  }
  m.add_output(a.out);
  m.write(d.file("manifest"));
  std::cout << "wrote " << ds.train.size() << " train / " << ds.test.size() << " test samples to "
            << a.out << '\n';
}

// ---------------------------------------------------------------------------

struct PrepareArgs {
  std::string input;
  std::string out;
  tin::SplitOptions opt;
  std::uint64_t seed = 1;
};

void run_prepare(const PrepareArgs& a) {
  require_exists(a.input, "input log");
  const tin::InteractionLog log = tin::load_interactions(a.input);
  const tin::Split split = tin::build_leave_one_out(log, a.opt, a.seed);
  ensure_dir(a.out);
  DataDir d{a.out};
  tin::write_samples(d.file("train.samples"), split.train);
  tin::write_samples(d.file("test.samples"), split.test);
  log.users.write(d.file("user_dict.tsv"));
  log.items.write(d.file("item_dict.tsv"));
  log.categories.write(d.file("category_dict.tsv"));
  tin::write_stats(d.file("stats.txt"), tin::log_stats(log, split.train.size() + split.test.size()));
  tin::RunManifest m;
  m.subcommand = "prepare";
  m.config["min_user_len"] = std::to_string(a.opt.min_user_len);
  m.config["max_len"] = std::to_string(a.opt.max_len);
  m.config["neg_per_pos"] = std::to_string(a.opt.neg_per_pos);
  m.config["seed"] = std::to_string(a.seed);
  m.add_input(a.input);
  m.add_output(a.out);
  m.write(d.file("manifest"));
  std::cout << "wrote " << split.train.size() << " train / " << split.test.size() << " test samples to "
            << a.out << '\n';
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string variant = "tin";
  std::string encoder = "tte-p";
  std::string config;
  std::string out;
  std::size_t repeats = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> d_ta;
  std::optional<std::size_t> d_tr;
};

std::string checkpoint_name(std::size_t repeat) {
  return repeat == 0 ? "model.ckpt" : "model.r" + std::to_string(repeat) + ".ckpt";
}

void write_report_header(std::ostream& out) { out << "model,variant_code,logloss,gauc,n_records,n_users\n"; }

void write_report_row(std::ostream& out, const std::string& model, const std::string& code,
                      const tin::EvalReport& r) {
  out << model << ',' << code << ',' << fmt(r.logloss) << ',' << fmt(r.gauc) << ',' << r.n_records << ','
      << r.n_users << '\n';
}

void run_train(const TrainArgs& a) {
  DataDir d{a.data};
  require_exists(a.data, "data directory");
  if (a.repeats == 0) throw tin::InputError("--repeats must be at least 1");
  tin::RunConfig cfg = tin::default_run_config();
  if (!a.config.empty()) tin::load_config(a.config, cfg);
  cfg.model.variant = tin::parse_variant(a.variant);
  cfg.model.encoder = tin::parse_encoder(a.encoder);
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.threads) cfg.train.threads = *a.threads;
  if (a.d_ta) cfg.model.d_ta = *a.d_ta;
  if (a.d_tr) cfg.model.d_tr = *a.d_tr;
  if (cfg.model.variant == tin::Variant::kDinSplit && cfg.model.d_tr == 0 && cfg.model.d_ta == 0) {
    cfg.model.d_ta = cfg.model.d_cat + cfg.model.d_item;
    cfg.model.d_tr = cfg.model.d_cat + cfg.model.d_item;
  }
  if (auto warn = tin::reconcile(cfg.model)) std::cerr << "warning: " << *warn << '\n';
  cfg.model.validate();
  cfg.train.validate();

  const auto stats = tin::read_stats(d.file("stats.txt"));
  const auto train_set = tin::read_samples(d.file("train.samples"));
  const auto test_set = tin::read_samples(d.file("test.samples"));
  const tin::Vocab vocab{stats.n_items, stats.n_categories};
  const tin::TemporalEncoder enc =
      tin::TemporalEncoder::fit(cfg.model.encoder, cfg.model.max_len, train_set, cfg.model.tte_t_buckets);

  ensure_dir(a.out);
  DataDir out{a.out};
  const std::string name = tin::variant_name(cfg.model.variant);
  const std::string code = cfg.model.code().str();
  std::ofstream metrics(out.file("metrics.csv"), std::ios::binary);
  write_report_header(metrics);
  std::vector<tin::EvalReport> reports;
  for (std::size_t r = 0; r < a.repeats; ++r) {
    tin::TrainConfig tc = cfg.train;
    tc.seed = cfg.train.seed + r;
    tin::Model model(cfg.model, vocab, enc, tc.seed);
    const tin::TrainResult res = tin::train(model, train_set, tc);
    tin::save_checkpoint(model, out.file(checkpoint_name(r)));
    {
      std::ofstream loss(out.file(r == 0 ? "loss.csv" : "loss.r" + std::to_string(r) + ".csv"),
                         std::ios::binary);
      loss << "step,loss\n";
      for (std::size_t k = 0; k < res.batch_loss.size(); ++k) loss << k + 1 << ',' << fmt(res.batch_loss[k]) << '\n';
    }
    const tin::EvalReport rep = tin::evaluate(model, test_set);
    reports.push_back(rep);
    write_report_row(metrics, name, code, rep);
    std::cerr << name << " repeat " << r << ": logloss " << rep.logloss << " gauc " << rep.gauc << '\n';
  }
  double ll_mean = 0, g_mean = 0;
  for (const auto& rep : reports) {
    ll_mean += rep.logloss;
    g_mean += rep.gauc;
  }
  ll_mean /= static_cast<double>(reports.size());
  g_mean /= static_cast<double>(reports.size());
  double ll_var = 0, g_var = 0;
  for (const auto& rep : reports) {
    ll_var += (rep.logloss - ll_mean) * (rep.logloss - ll_mean);
    g_var += (rep.gauc - g_mean) * (rep.gauc - g_mean);
  }
  const double denom = reports.size() > 1 ? static_cast<double>(reports.size() - 1) : 1.0;
  tin::EvalReport mean_rep = reports.front();
  mean_rep.logloss = ll_mean;
  mean_rep.gauc = g_mean;
  write_report_row(metrics, name + ":mean", code, mean_rep);
  metrics.close();
  {
    std::ofstream summary(out.file("summary.csv"), std::ios::binary);
    summary << "model,variant_code,repeats,logloss_mean,logloss_std,gauc_mean,gauc_std\n";
    summary << name << ',' << code << ',' << reports.size() << ',' << fmt(ll_mean) << ','
            << fmt(std::sqrt(ll_var / denom)) << ',' << fmt(g_mean) << ',' << fmt(std::sqrt(g_var / denom))
            << '\n';
  }
  tin::RunManifest m;
  m.subcommand = "train";
  m.config = tin::describe(cfg);
  m.config["repeats"] = std::to_string(a.repeats);
  m.add_input(d.file("train.samples"));
  m.add_input(d.file("test.samples"));
  m.add_input(d.file("stats.txt"));
  if (!a.config.empty()) m.add_input(a.config);
  m.add_output(a.out);
  m.write(out.file("manifest"));
}

// ---------------------------------------------------------------------------

tin::Model load_for_data(const std::string& ckpt, const DataDir& d) {
  require_exists(ckpt, "checkpoint");
  tin::Model model = tin::load_checkpoint(ckpt);
  const auto stats = tin::read_stats(d.file("stats.txt"));
  if (model.vocab().n_items != stats.n_items || model.vocab().n_categories != stats.n_categories) {
    throw tin::DataError("checkpoint vocabulary (" + std::to_string(model.vocab().n_items) + " items, " +
                         std::to_string(model.vocab().n_categories) + " categories) does not match data (" +
                         std::to_string(stats.n_items) + ", " + std::to_string(stats.n_categories) + ")");
  }
  return model;
}

struct EvalArgs {
  std::string ckpt;
  std::string data;
  std::string split = "test";
  std::string variant;
  std::string out;
};

void run_eval(const EvalArgs& a) {
  DataDir d{a.data};
  require_exists(a.data, "data directory");
  const tin::Model model = load_for_data(a.ckpt, d);
  if (!a.variant.empty() && tin::parse_variant(a.variant) != model.spec().variant) {
    throw tin::DataError("checkpoint holds variant " + tin::variant_name(model.spec().variant) +
                         ", not " + a.variant);
  }
  const auto samples = tin::read_samples(d.file(a.split + ".samples"));
  const tin::EvalReport rep = tin::evaluate(model, samples);
  std::ostringstream os;
  write_report_header(os);
  write_report_row(os, tin::variant_name(model.spec().variant), model.spec().code().str(), rep);
  std::cout << os.str();
  if (!a.out.empty()) {
    ensure_dir(a.out);
    DataDir out{a.out};
    std::ofstream(out.file("report.csv"), std::ios::binary) << os.str();
    tin::RunManifest m;
    m.subcommand = "eval";
    m.config["split"] = a.split;
    m.add_input(a.ckpt);
    m.add_input(d.file(a.split + ".samples"));
    m.add_output(out.file("report.csv"));
    m.write(out.file("manifest"));
  }
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string ckpt;
  std::string data;
  std::string target_cat;
  std::size_t top_k = 5;
  std::size_t positions = 10;
  std::string out;
  std::string samples = "train";
  std::size_t pearson_targets = 0;
  std::string aggregation = "mean";
};

std::vector<std::size_t> frequent_targets(const std::vector<tin::Sample>& samples, std::size_t n) {
  std::map<std::size_t, std::size_t> freq;
  for (const auto& s : samples) ++freq[s.target.category];
  std::vector<std::pair<std::size_t, std::size_t>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(n, ranked.size()); ++k) out.push_back(ranked[k].first);
  return out;
}

void run_analyze(const AnalyzeArgs& a) {
  DataDir d{a.data};
  require_exists(a.data, "data directory");
  const tin::Model model = load_for_data(a.ckpt, d);
  const std::string sample_path =
      a.samples == "train" || a.samples == "test" ? d.file(a.samples + ".samples") : a.samples;
  require_exists(sample_path, "sample file");
  const auto samples = tin::read_samples(sample_path);
  if (samples.empty()) throw tin::DataError("no samples in " + sample_path);
  tin::Aggregation agg;
  if (a.aggregation == "mean") agg = tin::Aggregation::kMean;
  else if (a.aggregation == "median") agg = tin::Aggregation::kMedian;
  else throw tin::InputError("--aggregation must be mean or median");

  std::size_t c_t = 0;
  if (a.target_cat.empty()) {
    c_t = frequent_targets(samples, 1).front();
  } else {
    const auto dict = tin::IdDictionary::read(d.file("category_dict.tsv"));
    const auto id = dict.find(a.target_cat);
    if (!id) throw tin::DataError("target category '" + a.target_cat + "' does not occur in the data");
    c_t = *id;
  }

  const auto rows = tin::top_categories(samples, c_t, a.top_k, a.positions);
  tin::CorrelationGrid gt = tin::ground_truth_ctc(samples, c_t, rows, a.positions);
  tin::CorrelationGrid learned = tin::learned_ctc(model, samples, c_t, rows, a.positions, agg);
  gt.metadata.emplace_back("samples", sample_path);
  learned.metadata.emplace_back("samples", sample_path);

  std::vector<tin::PearsonReport> reports{tin::pearson_compare(gt, learned)};
  for (std::size_t other : frequent_targets(samples, a.pearson_targets)) {
    if (other == c_t) continue;
    const auto r = tin::top_categories(samples, other, a.top_k, a.positions);
    try {
      reports.push_back(tin::pearson_compare(tin::ground_truth_ctc(samples, other, r, a.positions),
                                             tin::learned_ctc(model, samples, other, r, a.positions, agg)));
    } catch (const tin::DataError& e) {
      std::cerr << "warning: skipping target category " << other << ": " << e.what() << '\n';
    }
  }

  ensure_dir(a.out);
  DataDir out{a.out};
  tin::export_grid(gt, out.file("ground_truth.csv"));
  tin::export_grid(learned, out.file("learned.csv"));
  tin::write_pearson_reports(out.file("pearson.csv"), reports);
  tin::write_bin_distribution(out.file("bins.csv"), tin::bin_distribution(reports));
  tin::RunManifest m;
  m.subcommand = "analyze";
  m.config["target_category"] = std::to_string(c_t);
  m.config["top_k"] = std::to_string(a.top_k);
  m.config["positions"] = std::to_string(a.positions);
  m.config["pearson_targets"] = std::to_string(a.pearson_targets);
  m.config["aggregation"] = a.aggregation;
  m.add_input(a.ckpt);
  m.add_input(sample_path);
  m.add_output(a.out);
  m.write(out.file("manifest"));
  std::cout << "target " << c_t << ": pearson " << fmt(reports.front().coefficient) << " ("
            << tin::bin_name(reports.front().bin) << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tin: data preparation, training and correlation analysis for the TIN model family"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a dataset with a planted semantic-temporal pattern");
  s->add_option("--out", synth.out, "Output data directory")->required();
  s->add_option("--users", synth.cfg.n_users);
  s->add_option("--categories", synth.cfg.n_categories);
  s->add_option("--max-len", synth.cfg.max_len);
  s->add_option("--min-len", synth.cfg.min_len);
  s->add_option("--decay", synth.cfg.decay);
  s->add_option("--boost", synth.cfg.boost);
  s->add_option("--base-logit", synth.cfg.base_logit);
  s->add_option("--samples-per-user", synth.cfg.samples_per_user);
  s->add_option("--items-per-category", synth.cfg.items_per_category);
  s->add_option("--test-fraction", synth.cfg.test_fraction);
  s->add_option("--seed", synth.cfg.seed);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Build leave-one-out samples from a review log");
  p->add_option("--input", prep.input, "TSV: user, item, category, timestamp")->required();
  p->add_option("--out", prep.out, "Output data directory")->required();
  p->add_option("--min-user-len", prep.opt.min_user_len);
  p->add_option("--max-len", prep.opt.max_len);
  p->add_option("--neg", prep.opt.neg_per_pos);
  p->add_option("--seed", prep.seed)->required();

  TrainArgs tr;
  std::size_t threads_flag = 0;
  auto* t = app.add_subcommand("train", "Train a model of the family");
  t->add_option("--data", tr.data)->required();
  t->add_option("--variant", tr.variant);
  t->add_option("--encoder", tr.encoder);
  t->add_option("--config", tr.config);
  t->add_option("--out", tr.out, "Output directory (checkpoints, metrics, loss curve)")->required();
  t->add_option("--repeats", tr.repeats);
  auto* seed_opt = t->add_option("--seed", tr.seed);
  auto* dta_opt = t->add_option("--d-ta", tr.d_ta);
  auto* dtr_opt = t->add_option("--d-tr", tr.d_tr);
  (void)seed_opt;
  (void)dta_opt;
  (void)dtr_opt;

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Logloss / GAUC of a checkpoint");
  e->add_option("--ckpt", ev.ckpt)->required();
  e->add_option("--data", ev.data)->required();
  e->add_option("--split", ev.split);
  e->add_option("--variant", ev.variant, "Fail unless the checkpoint holds this variant");
  e->add_option("--out", ev.out);

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Ground-truth and learned correlation grids");
  a->add_option("--ckpt", an.ckpt)->required();
  a->add_option("--data", an.data)->required();
  a->add_option("--target-cat", an.target_cat, "Category key; defaults to the most frequent target");
  a->add_option("--top-k", an.top_k);
  a->add_option("--positions", an.positions);
  a->add_option("--out", an.out)->required();
  a->add_option("--samples", an.samples, "train, test, or a sample file path");
  a->add_option("--pearson-targets", an.pearson_targets, "Also report the N most frequent target categories");
  a->add_option("--aggregation", an.aggregation, "mean or median");

  for (auto* sub : {s, p, t, e, a}) sub->add_option("--threads", threads_flag, "Worker threads (1 = reference)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (threads_flag > 0) tr.threads = threads_flag;
    if (*s) run_synth(synth);
    if (*p) run_prepare(prep);
    if (*t) run_train(tr);
    if (*e) run_eval(ev);
    if (*a) run_analyze(an);
  } catch (const tin::InputError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitInput;
  } catch (const tin::NumericError& err) {
    std::cerr << "numeric error: " << err.what() << '\n';
    return kExitNumeric;
  } catch (const tin::Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}
