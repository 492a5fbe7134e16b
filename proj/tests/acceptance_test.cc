// Copyright 2026 The KI-Encoder Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Optional arguments restrict the run to the listed
// criterion numbers.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "encoder_fixture.h"
#include "ki/encoder.h"
#include "ki/harness/experiment.h"
#include "ki/kg_store.h"
#include "ki/knowledge_projection.h"
#include "ki/model.h"
#include "ki/selective_attention.h"
#include "ki/trainer.h"
#include "test_util.h"

namespace ki {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

ExperimentConfig load_config(const std::string &name) {
  return ExperimentConfig::load(fs::path(KI_SOURCE_DIR) / "configs" / name);
}

// Test accuracies keyed by (seed, variant name); each model is trained once.
class AccuracyCache {
 public:
  double get(uint64_t seed, Variant v) {
    const auto key = std::make_pair(seed, std::string(variant_name(v)));
    auto it = acc_.find(key);
    if (it != acc_.end()) return it->second;
    ExperimentConfig cfg = load_config("kg_only.json");
    cfg.set_seed(seed);
    cfg.variants = {v};
    const ExperimentReport r = run_experiment(cfg);
    const double a = r.variants.at(0).test_accuracy;
    acc_[key] = a;
    std::cout << "  [kg_only seed " << seed << "] " << variant_name(v) << " test "
              << fmt("%.4f", a) << " (" << fmt("%.1f", r.runtime_seconds) << " s)\n"
              << std::flush;
    return a;
  }

 private:
  std::map<std::pair<uint64_t, std::string>, double> acc_;
};

AccuracyCache &cache() {
  static AccuracyCache c;
  return c;
}

Outcome mask_oracle() {
  const auto t0 = Clock::now();
  testing::EncoderFixture fx(1, 32);
  std::mt19937_64 rng(2026);
  int mismatches = 0, nontrivial = 0;
  for (int n = 0; n < 1000; ++n) {
    const auto r = testing::random_record(rng, 32, 6);
    const EncodedInput enc = fx.encode(r);
    if (!enc.entities.empty()) ++nontrivial;
    if (!(build_mask(enc) == testing::oracle_mask(enc))) ++mismatches;
  }
  const double t = seconds_since(t0);
  return {mismatches == 0 && t < 10.0,
          std::to_string(mismatches) + " mismatches on 1000 layouts (" +
              std::to_string(nontrivial) + " with entities), " + fmt("%.2f", t) + " s"};
}

Outcome gradient_checks() {
  const auto t0 = Clock::now();
  testing::EncoderFixture fx(5);
  // Wide enough that the type-2 row alone holds more than 20 entries.
  fx.config.model_dim = 24;
  fx.config.ffn_dim = 32;
  ModelParams params = ModelParams::init(fx.config);
  std::mt19937_64 rng(5);
  const auto batch = fx.batch(rng, 2, 10, 5, 3);
  const KgTables tables = fx.tables();
  const GradientResult g = grad(params, fx.config, batch, tables);
  auto f = [&] { return batch_loss(params, fx.config, batch, tables); };

  bool selective = false;
  for (const auto &ex : batch) {
    const AttentionMask m = build_mask(ex.input);
    for (int i = 0; i < m.size() && !selective; ++i) {
      for (int j = 0; j < m.size(); ++j) selective = selective || !m.allowed(i, j);
    }
  }

  const std::vector<std::pair<std::string, testing::EntryFilter>> groups = {
      {"heads", testing::by_prefix({"conceptual_head", "ambiguous_head"})},
      {"type2",
       [](const TensorView &v, Eigen::Index i) {
         return v.name == "token_type_embedding" && i % v.rows == 2;
       }},
      {"attention", testing::by_prefix({"layer0.w", "layer1.w"})},
      {"classifier", testing::by_prefix({"classifier"})},
  };
  bool pass = selective;
  std::string detail;
  for (const auto &[name, filter] : groups) {
    const auto s = testing::check_gradient(params, g.gradient, filter, 20, rng, f);
    pass = pass && s.checked >= 20 && s.max_relative_error < 1e-5;
    detail += name + " n=" + std::to_string(s.checked) + " max_rel=" +
              fmt("%.2e", s.max_relative_error) + "; ";
  }
  const double t = seconds_since(t0);
  pass = pass && t < 60.0;
  return {pass, detail + (selective ? "" : "mask not selective; ") + fmt("%.2f", t) + " s"};
}

Outcome zero_entity_equivalence() {
  testing::EncoderFixture fx(3);
  const ModelConfig ki_cfg = fx.config;
  ModelConfig base_cfg = apply_variant(fx.config, Variant::kBaseline);
  base_cfg.conceptual_kg_dim = 0;
  base_cfg.ambiguous_kg_dim = 0;
  const ModelParams ki_params = ModelParams::init(ki_cfg);
  const ModelParams base_params = ModelParams::init(base_cfg);
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    auto r = testing::random_record(rng, 30, 0);
    r.annotations = {};
    const Vec a = forward(ki_params, ki_cfg, fx.encode(r, ki_cfg), fx.tables()).logits;
    const Vec b = forward(base_params, base_cfg, fx.encode(r, base_cfg), {}).logits;
    worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
  }
  return {worst < 1e-9, "max |diff| " + fmt("%.3e", worst) + " over 100 records"};
}

Outcome projection_range_and_disjointness() {
  testing::EncoderFixture fx(4);
  ModelParams params = ModelParams::init(fx.config);
  std::mt19937_64 rng(4);

  // Inputs: every lexicon row plus wide random vectors.
  std::vector<Vec> conceptual_in, ambiguous_in;
  for (size_t i = 0; i < fx.conceptual.size(); ++i) conceptual_in.push_back(fx.conceptual.vector(i));
  for (size_t i = 0; i < fx.ambiguous.size(); ++i) ambiguous_in.push_back(fx.ambiguous.vector(i));
  for (int i = 0; i < 500; ++i) {
    conceptual_in.push_back(testing::random_vec(6, rng, 4.0));
    ambiguous_in.push_back(testing::random_vec(5, rng, 4.0));
  }

  // Several optimiser steps on conceptual-head gradient only.
  const auto batch = fx.batch(rng, 8, 12, 5, 2);
  const ModelParams before = params;
  Adam adam(params, OptimizerConfig{});
  for (int step = 0; step < 5; ++step) {
    const GradientResult g = grad(params, fx.config, batch, fx.tables());
    ModelParams only = g.gradient.zeros_like();
    only.conceptual_head = g.gradient.conceptual_head;
    adam.step(params, only);
  }

  double max_abs = 0;
  bool in_range = true;
  for (const ModelParams *p : {&before, static_cast<const ModelParams *>(&params)}) {
    for (const Vec &x : conceptual_in) {
      const Vec y = project(p->conceptual_head, x);
      max_abs = std::max(max_abs, y.cwiseAbs().maxCoeff());
      in_range = in_range && (y.array() > -1.0).all() && (y.array() < 1.0).all();
    }
    for (const Vec &x : ambiguous_in) {
      const Vec y = project(p->ambiguous_head, x);
      max_abs = std::max(max_abs, y.cwiseAbs().maxCoeff());
      in_range = in_range && (y.array() > -1.0).all() && (y.array() < 1.0).all();
    }
  }
  bool ambiguous_same = true, conceptual_moved = false;
  for (const Vec &x : ambiguous_in) {
    const Vec a = project(before.ambiguous_head, x);
    const Vec b = project(params.ambiguous_head, x);
    ambiguous_same =
        ambiguous_same && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0;
  }
  for (const Vec &x : conceptual_in) {
    conceptual_moved = conceptual_moved ||
                       project(before.conceptual_head, x) != project(params.conceptual_head, x);
  }
  return {in_range && ambiguous_same && conceptual_moved,
          "max |component| " + fmt("%.6f", max_abs) + "; ambiguous outputs " +
              (ambiguous_same ? "bitwise unchanged" : "CHANGED") + "; conceptual outputs " +
              (conceptual_moved ? "moved" : "did not move")};
}

Outcome knowledge_signal_recovery() {
  const auto t0 = Clock::now();
  const double full = cache().get(1, Variant::kFull);
  const double base = cache().get(1, Variant::kBaseline);
  const double t = seconds_since(t0);
  return {full >= 0.95 && base <= 0.65 && t < 300.0,
          "full " + fmt("%.4f", full) + ", baseline " + fmt("%.4f", base) + ", " +
              fmt("%.1f", t) + " s"};
}

Outcome ablation_direction() {
  const std::vector<Variant> ablations = {Variant::kNoSelectiveAttention,
                                          Variant::kNoTypesNoAlignment, Variant::kPca};
  double full = 0;
  std::vector<double> abl(ablations.size(), 0.0);
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    full += cache().get(seed, Variant::kFull) / 3;
    for (size_t i = 0; i < ablations.size(); ++i) abl[i] += cache().get(seed, ablations[i]) / 3;
  }
  bool pass = true;
  std::string detail = "mean full " + fmt("%.4f", full);
  for (size_t i = 0; i < ablations.size(); ++i) {
    pass = pass && full - abl[i] >= 0.01;
    detail += std::string(", ") + variant_name(ablations[i]) + " " + fmt("%.4f", abl[i]) +
              " (margin " + fmt("%+.4f", full - abl[i]) + ")";
  }
  return {pass, detail};
}

Outcome low_data_trend() {
  double low = 0, high = 0;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    ExperimentConfig cfg = load_config("mixed.json");
    cfg.set_seed(seed);
    cfg.fractions = {0.15, 1.0};
    const ExperimentReport r = fraction_sweep(cfg);
    const auto &cells = r.extra.at("sweep");
    const double g_low = cells.at(0).at("gap").get<double>();
    const double g_high = cells.at(1).at("gap").get<double>();
    std::cout << "  [mixed seed " << seed << "] gap@0.15 " << fmt("%+.4f", g_low) << ", gap@1 "
              << fmt("%+.4f", g_high) << "\n"
              << std::flush;
    low += g_low / 3;
    high += g_high / 3;
  }
  return {low >= high,
          "mean gap at 15% " + fmt("%+.4f", low) + ", at 100% " + fmt("%+.4f", high)};
}

Outcome transe_sanity() {
  TransEConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 500;
  const ToyKg kg = testing::two_cluster_kg();
  const TransEModel m = train_toy_transe(kg, cfg);
  const double h = hits_at_1(m, kg);
  const bool windows = testing::window_means_non_increasing(m.epoch_loss, 50);
  return {h >= 0.5 && windows,
          "hits@1 " + fmt("%.3f", h) + ", 50-epoch windows " +
              (windows ? "non-increasing" : "INCREASE") + ", final loss " +
              fmt("%.4f", m.epoch_loss.back())};
}

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = testing::scratch_dir("acceptance_determinism");
  ExperimentConfig cfg = load_config("kg_only.json");
  cfg.task.train_size = 200;
  cfg.task.dev_size = 50;
  cfg.task.test_size = 50;
  cfg.model.num_layers = 1;
  cfg.train.epochs = 2;
  cfg.variants = {Variant::kFull, Variant::kBaseline};
  {
    std::ofstream out(dir / "config.json");
    out << cfg.to_json().dump(2) << "\n";
  }
  bool pass = true;
  std::string detail;
  for (const std::string cmd : {"train", "ablate"}) {
    const std::string stem = cmd == "train" ? "train_report" : "ablation_report";
    std::string reports[2];
    for (int run = 0; run < 2; ++run) {
      const fs::path out = dir / (cmd + std::to_string(run));
      const std::string line = std::string("\"") + KI_CLI + "\" " + cmd + " --config \"" +
                               (dir / "config.json").string() + "\" --seed 7 --out \"" +
                               out.string() + "\" > \"" + (dir / "log.txt").string() + "\" 2>&1";
      if (std::system(line.c_str()) != 0) {
        return {false, cmd + " exited with an error; see " + (dir / "log.txt").string()};
      }
      reports[run] = read_file(out / (stem + ".json"));
    }
    const bool same = !reports[0].empty() && reports[0] == reports[1];
    pass = pass && same;
    detail += cmd + " " + (same ? "identical" : "DIFFERENT") + " (" +
              std::to_string(reports[0].size()) + " bytes); ";
  }
  return {pass, detail};
}

Outcome checkpoint_round_trip() {
  testing::EncoderFixture fx(6);
  ModelParams params = ModelParams::init(fx.config);
  std::mt19937_64 rng(6);
  const auto batch = fx.batch(rng, 16, 12, 5);
  OptimizerConfig oc;
  oc.epochs = 2;
  oc.batch_size = 4;
  params = train(params, fx.config, batch, fx.tables(), oc).params;
  const fs::path path = testing::scratch_dir("acceptance_ckpt") / "model.ckpt";
  save_checkpoint(path, fx.config, params);
  const auto [cfg2, params2] = load_checkpoint(path);
  int identical = 0;
  const int n = 50;
  for (int i = 0; i < n; ++i) {
    const EncodedInput enc = fx.encode(testing::random_record(rng, 20, 5));
    const Vec a = forward(params, fx.config, enc, fx.tables()).logits;
    const Vec b = forward(params2, cfg2, enc, fx.tables()).logits;
    if (a.size() == b.size() && std::memcmp(a.data(), b.data(), sizeof(double) * a.size()) == 0) {
      ++identical;
    }
  }
  return {identical == n && cfg2 == fx.config,
          std::to_string(identical) + "/" + std::to_string(n) + " records bitwise identical"};
}

}  // namespace
}  // namespace ki

int main(int argc, char **argv) {
  const std::vector<std::pair<int, std::function<ki::Outcome()>>> criteria = {
      {1, ki::mask_oracle},
      {2, ki::gradient_checks},
      {3, ki::zero_entity_equivalence},
      {4, ki::projection_range_and_disjointness},
      {5, ki::knowledge_signal_recovery},
      {6, ki::ablation_direction},
      {7, ki::low_data_trend},
      {8, ki::transe_sanity},
      {9, ki::determinism},
      {10, ki::checkpoint_round_trip},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto &[id, run] : criteria) {
    if (!only.empty() && only.count(id) == 0) continue;
    ki::Outcome o;
    try {
      o = run();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail
              << "\n"
              << std::flush;
  }
  return failed == 0 ? 0 : 1;
}
