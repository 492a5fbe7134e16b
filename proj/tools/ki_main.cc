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

// Command-line driver for the experiment harness.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ki/errors.h"
#include "ki/harness/experiment.h"
#include "ki/harness/grad_check.h"
#include "ki/harness/json_util.h"
#include "ki/selective_attention.h"

namespace {

struct Common {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
};

void add_common(CLI::App *sub, Common &c, bool needs_out = false) {
  sub->add_option("--config", c.config, "experiment config JSON")->required()->check(
      CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "seed for data, initialisation and batch order");
  auto *o = sub->add_option("--out", c.out, "output directory (overrides paths.out_dir)");
  if (needs_out) o->required();
}

ki::ExperimentConfig load_config(const Common &c) {
  ki::ExperimentConfig cfg = ki::ExperimentConfig::load(c.config);
  if (c.seed) cfg.set_seed(*c.seed);
  if (!c.out.empty()) cfg.paths.out_dir = c.out;
  cfg.validate();
  return cfg;
}

void emit(const ki::ExperimentReport &report, const ki::ExperimentConfig &cfg,
          const std::string &stem) {
  std::cout << report.to_table();
  if (!cfg.paths.out_dir.empty()) {
    ki::write_report(report, cfg.paths.out_dir, stem);
    std::cout << "\nwrote " << (std::filesystem::path(cfg.paths.out_dir) / (stem + ".json")).string()
              << "\n";
  }
}

const std::vector<ki::Record> &pick_split(const ki::Dataset &d, const std::string &split) {
  if (split == "train") return d.train;
  if (split == "dev") return d.dev;
  if (split == "test") return d.test;
  throw ki::ConfigError("unknown split '" + split + "'");
}

int run_gen_data(const Common &c) {
  ki::ExperimentConfig cfg = load_config(c);
  ki::SyntheticTask t = ki::generate_synthetic_dataset(cfg.task);
  ki::save_dataset_dir(cfg.paths.out_dir, t.data, t.resources);
  std::ofstream spec(std::filesystem::path(cfg.paths.out_dir) / "task.json");
  spec << ki::round_floats(cfg.task.to_json()).dump(2) << "\n";
  std::cout << "train " << t.data.train.size() << ", dev " << t.data.dev.size() << ", test "
            << t.data.test.size() << " records; " << t.kg.entities.size() << " KG entities, "
            << t.kg.triples.size() << " triples; TransE hits@1 " << t.transe_hits_at_1 << "\n"
            << "wrote " << cfg.paths.out_dir << "\n";
  return 0;
}

int run_train(const Common &c) {
  ki::ExperimentConfig cfg = load_config(c);
  std::vector<ki::TrainedModel> models;
  ki::ExperimentReport report = ki::run_experiment(cfg, &models);
  emit(report, cfg, "train_report");
  if (!cfg.paths.out_dir.empty()) {
    for (size_t i = 0; i < models.size(); ++i) {
      const auto path = std::filesystem::path(cfg.paths.out_dir) /
                        (std::string(ki::variant_id(cfg.variants[i])) + ".ckpt");
      ki::save_checkpoint(path, models[i].config, models[i].params);
      std::cout << "wrote " << path.string() << "\n";
    }
  }
  return 0;
}

int run_eval(const Common &c, std::string checkpoint, const std::string &split) {
  ki::ExperimentConfig cfg = load_config(c);
  if (checkpoint.empty()) checkpoint = cfg.paths.checkpoint;
  if (checkpoint.empty()) throw ki::ConfigError("eval needs --checkpoint or paths.checkpoint");
  const ki::PreparedData data = ki::prepare_data(cfg);
  auto [mc, params] = ki::load_checkpoint(checkpoint);
  if (mc.vocab_size != data.resources.vocab.size()) {
    throw ki::ConfigError("checkpoint vocabulary size does not match the data");
  }
  ki::ModelTables mt(data.resources, mc);
  const auto examples =
      ki::encode_records(pick_split(data.data, split), data.resources, mc.encoding_options());
  const double acc = ki::accuracy(params, mc, examples, mt.tables());
  const double loss = ki::batch_loss(params, mc, examples, mt.tables());
  nlohmann::json j{{"checkpoint", checkpoint},
                   {"split", split},
                   {"records", examples.size()},
                   {"accuracy", acc},
                   {"loss", loss},
                   {"model", mc.to_json()}};
  std::cout << ki::round_floats(j).dump(2) << "\n";
  if (!cfg.paths.out_dir.empty()) {
    std::filesystem::create_directories(cfg.paths.out_dir);
    std::ofstream(std::filesystem::path(cfg.paths.out_dir) / "eval.json")
        << ki::round_floats(j).dump(2) << "\n";
  }
  return 0;
}

std::vector<int> parse_ids(const std::string &s) {
  std::vector<int> ids;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      size_t used = 0;
      ids.push_back(std::stoi(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception &) {
      throw ki::ConfigError("bad record id '" + part + "'");
    }
  }
  return ids;
}

int run_show_mask(const Common &c, const std::string &split, int record, bool full_attention) {
  ki::ExperimentConfig cfg = load_config(c);
  const ki::PreparedData data = ki::prepare_data(cfg);
  const auto &records = pick_split(data.data, split);
  if (record < 0 || static_cast<size_t>(record) >= records.size()) {
    throw ki::LookupError("no " + split + " record " + std::to_string(record));
  }
  const ki::Record &r = records[record];
  const ki::ModelConfig mc = ki::resolve_model_config(cfg.model, data.resources);
  const ki::EncodedInput enc = ki::encode_record(r, data.resources, mc.encoding_options());
  const ki::AttentionMask mask =
      ki::build_mask(enc, mc.use_selective_attention && !full_attention);
  std::cout << "s1: " << r.sentence1 << "\ns2: " << r.sentence2 << "\nlabel: " << r.label
            << "\n\n";
  std::cout << " idx  type  pos  item\n";
  for (int i = 0; i < enc.seq_len(); ++i) {
    std::string item;
    if (i < enc.num_tokens()) {
      item = data.resources.vocab.token(enc.token_ids[i]);
    } else if (enc.is_entity_sep(i)) {
      item = "[SEP]";
    } else {
      int k = i - enc.num_tokens();
      if (i > enc.entity_sep1_index()) --k;
      const ki::EntitySlot &s = enc.entities[k];
      item = std::string("<") + ki::entity_type_name(s.etype) + " " +
             (s.entity_id.empty() ? "[ENT_UNK]" : s.entity_id) + " span " +
             std::to_string(s.span.first) + ".." + std::to_string(s.span.last) + ">";
    }
    std::printf("%4d  %4d  %3d  %s\n", i, enc.token_types[i], enc.position_ids[i], item.c_str());
  }
  std::cout << "\nmask (row attends column):\n" << mask.render();
  return 0;
}

int run_grad_check(const Common &c, int samples, int records) {
  ki::ExperimentConfig cfg = load_config(c);
  const ki::PreparedData data = ki::prepare_data(cfg);
  const ki::ModelConfig mc = ki::resolve_model_config(cfg.model, data.resources);
  mc.validate();
  ki::ModelTables mt(data.resources, mc);
  std::vector<ki::Record> subset(data.data.train.begin(),
                                 data.data.train.begin() +
                                     std::min<size_t>(records, data.data.train.size()));
  const auto batch = ki::encode_records(subset, data.resources, mc.encoding_options());
  const auto groups = ki::gradient_check(ki::ModelParams::init(mc), mc, batch, mt.tables(),
                                         samples, cfg.train.seed);
  bool ok = true;
  for (const auto &g : groups) {
    const bool pass = g.checked > 0 && g.max_relative_error < 1e-5;
    ok = ok && pass;
    std::printf("%-18s checked %3d  max rel err %.3e  small-entry abs err %.3e  %s\n",
                g.name.c_str(), g.checked, g.max_relative_error, g.max_abs_error_small,
                pass ? "ok" : "FAIL");
  }
  if (!cfg.paths.out_dir.empty()) {
    std::filesystem::create_directories(cfg.paths.out_dir);
    std::ofstream(std::filesystem::path(cfg.paths.out_dir) / "grad_check.json")
        << ki::round_floats(ki::to_json(groups)).dump(2) << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Knowledge-infused sentence-pair encoder: data generation, training and analysis"};
  app.require_subcommand(1);

  Common gen, tr, ev, ab, sw, co, sm, gc;
  auto *gen_cmd = app.add_subcommand("gen-data", "generate the synthetic task into --out");
  add_common(gen_cmd, gen, true);

  auto *train_cmd = app.add_subcommand("train", "train the configured variants");
  add_common(train_cmd, tr);

  auto *eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
  add_common(eval_cmd, ev);
  std::string eval_ckpt, eval_split = "test";
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint (overrides paths.checkpoint)");
  eval_cmd->add_option("--split", eval_split, "train, dev or test");

  auto *ablate_cmd = app.add_subcommand("ablate", "full, -SA, -ETT-PA and -VSP+PCA");
  add_common(ablate_cmd, ab);

  auto *sweep_cmd = app.add_subcommand("sweep", "full vs baseline over training fractions");
  add_common(sweep_cmd, sw);
  std::vector<double> fractions;
  sweep_cmd->add_option("--fractions", fractions, "ascending fractions in (0, 1]")->delimiter(',');

  auto *conf_cmd = app.add_subcommand("confidence", "probabilities with and without entities");
  add_common(conf_cmd, co);
  std::string conf_ids, conf_ckpt;
  conf_cmd->add_option("--records", conf_ids, "comma-separated test record ids (default all)");
  conf_cmd->add_option("--checkpoint", conf_ckpt, "checkpoint (overrides paths.checkpoint)");

  auto *mask_cmd = app.add_subcommand("show-mask", "print one record's layout and mask");
  add_common(mask_cmd, sm);
  std::string mask_split = "test";
  int mask_record = 0;
  bool mask_full = false;
  mask_cmd->add_option("--split", mask_split, "train, dev or test");
  mask_cmd->add_option("--record", mask_record, "record index");
  mask_cmd->add_flag("--full-attention", mask_full, "show the -SA mask instead");

  auto *grad_cmd = app.add_subcommand("grad-check", "finite-difference gradient check");
  add_common(grad_cmd, gc);
  int gc_samples = 20, gc_records = 2;
  grad_cmd->add_option("--samples", gc_samples, "entries per parameter group");
  grad_cmd->add_option("--records", gc_records, "training records in the batch");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_cmd) return run_gen_data(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev, eval_ckpt, eval_split);
    if (*ablate_cmd) {
      auto cfg = load_config(ab);
      emit(ki::ablation_suite(cfg), cfg, "ablation_report");
      return 0;
    }
    if (*sweep_cmd) {
      auto cfg = load_config(sw);
      if (!fractions.empty()) cfg.fractions = fractions;
      emit(ki::fraction_sweep(cfg), cfg, "sweep_report");
      return 0;
    }
    if (*conf_cmd) {
      auto cfg = load_config(co);
      if (!conf_ckpt.empty()) cfg.paths.checkpoint = conf_ckpt;
      emit(ki::confidence_report(cfg, parse_ids(conf_ids)), cfg, "confidence_report");
      return 0;
    }
    if (*mask_cmd) return run_show_mask(sm, mask_split, mask_record, mask_full);
    if (*grad_cmd) return run_grad_check(gc, gc_samples, gc_records);
  } catch (const ki::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
