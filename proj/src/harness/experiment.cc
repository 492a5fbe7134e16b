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

#include "ki/harness/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "ki/errors.h"
#include "ki/harness/json_util.h"

namespace ki {

namespace {

constexpr uint64_t kSubsetStream = 0x5eed5eed5eedULL;

nlohmann::json optimizer_to_json(const OptimizerConfig &o) {
  return nlohmann::json{{"learning_rate", o.learning_rate},
                        {"beta1", o.beta1},
                        {"beta2", o.beta2},
                        {"eps", o.eps},
                        {"epochs", o.epochs},
                        {"batch_size", o.batch_size},
                        {"seed", o.seed}};
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::string pad(std::string s, size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

ExperimentReport new_report(const std::string &command, const ExperimentConfig &cfg,
                            const PreparedData &data) {
  ExperimentReport r;
  r.command = command;
  r.seed = cfg.train.seed;
  r.task = cfg.task;
  r.data_source = data.source;
  r.train = optimizer_to_json(cfg.train);
  r.coverage = coverage_stats(data.data.test, data.resources,
                              resolve_model_config(cfg.model, data.resources));
  return r;
}

}  // namespace

const char *variant_name(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kBaseline:
      return "baseline";
    case Variant::kNoSelectiveAttention:
      return "-SA";
    case Variant::kNoTypesNoAlignment:
      return "-ETT-PA";
    case Variant::kPca:
      return "-VSP+PCA";
  }
  return "?";
}

const char *variant_id(Variant v) {
  switch (v) {
    case Variant::kFull:
      return "full";
    case Variant::kBaseline:
      return "baseline";
    case Variant::kNoSelectiveAttention:
      return "no_sa";
    case Variant::kNoTypesNoAlignment:
      return "no_ett_pa";
    case Variant::kPca:
      return "vsp_pca";
  }
  return "?";
}

Variant parse_variant(const std::string &name) {
  for (Variant v : {Variant::kFull, Variant::kBaseline, Variant::kNoSelectiveAttention,
                    Variant::kNoTypesNoAlignment, Variant::kPca}) {
    if (name == variant_name(v) || name == variant_id(v)) return v;
  }
  throw ConfigError("unknown variant '" + name + "'");
}

ModelConfig apply_variant(ModelConfig c, Variant v) {
  switch (v) {
    case Variant::kFull:
      break;
    case Variant::kBaseline:
      c.projection_mode = ProjectionMode::kNone;
      c.use_selective_attention = false;
      c.use_entity_token_types = false;
      c.use_position_alignment = false;
      break;
    case Variant::kNoSelectiveAttention:
      c.use_selective_attention = false;
      break;
    case Variant::kNoTypesNoAlignment:
      c.use_entity_token_types = false;
      c.use_position_alignment = false;
      break;
    case Variant::kPca:
      c.projection_mode = ProjectionMode::kPca;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  task.validate();
  ModelConfig probe = model;
  probe.vocab_size = std::max(probe.vocab_size, 1);
  probe.validate();
  train.validate();
  if (variants.empty()) throw ConfigError("variants: at least one variant is required");
  if (fractions.empty()) throw ConfigError("train.fractions must not be empty");
  for (size_t i = 0; i < fractions.size(); ++i) {
    if (!(fractions[i] > 0 && fractions[i] <= 1)) {
      throw ConfigError("train.fractions must lie in (0, 1]");
    }
    if (i > 0 && !(fractions[i] > fractions[i - 1])) {
      throw ConfigError("train.fractions must be strictly ascending");
    }
  }
  if (!paths.data_dir.empty() && !std::filesystem::is_directory(paths.data_dir)) {
    throw ConfigError("paths.data_dir '" + paths.data_dir + "' does not exist");
  }
  if (!paths.checkpoint.empty() && !std::filesystem::exists(paths.checkpoint)) {
    throw ConfigError("paths.checkpoint '" + paths.checkpoint + "' does not exist");
  }
}

void ExperimentConfig::set_seed(uint64_t seed) {
  task.seed = seed;
  model.seed = seed;
  train.seed = seed;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json t = optimizer_to_json(train);
  t["fractions"] = fractions;
  nlohmann::json vs = nlohmann::json::array();
  for (Variant v : variants) vs.push_back(variant_name(v));
  return nlohmann::json{{"task", task.to_json()},
                        {"model", model.to_json()},
                        {"train", t},
                        {"variants", vs},
                        {"paths",
                         {{"data_dir", paths.data_dir},
                          {"out_dir", paths.out_dir},
                          {"checkpoint", paths.checkpoint}}}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json &j,
                                             const std::filesystem::path &base_dir) {
  ExperimentConfig c;
  SectionReader top(j, "config");
  if (const auto *t = top.raw("task")) c.task = TaskSpec::from_json(*t);
  if (const auto *m = top.raw("model")) c.model = ModelConfig::from_json(*m);
  if (const auto *t = top.raw("train")) {
    SectionReader r(*t, "train");
    r.get("learning_rate", c.train.learning_rate);
    r.get("beta1", c.train.beta1);
    r.get("beta2", c.train.beta2);
    r.get("eps", c.train.eps);
    r.get("epochs", c.train.epochs);
    r.get("batch_size", c.train.batch_size);
    r.get("seed", c.train.seed);
    r.get("fractions", c.fractions);
    r.finish();
  }
  if (const auto *v = top.raw("variants")) {
    if (!v->is_array()) throw ConfigError("variants must be a list of names");
    c.variants.clear();
    for (const auto &name : *v) {
      if (!name.is_string()) throw ConfigError("variants must be a list of names");
      c.variants.push_back(parse_variant(name.get<std::string>()));
    }
  }
  if (const auto *p = top.raw("paths")) {
    SectionReader r(*p, "paths");
    r.get("data_dir", c.paths.data_dir);
    r.get("out_dir", c.paths.out_dir);
    r.get("checkpoint", c.paths.checkpoint);
    r.finish();
    for (std::string *s : {&c.paths.data_dir, &c.paths.out_dir, &c.paths.checkpoint}) {
      if (!s->empty() && std::filesystem::path(*s).is_relative() && !base_dir.empty()) {
        *s = (base_dir / *s).lexically_normal().string();
      }
    }
  }
  top.finish();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

PreparedData prepare_data(const ExperimentConfig &cfg) {
  if (!cfg.paths.data_dir.empty()) {
    auto [d, r] = load_dataset_dir(cfg.paths.data_dir);
    return {std::move(d), std::move(r), cfg.paths.data_dir};
  }
  SyntheticTask t = generate_synthetic_dataset(cfg.task);
  return {std::move(t.data), std::move(t.resources), "generated"};
}

ModelConfig resolve_model_config(const ModelConfig &base, const Resources &res) {
  ModelConfig c = base;
  c.vocab_size = res.vocab.size();
  const bool learned = c.projection_mode == ProjectionMode::kLearned;
  c.conceptual_kg_dim = learned ? res.conceptual.dim() : 0;
  c.ambiguous_kg_dim = learned ? res.ambiguous.dim() : 0;
  return c;
}

ModelTables::ModelTables(const Resources &res, const ModelConfig &config)
    : conceptual_(&res.conceptual), ambiguous_(&res.ambiguous) {
  if (config.projection_mode != ProjectionMode::kPca) return;
  auto reduce = [&](const KgEmbeddingTable &t, std::unique_ptr<KgEmbeddingTable> &slot)
      -> const KgEmbeddingTable * {
    if (t.size() < 2) return &t;
    const int target = std::min({config.model_dim, t.dim(), static_cast<int>(t.size())});
    slot = std::make_unique<KgEmbeddingTable>(pca_project(t, target));
    return slot.get();
  };
  conceptual_ = reduce(res.conceptual, pca_conceptual_);
  ambiguous_ = reduce(res.ambiguous, pca_ambiguous_);
}

TrainedModel train_variant(const ExperimentConfig &cfg, const PreparedData &data, Variant v,
                           const std::vector<Record> *train_records) {
  const Resources &res = data.resources;
  ModelConfig mc = resolve_model_config(apply_variant(cfg.model, v), res);
  mc.validate();
  ModelTables mt(res, mc);
  const KgTables tables = mt.tables();
  const EncodingOptions eo = mc.encoding_options();
  const std::vector<Record> &records = train_records ? *train_records : data.data.train;
  const auto train_ex = encode_records(records, res, eo);
  const auto dev_ex = encode_records(data.data.dev, res, eo);
  const auto test_ex = encode_records(data.data.test, res, eo);

  TrainResult tr = train(ModelParams::init(mc), mc, train_ex, tables, cfg.train);
  TrainedModel out{mc, std::move(tr.params), {}};
  VariantReport &rep = out.report;
  rep.name = variant_name(v);
  rep.model = mc;
  rep.train_records = static_cast<int>(records.size());
  rep.train_accuracy = accuracy(out.params, mc, train_ex, tables);
  rep.dev_accuracy = accuracy(out.params, mc, dev_ex, tables);
  rep.test_accuracy = accuracy(out.params, mc, test_ex, tables);
  rep.epoch_loss = std::move(tr.epoch_loss);
  rep.num_parameters = out.params.num_parameters();
  return out;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json vs = nlohmann::json::array();
  for (const VariantReport &v : variants) {
    vs.push_back({{"name", v.name},
                  {"model", v.model.to_json()},
                  {"train_records", v.train_records},
                  {"train_accuracy", v.train_accuracy},
                  {"dev_accuracy", v.dev_accuracy},
                  {"test_accuracy", v.test_accuracy},
                  {"epoch_loss", v.epoch_loss},
                  {"num_parameters", v.num_parameters}});
  }
  nlohmann::json j{{"command", command},    {"seed", seed},         {"task", task.to_json()},
                   {"data_source", data_source}, {"train", train},  {"variants", vs},
                   {"coverage", coverage}};
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  return round_floats(j);
}

const VariantReport &ExperimentReport::variant(const std::string &name) const {
  for (const VariantReport &v : variants) {
    if (v.name == name) return v;
  }
  throw LookupError("report has no variant '" + name + "'");
}

std::string ExperimentReport::to_table() const {
  std::ostringstream os;
  os << "command: " << command << "  seed: " << seed << "  task: " << task.name << " ("
     << signal_name(task.signal) << ")  data: " << data_source << "\n";
  os << "runtime: " << fmt("%.1f", runtime_seconds) << " s\n\n";
  if (!variants.empty()) {
    os << pad("variant", 18) << pad("train_n", 9) << pad("train_acc", 11) << pad("dev_acc", 9)
       << pad("test_acc", 10) << pad("final_loss", 12) << "params\n";
    for (const VariantReport &v : variants) {
      os << pad(v.name, 18) << pad(std::to_string(v.train_records), 9)
         << pad(fmt("%.4f", v.train_accuracy), 11) << pad(fmt("%.4f", v.dev_accuracy), 9)
         << pad(fmt("%.4f", v.test_accuracy), 10)
         << pad(v.epoch_loss.empty() ? "-" : fmt("%.5f", v.epoch_loss.back()), 12)
         << v.num_parameters << "\n";
    }
  }
  if (extra.contains("sweep")) {
    os << "\n" << pad("fraction", 10) << pad("train_n", 9) << pad("full", 9) << pad("baseline", 10)
       << "gap\n";
    for (const auto &c : extra.at("sweep")) {
      os << pad(fmt("%.2f", c.at("fraction").get<double>()), 10)
         << pad(std::to_string(c.at("train_records").get<int>()), 9)
         << pad(fmt("%.4f", c.at("full").get<double>()), 9)
         << pad(fmt("%.4f", c.at("baseline").get<double>()), 10)
         << fmt("%+.4f", c.at("gap").get<double>()) << "\n";
    }
  }
  if (extra.contains("confidence")) {
    const auto &c = extra.at("confidence");
    os << "\nconfidence in the correct class, " << c.at("records").size() << " records\n"
       << "  mean(no entities)        " << fmt("%.4f", c.at("mean_none").get<double>()) << "\n"
       << "  mean(sentence-1 only)    " << fmt("%.4f", c.at("mean_subset").get<double>()) << "\n"
       << "  mean(all entities)       " << fmt("%.4f", c.at("mean_all").get<double>()) << "\n"
       << "  mean delta (all - none)  " << fmt("%+.4f", c.at("mean_delta_all").get<double>())
       << "\n";
  }
  if (coverage.is_object() && !coverage.empty()) {
    os << "\ntest coverage: " << coverage.dump() << "\n";
  }
  return os.str();
}

nlohmann::json coverage_stats(const std::vector<Record> &records, const Resources &res,
                              const ModelConfig &config) {
  int with_entities = 0, conceptual = 0, ambiguous = 0, unk = 0, truncated = 0;
  const EncodingOptions eo = config.encoding_options();
  for (const Record &r : records) {
    const EncodedInput enc = encode_record(r, res, eo);
    if (!enc.entities.empty()) ++with_entities;
    for (const EntitySlot &s : enc.entities) {
      (s.etype == EntityType::kConceptual ? conceptual : ambiguous)++;
      if (s.entity_id.empty()) ++unk;
    }
    truncated += enc.truncated_entities;
  }
  const double n = records.empty() ? 1.0 : static_cast<double>(records.size());
  const int total = conceptual + ambiguous;
  return nlohmann::json{{"records", records.size()},
                        {"records_with_entities", with_entities / n},
                        {"conceptual_per_record", conceptual / n},
                        {"ambiguous_per_record", ambiguous / n},
                        {"ent_unk_share", total == 0 ? 0.0 : unk / static_cast<double>(total)},
                        {"truncated_entities", truncated}};
}

ExperimentReport run_experiment(const ExperimentConfig &cfg, std::vector<TrainedModel> *models) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(cfg);
  ExperimentReport report = new_report("train", cfg, data);
  for (Variant v : cfg.variants) {
    TrainedModel m = train_variant(cfg, data, v);
    report.variants.push_back(m.report);
    if (models != nullptr) models->push_back(std::move(m));
  }
  report.runtime_seconds = elapsed_since(t0);
  return report;
}

ExperimentReport ablation_suite(const ExperimentConfig &cfg) {
  ExperimentConfig c = cfg;
  c.variants = {Variant::kFull, Variant::kNoSelectiveAttention, Variant::kNoTypesNoAlignment,
                Variant::kPca};
  ExperimentReport r = run_experiment(c);
  r.command = "ablate";
  return r;
}

std::vector<size_t> fraction_subset(size_t n, double fraction, uint64_t seed) {
  std::vector<size_t> perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  std::mt19937_64 rng(seed ^ kSubsetStream);
  std::shuffle(perm.begin(), perm.end(), rng);
  const size_t k =
      fraction >= 1.0 ? n : static_cast<size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  perm.resize(k);
  std::sort(perm.begin(), perm.end());
  return perm;
}

ExperimentReport fraction_sweep(const ExperimentConfig &cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(cfg);
  const size_t n = data.data.train.size();
  std::vector<std::vector<Record>> subsets;
  for (double f : cfg.fractions) {
    const auto idx = fraction_subset(n, f, cfg.train.seed);
    if (idx.size() < static_cast<size_t>(cfg.train.batch_size)) {
      throw ConfigError("fraction " + fmt("%g", f) + " keeps " + std::to_string(idx.size()) +
                        " records, less than one batch of " +
                        std::to_string(cfg.train.batch_size));
    }
    std::vector<Record> s;
    for (size_t i : idx) s.push_back(data.data.train[i]);
    subsets.push_back(std::move(s));
  }
  ExperimentReport report = new_report("sweep", cfg, data);
  nlohmann::json cells = nlohmann::json::array();
  for (size_t i = 0; i < cfg.fractions.size(); ++i) {
    TrainedModel full = train_variant(cfg, data, Variant::kFull, &subsets[i]);
    TrainedModel base = train_variant(cfg, data, Variant::kBaseline, &subsets[i]);
    const std::string tag = "@" + fmt("%g", cfg.fractions[i]);
    full.report.name += tag;
    base.report.name += tag;
    cells.push_back({{"fraction", cfg.fractions[i]},
                     {"train_records", subsets[i].size()},
                     {"full", full.report.test_accuracy},
                     {"baseline", base.report.test_accuracy},
                     {"gap", full.report.test_accuracy - base.report.test_accuracy}});
    report.variants.push_back(full.report);
    report.variants.push_back(base.report);
  }
  report.extra["sweep"] = cells;
  report.runtime_seconds = elapsed_since(t0);
  return report;
}

ExperimentReport confidence_report(const ExperimentConfig &cfg,
                                   const std::vector<int> &record_ids) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const PreparedData data = prepare_data(cfg);
  const auto &test = data.data.test;
  for (int id : record_ids) {
    if (id < 0 || static_cast<size_t>(id) >= test.size()) {
      throw LookupError("no test record " + std::to_string(id) + " (test split has " +
                        std::to_string(test.size()) + ")");
    }
  }
  ExperimentReport report = new_report("confidence", cfg, data);
  ModelConfig mc;
  ModelParams params;
  if (!cfg.paths.checkpoint.empty()) {
    std::tie(mc, params) = load_checkpoint(cfg.paths.checkpoint);
    if (mc.vocab_size != data.resources.vocab.size()) {
      throw ConfigError("checkpoint vocabulary size does not match the data");
    }
  } else {
    TrainedModel m = train_variant(cfg, data, Variant::kFull);
    mc = m.config;
    params = std::move(m.params);
    report.variants.push_back(m.report);
  }
  ModelTables mt(data.resources, mc);
  const KgTables tables = mt.tables();
  const EncodingOptions eo = mc.encoding_options();

  std::vector<int> ids = record_ids;
  if (ids.empty()) {
    ids.resize(test.size());
    std::iota(ids.begin(), ids.end(), 0);
  }
  nlohmann::json rows = nlohmann::json::array();
  double sum_none = 0, sum_subset = 0, sum_all = 0;
  for (int id : ids) {
    const Record &r = test[id];
    auto probs = [&](const RecordEntityFilter &keep) {
      return predict_proba(params, mc, encode_record(r, data.resources, eo, keep), tables);
    };
    const auto none = probs([](const RecordEntity &) { return false; });
    const auto subset = probs([](const RecordEntity &e) { return e.sentence == 1; });
    const auto all = probs({});
    const int y = r.label;
    sum_none += none[y];
    sum_subset += subset[y];
    sum_all += all[y];
    rows.push_back({{"record", id},
                    {"label", y},
                    {"none", none},
                    {"subset", subset},
                    {"all", all},
                    {"delta_subset", subset[y] - none[y]},
                    {"delta_all", all[y] - none[y]}});
  }
  const double n = ids.empty() ? 1.0 : static_cast<double>(ids.size());
  report.extra["confidence"] = {{"records", rows},
                                {"from_checkpoint", !cfg.paths.checkpoint.empty()},
                                {"mean_none", sum_none / n},
                                {"mean_subset", sum_subset / n},
                                {"mean_all", sum_all / n},
                                {"mean_delta_all", (sum_all - sum_none) / n}};
  report.runtime_seconds = elapsed_since(t0);
  return report;
}

void write_report(const ExperimentReport &report, const std::filesystem::path &dir,
                  const std::string &stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / (stem + ".json"));
    if (!out) throw ConfigError("cannot write report in " + dir.string());
    out << report.to_json().dump(2) << "\n";
  }
  std::ofstream out(dir / (stem + ".txt"));
  out << report.to_table();
}

}  // namespace ki
