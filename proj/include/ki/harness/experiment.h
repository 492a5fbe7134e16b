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

#ifndef KI_HARNESS_EXPERIMENT_H_
#define KI_HARNESS_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ki/harness/dataset.h"
#include "ki/harness/task.h"
#include "ki/model.h"
#include "ki/trainer.h"

namespace ki {

enum class Variant { kFull, kBaseline, kNoSelectiveAttention, kNoTypesNoAlignment, kPca };

// Display names: full, baseline, -SA, -ETT-PA, -VSP+PCA.
const char *variant_name(Variant v);
// File-safe names: full, baseline, no_sa, no_ett_pa, vsp_pca.
const char *variant_id(Variant v);
// Accepts either form.
Variant parse_variant(const std::string &name);

ModelConfig apply_variant(ModelConfig base, Variant v);

struct Paths {
  // Existing gen-data output; when empty the task is generated in memory.
  std::string data_dir;
  std::string out_dir;
  std::string checkpoint;
};

struct ExperimentConfig {
  TaskSpec task;
  // vocab_size and the KG widths are filled in from the data.
  ModelConfig model;
  OptimizerConfig train;
  // Training fractions for the sweep, ascending in (0, 1].
  std::vector<double> fractions = {0.15, 0.3, 0.5, 1.0};
  std::vector<Variant> variants = {Variant::kFull, Variant::kBaseline};
  Paths paths;

  // Throws ConfigError; also checks that configured paths exist.
  void validate() const;
  // Uses one seed for data, initialisation and batch order.
  void set_seed(uint64_t seed);
  nlohmann::json to_json() const;
  // Sections task, model, train, variants, paths; unknown keys are errors.
  // Relative paths resolve against `base_dir`.
  static ExperimentConfig from_json(const nlohmann::json &j,
                                    const std::filesystem::path &base_dir = {});
  static ExperimentConfig load(const std::filesystem::path &path);
};

struct PreparedData {
  Dataset data;
  Resources resources;
  std::string source;  // "generated" or the data directory
};

PreparedData prepare_data(const ExperimentConfig &cfg);

// Completes a model config (vocabulary and KG widths) for the given data.
ModelConfig resolve_model_config(const ModelConfig &base, const Resources &res);

// KG tables as a model consumes them: the raw lexicons, or their PCA
// reductions to min(model_dim, width, entries) when projection_mode is pca.
class ModelTables {
 public:
  ModelTables(const Resources &res, const ModelConfig &config);
  KgTables tables() const { return KgTables{conceptual_, ambiguous_}; }

 private:
  std::unique_ptr<KgEmbeddingTable> pca_conceptual_, pca_ambiguous_;
  const KgEmbeddingTable *conceptual_ = nullptr;
  const KgEmbeddingTable *ambiguous_ = nullptr;
};

struct VariantReport {
  std::string name;
  ModelConfig model;
  int train_records = 0;
  double train_accuracy = 0;
  double dev_accuracy = 0;
  double test_accuracy = 0;
  std::vector<double> epoch_loss;
  size_t num_parameters = 0;
};

struct TrainedModel {
  ModelConfig config;
  ModelParams params;
  VariantReport report;
};

// Trains on `train` (a subset of the training split when given) and
// evaluates on every split.
TrainedModel train_variant(const ExperimentConfig &cfg, const PreparedData &data, Variant v,
                           const std::vector<Record> *train = nullptr);

struct ExperimentReport {
  std::string command;
  uint64_t seed = 0;
  TaskSpec task;
  std::string data_source;
  nlohmann::json train;
  std::vector<VariantReport> variants;
  nlohmann::json coverage;
  // Command-specific sections (sweep cells, confidence records).
  nlohmann::json extra = nlohmann::json::object();
  // Printed in the table only, so that report JSON stays reproducible.
  double runtime_seconds = 0;

  // Canonical key order, 9 significant digits.
  nlohmann::json to_json() const;
  std::string to_table() const;
  const VariantReport &variant(const std::string &name) const;
};

// Entity coverage of a split under the full model's encoding.
nlohmann::json coverage_stats(const std::vector<Record> &records, const Resources &res,
                              const ModelConfig &config);

// Trains every configured variant on identical data and batch order.
// `models` receives the trained parameters when non-null.
ExperimentReport run_experiment(const ExperimentConfig &cfg,
                                std::vector<TrainedModel> *models = nullptr);

// full, -SA, -ETT-PA, -VSP+PCA.
ExperimentReport ablation_suite(const ExperimentConfig &cfg);

// Full model and baseline on nested prefixes of one fixed shuffle of the
// training split. Throws ConfigError when a fraction yields less than one
// batch.
ExperimentReport fraction_sweep(const ExperimentConfig &cfg);

// Indices of the training records kept at `fraction`, in original order.
std::vector<size_t> fraction_subset(size_t n, double fraction, uint64_t seed);

// Per-record class probabilities for the full model with no entities, with
// sentence-1 entities only, and with all entities. Uses paths.checkpoint
// when set, otherwise trains the full variant. An empty id list means the
// whole test split. Unknown ids throw LookupError.
ExperimentReport confidence_report(const ExperimentConfig &cfg, const std::vector<int> &record_ids);

// Writes <stem>.json and <stem>.txt under dir.
void write_report(const ExperimentReport &report, const std::filesystem::path &dir,
                  const std::string &stem);

}  // namespace ki

#endif  // KI_HARNESS_EXPERIMENT_H_
