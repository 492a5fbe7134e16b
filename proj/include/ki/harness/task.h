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

#ifndef KI_HARNESS_TASK_H_
#define KI_HARNESS_TASK_H_

#include <cstdint>
#include <string>

#include "json.hpp"
#include "ki/harness/dataset.h"
#include "ki/kg_store.h"

namespace ki {

enum class SignalPlacement { kKgOnly, kTextOnly, kMixed };

const char *signal_name(SignalPlacement s);
SignalPlacement parse_signal(const std::string &name);

// kSameCluster: 1 iff the two entities share a cluster.
// kFirstCluster: 1 iff the sentence-1 entity lies in cluster 0.
enum class LabelRule { kSameCluster, kFirstCluster };

const char *label_rule_name(LabelRule r);
LabelRule parse_label_rule(const std::string &name);

// Sentence-pair task over a clustered toy KG. Each sentence mentions one
// conceptual entity; by default the label is 1 iff the two entities are KG
// neighbours (same cluster).
//   kg_only:   dev/test entities never occur in training text.
//   mixed:     one shared entity pool, and a cue word that states the label
//              in a `cue_rate` fraction of records.
//   text_only: the cue word always states the label; entities are random.
struct TaskSpec {
  std::string name = "kg_only";
  SignalPlacement signal = SignalPlacement::kKgOnly;
  LabelRule label_rule = LabelRule::kSameCluster;
  int num_classes = 2;

  int num_clusters = 2;
  int entities_per_cluster = 40;
  // kg_only: share of each cluster kept out of training text.
  double held_out_fraction = 0.3;
  double cue_rate = 0.5;

  int filler_words = 40;
  int min_filler = 2;
  int max_filler = 5;
  // Polysemous words tagged with a (label-independent) sense.
  int ambiguous_words = 6;
  int senses_per_word = 2;
  double ambiguous_rate = 0.5;

  // Conceptual lexicon rows are TransE vectors followed by an external
  // block of N(0, external_scale^2) features.
  int kg_dim = 16;
  int external_dim = 16;
  double external_scale = 1.5;
  int sense_dim = 8;
  int transe_epochs = 200;

  int train_size = 2000;
  int dev_size = 200;
  int test_size = 500;
  uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  // Unknown keys are errors.
  static TaskSpec from_json(const nlohmann::json &j);
};

struct SyntheticTask {
  Dataset data;
  Resources resources;
  ToyKg kg;
  // Cluster of every KG entity, aligned with kg.entities.
  std::vector<int> cluster;
  double transe_hits_at_1 = 0;
};

// Deterministic per spec.seed.
SyntheticTask generate_synthetic_dataset(const TaskSpec &spec);

}  // namespace ki

#endif  // KI_HARNESS_TASK_H_
