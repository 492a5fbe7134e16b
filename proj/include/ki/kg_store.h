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

#ifndef KI_KG_STORE_H_
#define KI_KG_STORE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ki/types.h"

namespace ki {

// Canonical lexicon key: lowercase, whitespace runs collapsed, spaces
// replaced by underscores. "World  War II" -> "world_war_ii".
std::string normalize_entity(std::string_view surface);

// Entity-string -> dense vector map for one knowledge graph. Keys are stored
// normalized and in insertion order, which is also the save order.
class KgEmbeddingTable {
 public:
  KgEmbeddingTable() = default;
  KgEmbeddingTable(std::string graph_name, int dim);

  const std::string &graph_name() const { return graph_name_; }
  int dim() const { return dim_; }
  size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }

  // Throws DimensionError on wrong length, NumericError on non-finite
  // values, ConfigError on a duplicate key.
  void insert(std::string_view entity, Vec vector);

  // Returns nullptr when the entity is absent.
  const Vec *find(std::string_view entity) const;
  bool contains(std::string_view entity) const { return find(entity) != nullptr; }

  const std::string &name(size_t i) const { return names_[i]; }
  const Vec &vector(size_t i) const { return vectors_[i]; }

  // Rows are entities in insertion order.
  Mat as_matrix() const;

  bool operator==(const KgEmbeddingTable &other) const;

 private:
  std::string graph_name_;
  int dim_ = 0;
  std::vector<std::string> names_;
  std::vector<Vec> vectors_;
  std::unordered_map<std::string, size_t> index_;
};

// Reads the lexicon TSV format: `entity<TAB>v1 v2 ... vD` per line.
KgEmbeddingTable load_lexicon(const std::filesystem::path &path,
                              std::optional<int> expected_dim = std::nullopt,
                              std::string graph_name = "");

// Writes the same format with 9 significant digits per value.
void save_lexicon(const KgEmbeddingTable &table,
                  const std::filesystem::path &path);

// ||h + r - t||_2.
double transe_score(const Vec &h, const Vec &r, const Vec &t);

struct Triple {
  int head = 0;
  int relation = 0;
  int tail = 0;
  bool operator==(const Triple &) const = default;
};

struct ToyKg {
  std::vector<std::string> entities;
  std::vector<std::string> relations;
  std::vector<Triple> triples;

  // Throws ConfigError on out-of-range indices or duplicate triples.
  void validate() const;
};

struct TransEConfig {
  int dim = 16;
  double margin = 1.0;
  double learning_rate = 0.01;
  int epochs = 500;
  int negatives_per_positive = 1;
  uint64_t seed = 1;

  void validate() const;
};

struct TransEModel {
  KgEmbeddingTable entities;
  // Relation vectors are internal to training; kept for link prediction.
  std::vector<Vec> relations;
  // Mean margin-ranking loss per epoch.
  std::vector<double> epoch_loss;
};

// Margin-ranking TransE with uniform head/tail corruption. Entity vectors
// are renormalized to unit L2 norm after every epoch.
TransEModel train_toy_transe(const ToyKg &kg, const TransEConfig &cfg);

// Fraction of triples whose true tail is ranked first among all entities
// by transe_score (ties count against the true tail).
double hits_at_1(const TransEModel &model, const ToyKg &kg);

// Mean-centers and projects onto the top `target_dim` principal components
// of the (1/n) covariance matrix, in descending eigenvalue order.
KgEmbeddingTable pca_project(const KgEmbeddingTable &table, int target_dim);

}  // namespace ki

#endif  // KI_KG_STORE_H_
