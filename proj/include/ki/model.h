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

#ifndef KI_MODEL_H_
#define KI_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "ki/input_encoding.h"
#include "ki/knowledge_projection.h"
#include "ki/types.h"

namespace ki {

// How entity slots obtain their input vector.
enum class ProjectionMode {
  kLearned,  // per-type projection heads
  kPca,      // pre-reduced lexicon vectors, zero-padded to model_dim
  kNone,     // entities are ignored; the model is a plain encoder
};

const char *projection_mode_name(ProjectionMode mode);
ProjectionMode parse_projection_mode(const std::string &name);

struct ModelConfig {
  int model_dim = 64;
  int num_layers = 2;
  int num_heads = 4;
  int ffn_dim = 128;
  int vocab_size = 0;
  int num_token_types = 3;
  int max_positions = 128;
  int num_classes = 2;
  double dropout_rate = 0.0;

  bool use_selective_attention = true;
  bool use_entity_token_types = true;
  bool use_position_alignment = true;
  ProjectionMode projection_mode = ProjectionMode::kLearned;

  // Input widths of the two projection heads; 0 disables a head.
  int conceptual_kg_dim = 0;
  int ambiguous_kg_dim = 0;
  // 0 means model_dim.
  int projection_hidden_dim = 0;
  // When false, projection biases stay zero and receive no updates.
  bool projection_biases = true;
  bool use_ent_unk = true;

  uint64_t seed = 1;

  // Throws ConfigError.
  void validate() const;
  int head_dim() const { return model_dim / num_heads; }
  int hidden_dim() const {
    return projection_hidden_dim > 0 ? projection_hidden_dim : model_dim;
  }
  bool uses_entities() const { return projection_mode != ProjectionMode::kNone; }
  EncodingOptions encoding_options() const;

  nlohmann::json to_json() const;
  // Unknown keys are errors.
  static ModelConfig from_json(const nlohmann::json &j);

  bool operator==(const ModelConfig &) const = default;
};

struct LayerParams {
  Mat wq, wk, wv, wo;  // model_dim x model_dim, applied as X * W
  Vec bq, bk, bv, bo;
  Vec ln1_gamma, ln1_beta;
  Mat ffn_w1;  // model_dim x ffn_dim
  Vec ffn_b1;
  Mat ffn_w2;  // ffn_dim x model_dim
  Vec ffn_b2;
  Vec ln2_gamma, ln2_beta;
};

// Named view of one parameter tensor (column-major storage).
struct TensorView {
  std::string name;
  double *data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;

  Eigen::Index size() const { return rows * cols; }
};

struct ModelParams {
  Mat token_embedding;       // vocab_size x model_dim
  Mat token_type_embedding;  // num_token_types x model_dim
  Mat position_embedding;    // max_positions x model_dim
  std::vector<LayerParams> layers;
  // Present only in learned projection mode.
  ProjectionHead conceptual_head;
  ProjectionHead ambiguous_head;
  Vec ent_unk;
  Mat classifier_w;  // model_dim x num_classes
  Vec classifier_b;

  // Deterministic per config.seed; each tensor draws from its own stream
  // keyed by name, so variants that differ only in entity machinery share
  // identical token-path initial values.
  static ModelParams init(const ModelConfig &config);
  // Same shapes, all zeros.
  ModelParams zeros_like() const;

  // Declaration order; empty tensors are omitted.
  std::vector<TensorView> tensors();
  std::vector<TensorView> tensors() const;
  size_t num_parameters() const;

  bool all_finite() const;
  bool operator==(const ModelParams &other) const;
};

// Header: little-endian u64 length + canonical config JSON. Body: for every
// tensor in declaration order, u64 rows, u64 cols, then rows*cols
// little-endian doubles in row-major order.
void save_checkpoint(const std::filesystem::path &path, const ModelConfig &config,
                     const ModelParams &params);
std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path &path);

}  // namespace ki

#endif  // KI_MODEL_H_
