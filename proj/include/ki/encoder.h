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

#ifndef KI_ENCODER_H_
#define KI_ENCODER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "ki/input_encoding.h"
#include "ki/model.h"
#include "ki/types.h"

namespace ki {

struct ForwardOptions {
  // Enables dropout (when config.dropout_rate > 0).
  bool training = false;
  uint64_t dropout_seed = 0;
  // Replaces the selective-attention bias for every layer and head.
  const Mat *bias_override = nullptr;
  // Fill ForwardResult::attention with per-layer, per-head probabilities.
  bool keep_attention = false;
};

struct ForwardResult {
  Vec logits;
  // One row per sequence position used by the model.
  Mat final_states;
  // attention[layer * num_heads + head], when requested.
  std::vector<Mat> attention;
};

// Sequence positions the model consumes: the whole input when entities are
// enabled, only the m+3 token positions otherwise.
int model_seq_len(const ModelConfig &config, const EncodedInput &encoded);

// Input rows: token + token-type + position embeddings; entity rows use the
// projected (or PCA) KG vector in place of the token embedding. Post-norm
// encoder layers with the selective-attention bias; logits from [CLS].
// Throws ConfigError when an entity type present in the input has no table.
ForwardResult forward(const ModelParams &params, const ModelConfig &config,
                      const EncodedInput &encoded, const KgTables &tables,
                      const ForwardOptions &options = {});

// -log softmax(logits)[label]
double loss(const Vec &logits, int label);
Vec softmax(const Vec &logits);

struct Example {
  EncodedInput input;
  int label = 0;
};

struct GradientResult {
  ModelParams gradient;  // same shapes as the parameters
  double loss = 0;       // mean over the batch
};

// Exact gradient of the mean batch loss. Records are processed in order and
// summed in that order. Throws NumericError naming the record index on a
// non-finite loss.
GradientResult grad(const ModelParams &params, const ModelConfig &config,
                    std::span<const Example> batch, const KgTables &tables,
                    const ForwardOptions &options = {});

// Mean loss only.
double batch_loss(const ModelParams &params, const ModelConfig &config,
                  std::span<const Example> batch, const KgTables &tables);

std::vector<double> predict_proba(const ModelParams &params, const ModelConfig &config,
                                  const EncodedInput &encoded, const KgTables &tables);

double accuracy(const ModelParams &params, const ModelConfig &config,
                std::span<const Example> examples, const KgTables &tables);

}  // namespace ki

#endif  // KI_ENCODER_H_
