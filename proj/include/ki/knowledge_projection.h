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

#ifndef KI_KNOWLEDGE_PROJECTION_H_
#define KI_KNOWLEDGE_PROJECTION_H_

#include <cstdint>

#include "ki/types.h"

namespace ki {

// Two-layer map from KG-embedding space to the encoder space:
//   w = tanh(W2 * relu(W1 * wk + b1) + b2)
// One head per entity type; heads share no parameters.
struct ProjectionHead {
  Mat w1;  // hidden_dim x kg_dim
  Vec b1;  // hidden_dim
  Mat w2;  // model_dim x hidden_dim
  Vec b2;  // model_dim
  EntityType etype = EntityType::kConceptual;

  int kg_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }
  int model_dim() const { return static_cast<int>(w2.rows()); }
  bool empty() const { return w1.size() == 0; }
};

// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); biases zero.
ProjectionHead init_projection(int kg_dim, int hidden_dim, int model_dim,
                               EntityType etype, uint64_t seed);

// Throws DimensionError if wk does not have kg_dim components.
Vec project(const ProjectionHead &head, const Vec &wk);

// Intermediate values of one projection, kept for the backward pass.
struct ProjectionTrace {
  Vec input;
  Vec hidden_pre;  // W1 * wk + b1
  Vec out;         // tanh(...)
};

Vec project(const ProjectionHead &head, const Vec &wk, ProjectionTrace *trace);

// Accumulates d(loss)/d(params) into `grad` (same shapes as the head) and
// returns d(loss)/d(wk), given d(loss)/d(output).
Vec project_backward(const ProjectionHead &head, const ProjectionTrace &trace,
                     const Vec &grad_out, ProjectionHead &grad);

// `wk` followed by `external`.
Vec concat_external(const Vec &wk, const Vec &external);

}  // namespace ki

#endif  // KI_KNOWLEDGE_PROJECTION_H_
