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

#include "ki/knowledge_projection.h"

#include <cmath>
#include <random>

#include "ki/errors.h"

namespace ki {

namespace {

Mat uniform_matrix(int rows, int cols, double bound, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(-bound, bound);
  Mat m(rows, cols);
  // Row-major fill so the draw order does not depend on storage order.
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
  }
  return m;
}

}  // namespace

ProjectionHead init_projection(int kg_dim, int hidden_dim, int model_dim,
                               EntityType etype, uint64_t seed) {
  if (kg_dim <= 0 || hidden_dim <= 0 || model_dim <= 0) {
    throw DimensionError("projection dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  ProjectionHead head;
  head.etype = etype;
  head.w1 = uniform_matrix(hidden_dim, kg_dim, 1.0 / std::sqrt(kg_dim), rng);
  head.b1 = Vec::Zero(hidden_dim);
  head.w2 = uniform_matrix(model_dim, hidden_dim, 1.0 / std::sqrt(hidden_dim), rng);
  head.b2 = Vec::Zero(model_dim);
  return head;
}

Vec project(const ProjectionHead &head, const Vec &wk) {
  return project(head, wk, nullptr);
}

Vec project(const ProjectionHead &head, const Vec &wk, ProjectionTrace *trace) {
  if (wk.size() != head.kg_dim()) {
    throw DimensionError("projection expects " + std::to_string(head.kg_dim()) +
                         " input components, got " + std::to_string(wk.size()));
  }
  Vec pre = head.w1 * wk + head.b1;
  Vec out = (head.w2 * pre.cwiseMax(0.0) + head.b2).array().tanh().matrix();
  if (trace != nullptr) {
    trace->input = wk;
    trace->hidden_pre = std::move(pre);
    trace->out = out;
  }
  return out;
}

Vec project_backward(const ProjectionHead &head, const ProjectionTrace &trace,
                     const Vec &grad_out, ProjectionHead &grad) {
  // d tanh(z) = 1 - tanh^2
  Vec dz = grad_out.array() * (1.0 - trace.out.array().square());
  Vec hidden = trace.hidden_pre.cwiseMax(0.0);
  grad.w2.noalias() += dz * hidden.transpose();
  grad.b2 += dz;
  Vec dhidden = head.w2.transpose() * dz;
  Vec dpre = dhidden;
  for (Eigen::Index i = 0; i < dpre.size(); ++i) {
    if (trace.hidden_pre[i] <= 0) dpre[i] = 0;
  }
  grad.w1.noalias() += dpre * trace.input.transpose();
  grad.b1 += dpre;
  return head.w1.transpose() * dpre;
}

Vec concat_external(const Vec &wk, const Vec &external) {
  Vec out(wk.size() + external.size());
  out.head(wk.size()) = wk;
  out.tail(external.size()) = external;
  return out;
}

}  // namespace ki
