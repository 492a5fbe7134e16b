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

#ifndef KI_TYPES_H_
#define KI_TYPES_H_

#include <Eigen/Core>

namespace ki {

// All numerics run in 64-bit floating point.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class EntityType : int { kConceptual = 1, kAmbiguous = 2 };

inline const char *entity_type_name(EntityType t) {
  return t == EntityType::kConceptual ? "conceptual" : "ambiguous";
}

}  // namespace ki

#endif  // KI_TYPES_H_
