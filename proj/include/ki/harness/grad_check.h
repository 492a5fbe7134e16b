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

#ifndef KI_HARNESS_GRAD_CHECK_H_
#define KI_HARNESS_GRAD_CHECK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ki/encoder.h"

namespace ki {

struct GradCheckGroup {
  std::string name;
  int checked = 0;  // entries with |analytic| above the floor
  double max_relative_error = 0;
  // Largest |numeric - analytic| among sampled entries below the floor.
  double max_abs_error_small = 0;
};

// Central differences of the mean batch loss against grad(), for up to
// `samples` random entries per parameter group (projection heads, token
// type 2, attention weights, classifier, everything). Relative error is
// |a - n| / max(|a|, |n|) over entries with |a| >= floor.
std::vector<GradCheckGroup> gradient_check(ModelParams params, const ModelConfig &config,
                                           std::span<const Example> batch,
                                           const KgTables &tables, int samples, uint64_t seed,
                                           double step = 1e-5, double floor = 1e-6);

nlohmann::json to_json(const std::vector<GradCheckGroup> &groups);

}  // namespace ki

#endif  // KI_HARNESS_GRAD_CHECK_H_
