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

#include "ki/harness/json_util.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace ki {

double round_sig9(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return std::strtod(buf, nullptr);
}

nlohmann::json round_floats(const nlohmann::json &j) {
  if (j.is_number_float()) return round_sig9(j.get<double>());
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto &v : j) out.push_back(round_floats(v));
    return out;
  }
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = round_floats(it.value());
    return out;
  }
  return j;
}

}  // namespace ki
