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

#include "ki/harness/grad_check.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace ki {

namespace {

using Filter = std::function<bool(const TensorView &, Eigen::Index)>;

bool starts_with(const std::string &s, const char *p) { return s.rfind(p, 0) == 0; }

}  // namespace

std::vector<GradCheckGroup> gradient_check(ModelParams params, const ModelConfig &config,
                                           std::span<const Example> batch,
                                           const KgTables &tables, int samples, uint64_t seed,
                                           double step, double floor) {
  const GradientResult g = grad(params, config, batch, tables);
  const std::vector<std::pair<std::string, Filter>> groups = {
      {"projection_heads",
       [](const TensorView &v, Eigen::Index) {
         return starts_with(v.name, "conceptual_head") || starts_with(v.name, "ambiguous_head");
       }},
      {"token_type_2",
       [](const TensorView &v, Eigen::Index i) {
         return v.name == "token_type_embedding" && i % v.rows == 2;
       }},
      {"attention",
       [](const TensorView &v, Eigen::Index) {
         const auto dot = v.name.find('.');
         if (!starts_with(v.name, "layer") || dot == std::string::npos) return false;
         const std::string leaf = v.name.substr(dot + 1);
         return leaf == "wq" || leaf == "wk" || leaf == "wv" || leaf == "wo";
       }},
      {"classifier", [](const TensorView &v, Eigen::Index) { return starts_with(v.name, "classifier"); }},
      {"all", [](const TensorView &, Eigen::Index) { return true; }},
  };

  std::mt19937_64 rng(seed);
  auto views = params.tensors();
  auto grads = g.gradient.tensors();
  std::vector<GradCheckGroup> out;
  for (const auto &[name, accept] : groups) {
    std::vector<std::pair<double *, double>> big, small;
    for (size_t t = 0; t < views.size(); ++t) {
      for (Eigen::Index i = 0; i < views[t].size(); ++i) {
        if (!accept(views[t], i)) continue;
        const double a = grads[t].data[i];
        (std::abs(a) >= floor ? big : small).push_back({views[t].data + i, a});
      }
    }
    std::shuffle(big.begin(), big.end(), rng);
    std::shuffle(small.begin(), small.end(), rng);
    auto numeric = [&](double *entry) {
      const double saved = *entry;
      *entry = saved + step;
      const double up = batch_loss(params, config, batch, tables);
      *entry = saved - step;
      const double down = batch_loss(params, config, batch, tables);
      *entry = saved;
      return (up - down) / (2 * step);
    };
    GradCheckGroup res{name, 0, 0, 0};
    for (size_t i = 0; i < big.size() && res.checked < samples; ++i) {
      const double n = numeric(big[i].first);
      const double a = big[i].second;
      const double rel = std::abs(a - n) / std::max(std::abs(a), std::abs(n));
      res.max_relative_error = std::max(res.max_relative_error, rel);
      ++res.checked;
    }
    for (size_t i = 0; i < small.size() && i < 5; ++i) {
      res.max_abs_error_small =
          std::max(res.max_abs_error_small, std::abs(numeric(small[i].first) - small[i].second));
    }
    out.push_back(res);
  }
  return out;
}

nlohmann::json to_json(const std::vector<GradCheckGroup> &groups) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto &g : groups) {
    j.push_back({{"group", g.name},
                 {"checked", g.checked},
                 {"max_relative_error", g.max_relative_error},
                 {"max_abs_error_small", g.max_abs_error_small}});
  }
  return j;
}

}  // namespace ki
