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

#include "ki/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ki/errors.h"

namespace ki {

namespace {
constexpr double kDivergenceLoss = 1e4;
}  // namespace

void OptimizerConfig::validate() const {
  if (learning_rate < 0) throw ConfigError("learning_rate must be non-negative");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (eps <= 0) throw ConfigError("eps must be positive");
  if (epochs <= 0 || batch_size <= 0) {
    throw ConfigError("epochs and batch_size must be positive");
  }
}

Adam::Adam(const ModelParams &shape, const OptimizerConfig &cfg)
    : cfg_(cfg), m_(shape.zeros_like()), v_(shape.zeros_like()) {}

void Adam::step(ModelParams &params, const ModelParams &gradient) {
  ++step_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, step_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, step_);
  auto p = params.tensors();
  auto g = gradient.tensors();
  auto m = m_.tensors();
  auto v = v_.tensors();
  for (size_t t = 0; t < p.size(); ++t) {
    for (Eigen::Index i = 0; i < p[t].size(); ++i) {
      const double gi = g[t].data[i];
      m[t].data[i] = cfg_.beta1 * m[t].data[i] + (1.0 - cfg_.beta1) * gi;
      v[t].data[i] = cfg_.beta2 * v[t].data[i] + (1.0 - cfg_.beta2) * gi * gi;
      const double mhat = m[t].data[i] / c1;
      const double vhat = v[t].data[i] / c2;
      p[t].data[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

TrainResult train(ModelParams params, const ModelConfig &config,
                  std::span<const Example> dataset, const KgTables &tables,
                  const OptimizerConfig &cfg, const EpochCallback &on_epoch) {
  cfg.validate();
  if (dataset.empty()) throw ConfigError("training set is empty");

  Adam adam(params, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::vector<size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  std::vector<Example> batch;
  uint64_t dropout_stream = cfg.seed * 0x9e3779b97f4a7c15ull;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    int batches = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
      ForwardOptions opts;
      opts.training = true;
      opts.dropout_seed = dropout_stream;
      dropout_stream += batch.size();
      GradientResult g = grad(params, config, batch, tables, opts);
      if (!(g.loss <= kDivergenceLoss)) {
        throw TrainingError("training diverged at epoch " + std::to_string(epoch) +
                            " (batch loss " + std::to_string(g.loss) + ")");
      }
      adam.step(params, g.gradient);
      total += g.loss;
      ++batches;
    }
    const double mean = total / batches;
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  result.params = std::move(params);
  return result;
}

}  // namespace ki
