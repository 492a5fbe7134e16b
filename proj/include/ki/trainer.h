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

#ifndef KI_TRAINER_H_
#define KI_TRAINER_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ki/encoder.h"
#include "ki/model.h"

namespace ki {

struct OptimizerConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 10;
  int batch_size = 16;
  // Controls the per-epoch shuffle and dropout streams.
  uint64_t seed = 1;

  void validate() const;
};

// Adaptive moment estimation with bias correction, no weight decay.
class Adam {
 public:
  Adam(const ModelParams &shape, const OptimizerConfig &cfg);
  void step(ModelParams &params, const ModelParams &gradient);
  int steps() const { return step_; }

 private:
  OptimizerConfig cfg_;
  ModelParams m_, v_;
  int step_ = 0;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_loss;  // mean batch loss per epoch
};

// Called after every epoch with (epoch index, mean loss).
using EpochCallback = std::function<void(int, double)>;

// Mini-batch training over a per-epoch shuffle drawn from cfg.seed. Throws
// TrainingError when a batch loss exceeds 1e4.
TrainResult train(ModelParams params, const ModelConfig &config,
                  std::span<const Example> dataset, const KgTables &tables,
                  const OptimizerConfig &cfg, const EpochCallback &on_epoch = {});

}  // namespace ki

#endif  // KI_TRAINER_H_
