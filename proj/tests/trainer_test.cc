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

#include <random>

#include "doctest.h"
#include "encoder_fixture.h"
#include "ki/errors.h"
#include "ki/trainer.h"

namespace ki {
namespace {

// Label is 1 iff sentence 1 starts with t1.
std::vector<Example> separable(const testing::EncoderFixture &fx, int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> tok(3, 12);
  std::vector<Example> out;
  for (int i = 0; i < n; ++i) {
    testing::RandomRecord r;
    const int label = i % 2;
    r.s1 = {label ? "t1" : "t2", "t" + std::to_string(tok(rng))};
    r.s2 = {"t" + std::to_string(tok(rng)), "t" + std::to_string(tok(rng))};
    out.push_back({fx.encode(r), label});
  }
  return out;
}

TEST_CASE("separable toy set reaches full training accuracy") {
  testing::EncoderFixture fx(1);
  auto data = separable(fx, 40, 1);
  OptimizerConfig opt;
  opt.learning_rate = 1e-2;
  opt.batch_size = 8;
  opt.epochs = 40;  // 200 steps
  TrainResult res = train(ModelParams::init(fx.config), fx.config, data, fx.tables(), opt);
  CHECK(res.epoch_loss.size() == 40);
  CHECK(accuracy(res.params, fx.config, data, fx.tables()) == 1.0);
  CHECK(res.epoch_loss.back() < res.epoch_loss.front());
}

TEST_CASE("zero learning rate leaves parameters bitwise unchanged") {
  testing::EncoderFixture fx(2);
  auto data = separable(fx, 16, 2);
  OptimizerConfig opt;
  opt.learning_rate = 0;
  opt.epochs = 3;
  opt.batch_size = 4;
  ModelParams init = ModelParams::init(fx.config);
  CHECK(train(init, fx.config, data, fx.tables(), opt).params == init);
}

TEST_CASE("same seed gives identical histories") {
  testing::EncoderFixture fx(3);
  auto data = separable(fx, 24, 3);
  OptimizerConfig opt;
  opt.epochs = 4;
  opt.batch_size = 5;
  opt.seed = 17;
  ModelParams init = ModelParams::init(fx.config);
  TrainResult a = train(init, fx.config, data, fx.tables(), opt);
  TrainResult b = train(init, fx.config, data, fx.tables(), opt);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.params == b.params);
  opt.seed = 18;
  CHECK(train(init, fx.config, data, fx.tables(), opt).epoch_loss != a.epoch_loss);
}

TEST_CASE("dropout is training-only and seeded") {
  testing::EncoderFixture fx(4);
  fx.config.dropout_rate = 0.2;
  auto data = separable(fx, 8, 4);
  ModelParams init = ModelParams::init(fx.config);
  Vec a = forward(init, fx.config, data[0].input, fx.tables()).logits;
  Vec b = forward(init, fx.config, data[0].input, fx.tables()).logits;
  CHECK(a == b);
  ForwardOptions train_mode;
  train_mode.training = true;
  train_mode.dropout_seed = 9;
  Vec c = forward(init, fx.config, data[0].input, fx.tables(), train_mode).logits;
  Vec d = forward(init, fx.config, data[0].input, fx.tables(), train_mode).logits;
  CHECK(c == d);
  CHECK(c != a);
}

TEST_CASE("optimizer config validation and divergence") {
  OptimizerConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.learning_rate = -1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  testing::EncoderFixture fx(5);
  auto data = separable(fx, 8, 5);
  OptimizerConfig wild;
  wild.learning_rate = 1e6;
  wild.epochs = 50;
  wild.batch_size = 8;
  CHECK_THROWS_AS(train(ModelParams::init(fx.config), fx.config, data, fx.tables(), wild),
                  TrainingError);
  CHECK_THROWS_AS(train(ModelParams::init(fx.config), fx.config, {}, fx.tables(), {}),
                  ConfigError);
}

TEST_CASE("adam matches a hand-computed first step") {
  testing::EncoderFixture fx(6);
  ModelParams p = ModelParams::init(fx.config);
  ModelParams g = p.zeros_like();
  g.classifier_b[0] = 0.5;
  g.classifier_b[1] = -2.0;
  OptimizerConfig cfg;
  cfg.learning_rate = 0.1;
  Adam adam(p, cfg);
  const Vec before = p.classifier_b;
  adam.step(p, g);
  // With bias correction the first step is lr * g / (|g| + eps').
  CHECK(p.classifier_b[0] == doctest::Approx(before[0] - 0.1 * 0.5 / (0.5 + 1e-8)));
  CHECK(p.classifier_b[1] == doctest::Approx(before[1] + 0.1 * 2.0 / (2.0 + 1e-8)));
  CHECK(p.classifier_w == ModelParams::init(fx.config).classifier_w);
}

}  // namespace
}  // namespace ki
