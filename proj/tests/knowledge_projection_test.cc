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

#include <cmath>
#include <random>

#include "doctest.h"
#include "ki/errors.h"
#include "ki/knowledge_projection.h"
#include "test_util.h"

namespace ki {
namespace {

TEST_CASE("zero input with zero biases projects to zero") {
  ProjectionHead h = init_projection(4, 3, 5, EntityType::kConceptual, 1);
  CHECK(project(h, Vec::Zero(4)).isZero());
}

TEST_CASE("identity weights") {
  ProjectionHead h;
  h.w1 = Mat::Identity(2, 2);
  h.b1 = Vec::Zero(2);
  h.w2 = Mat::Identity(2, 2);
  h.b2 = Vec::Zero(2);
  Vec out = project(h, Vec{{1.0, -1.0}});
  CHECK(out[0] == doctest::Approx(std::tanh(1.0)).epsilon(1e-15));
  CHECK(out[0] == doctest::Approx(0.76159).epsilon(1e-5));
  CHECK(out[1] == 0.0);
}

TEST_CASE("outputs stay strictly inside (-1, 1)") {
  std::mt19937_64 rng(8);
  ProjectionHead h = init_projection(6, 5, 4, EntityType::kAmbiguous, 2);
  for (int trial = 0; trial < 200; ++trial) {
    Vec out = project(h, testing::random_vec(6, rng, trial < 100 ? 1.0 : 5.0));
    CHECK(out.cwiseAbs().maxCoeff() < 1.0);
  }
  CHECK_THROWS_AS(project(h, Vec::Zero(5)), DimensionError);
}

TEST_CASE("init is deterministic and unbiased") {
  ProjectionHead a = init_projection(3, 4, 5, EntityType::kConceptual, 77);
  ProjectionHead b = init_projection(3, 4, 5, EntityType::kConceptual, 77);
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.b1.isZero());
  CHECK(a.b2.isZero());
  CHECK(a.w1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(3.0));

  ProjectionHead thin = init_projection(3, 1, 5, EntityType::kConceptual, 1);
  CHECK(thin.hidden_dim() == 1);
  CHECK(project(thin, Vec::Ones(3)).size() == 5);

  // 10k draws from U(-1/10, 1/10): standard error of the mean is
  // (0.1 / sqrt(3)) / 100.
  ProjectionHead big = init_projection(100, 100, 2, EntityType::kConceptual, 5);
  const double se = (0.1 / std::sqrt(3.0)) / 100.0;
  CHECK(std::abs(big.w1.mean()) < 3 * se);
}

TEST_CASE("concat_external") {
  CHECK(concat_external(Vec{{1.0, 2.0}}, Vec{{3.0}}) == Vec{{1.0, 2.0, 3.0}});
  CHECK(concat_external(Vec{{1.0, 2.0}}, Vec()) == Vec{{1.0, 2.0}});
  CHECK(concat_external(Vec(), Vec()).size() == 0);
}

// loss = c . project(wk)
double probe(const ProjectionHead &h, const Vec &wk, const Vec &c) {
  return c.dot(project(h, wk));
}

TEST_CASE("project_backward matches central differences") {
  std::mt19937_64 rng(31);
  const double step = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    ProjectionHead h = init_projection(5, 4, 3, EntityType::kConceptual, 100 + trial);
    h.b1 = testing::random_vec(4, rng, 0.3);
    h.b2 = testing::random_vec(3, rng, 0.3);
    Vec wk = testing::random_vec(5, rng);
    Vec c = testing::random_vec(3, rng);

    ProjectionTrace tr;
    project(h, wk, &tr);
    ProjectionHead g{Mat::Zero(4, 5), Vec::Zero(4), Mat::Zero(3, 4), Vec::Zero(3),
                     EntityType::kConceptual};
    Vec gwk = project_backward(h, tr, c, g);

    auto check = [&](double &param, double analytic) {
      const double saved = param;
      param = saved + step;
      const double up = probe(h, wk, c);
      param = saved - step;
      const double down = probe(h, wk, c);
      param = saved;
      const double numeric = (up - down) / (2 * step);
      if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-8) return;
      CHECK(testing::relative_error(analytic, numeric) < 1e-5);
    };
    for (int i = 0; i < h.w1.size(); ++i) check(h.w1.data()[i], g.w1.data()[i]);
    for (int i = 0; i < h.b1.size(); ++i) check(h.b1[i], g.b1[i]);
    for (int i = 0; i < h.w2.size(); ++i) check(h.w2.data()[i], g.w2.data()[i]);
    for (int i = 0; i < h.b2.size(); ++i) check(h.b2[i], g.b2[i]);
    for (int i = 0; i < wk.size(); ++i) check(wk[i], gwk[i]);
  }
}

}  // namespace
}  // namespace ki
