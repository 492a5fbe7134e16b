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

#include <fstream>
#include <numeric>
#include <random>

#include "doctest.h"
#include "ki/errors.h"
#include "ki/kg_store.h"
#include "test_util.h"

namespace ki {
namespace {

void write_file(const std::filesystem::path &p, const std::string &text) {
  std::ofstream(p, std::ios::binary) << text;
}

std::string read_file(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

ToyKg six_entity_kg() {
  return testing::two_cluster_kg();
}

TEST_CASE("normalize_entity lowercases and joins words with underscores") {
  CHECK(normalize_entity("World  War II") == "world_war_ii");
  CHECK(normalize_entity("  solar\tenergy ") == "solar_energy");
  CHECK(normalize_entity("greenhouse_effect") == "greenhouse_effect");
  CHECK(normalize_entity("") == "");
}

TEST_CASE("load_lexicon parses rows") {
  auto dir = testing::scratch_dir("lexicon");
  write_file(dir / "kg.tsv", "greenhouse_effect\t0.1 0.2\nsolar_energy\t0.3 0.4\n");
  KgEmbeddingTable t = load_lexicon(dir / "kg.tsv");
  CHECK(t.dim() == 2);
  CHECK(t.size() == 2);
  CHECK(t.graph_name() == "kg");
  REQUIRE(t.find("solar energy") != nullptr);
  CHECK((*t.find("Solar Energy"))[1] == doctest::Approx(0.4));
  CHECK(t.find("wind") == nullptr);
}

TEST_CASE("load_lexicon on an empty file") {
  auto dir = testing::scratch_dir("lexicon_empty");
  write_file(dir / "empty.tsv", "");
  KgEmbeddingTable t = load_lexicon(dir / "empty.tsv", 4);
  CHECK(t.dim() == 4);
  CHECK(t.empty());
  CHECK_THROWS_AS(load_lexicon(dir / "empty.tsv"), DimensionError);
}

TEST_CASE("load_lexicon reports errors with line numbers") {
  auto dir = testing::scratch_dir("lexicon_bad");
  write_file(dir / "dims.tsv", "x\t0.1 0.2\ny\t0.1\n");
  try {
    load_lexicon(dir / "dims.tsv");
    FAIL("expected DimensionError");
  } catch (const DimensionError &e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  write_file(dir / "cols.tsv", "x\t0.1\ty\n");
  CHECK_THROWS_AS(load_lexicon(dir / "cols.tsv"), ParseError);
  write_file(dir / "nan.tsv", "x\t0.1 abc\n");
  try {
    load_lexicon(dir / "nan.tsv");
    FAIL("expected ParseError");
  } catch (const ParseError &e) {
    CHECK(std::string(e.what()).find(":1") != std::string::npos);
  }
  write_file(dir / "expected.tsv", "x\t0.1 0.2\n");
  CHECK_THROWS_AS(load_lexicon(dir / "expected.tsv", 3), DimensionError);
}

TEST_CASE("save_lexicon round-trips 9-digit files byte for byte") {
  auto dir = testing::scratch_dir("lexicon_rt");
  const std::string text =
      "greenhouse_effect\t0.123456789 -1.5 3e-05\nsolar_energy\t1 0 -0.333333333\n";
  write_file(dir / "in.tsv", text);
  save_lexicon(load_lexicon(dir / "in.tsv"), dir / "out.tsv");
  CHECK(read_file(dir / "out.tsv") == text);
  CHECK(load_lexicon(dir / "out.tsv", std::nullopt, "in") == load_lexicon(dir / "in.tsv"));
}

TEST_CASE("table invariants") {
  KgEmbeddingTable t("g", 2);
  t.insert("a", Vec::Ones(2));
  CHECK_THROWS_AS(t.insert("A", Vec::Ones(2)), ConfigError);
  CHECK_THROWS_AS(t.insert("b", Vec::Ones(3)), DimensionError);
  Vec bad(2);
  bad << 1, std::nan("");
  CHECK_THROWS_AS(t.insert("c", bad), NumericError);
}

TEST_CASE("transe_score examples") {
  auto v = [](double a, double b) { return Vec{{a, b}}; };
  CHECK(transe_score(v(1, 0), v(0, 1), v(1, 1)) == 0.0);
  CHECK(transe_score(v(0, 0), v(0, 0), v(1, 1)) == doctest::Approx(std::sqrt(2.0)));
  CHECK(transe_score(v(2, 3), v(-1, 0), v(0, 0)) == doctest::Approx(std::sqrt(10.0)));
  CHECK_THROWS_AS(transe_score(v(1, 0), Vec::Zero(3), v(0, 0)), DimensionError);
}

TEST_CASE("transe_score is invariant under a shared component permutation") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Vec h = testing::random_vec(6, rng), r = testing::random_vec(6, rng),
        t = testing::random_vec(6, rng);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Vec hp(6), rp(6), tp(6);
    for (int i = 0; i < 6; ++i) {
      hp[i] = h[perm[i]];
      rp[i] = r[perm[i]];
      tp[i] = t[perm[i]];
    }
    CHECK(transe_score(hp, rp, tp) == doctest::Approx(transe_score(h, r, t)).epsilon(1e-14));
  }
}

TEST_CASE("ToyKg validation") {
  ToyKg kg = six_entity_kg();
  CHECK_NOTHROW(kg.validate());
  kg.triples.push_back({0, 0, 1});
  CHECK_THROWS_AS(kg.validate(), ConfigError);
  kg.triples.back() = {0, 5, 1};
  CHECK_THROWS_AS(kg.validate(), ConfigError);

  ToyKg empty;
  empty.entities = {"a", "b"};
  empty.relations = {"r"};
  CHECK_THROWS_AS(train_toy_transe(empty, TransEConfig{}), ConfigError);

  TransEConfig bad;
  bad.margin = 0;
  CHECK_THROWS_AS(train_toy_transe(six_entity_kg(), bad), ConfigError);
}

TEST_CASE("TransE separates positives from corruptions on a 3-cycle") {
  ToyKg kg;
  kg.entities = {"a", "b", "c"};
  kg.relations = {"r"};
  kg.triples = {{0, 0, 1}, {1, 0, 2}, {2, 0, 0}};
  TransEConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 500;
  cfg.seed = 3;
  TransEModel m = train_toy_transe(kg, cfg);
  CHECK(m.entities.dim() == 8);

  // Corruptions: every head or tail replacement that is not itself a fact.
  double pos = 0, neg = 0;
  int npos = 0, nneg = 0;
  for (const Triple &t : kg.triples) {
    const Vec &r = m.relations[t.relation];
    pos += transe_score(m.entities.vector(t.head), r, m.entities.vector(t.tail));
    ++npos;
    for (int e = 0; e < 3; ++e) {
      for (Triple c : {Triple{e, t.relation, t.tail}, Triple{t.head, t.relation, e}}) {
        if (std::find(kg.triples.begin(), kg.triples.end(), c) != kg.triples.end()) continue;
        neg += transe_score(m.entities.vector(c.head), r, m.entities.vector(c.tail));
        ++nneg;
      }
    }
  }
  CHECK(pos / npos < neg / nneg);
}

TEST_CASE("TransE is deterministic per seed and keeps unit norms") {
  TransEConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 50;
  TransEModel a = train_toy_transe(six_entity_kg(), cfg);
  TransEModel b = train_toy_transe(six_entity_kg(), cfg);
  CHECK(a.entities == b.entities);
  CHECK(a.epoch_loss == b.epoch_loss);
  for (size_t i = 0; i < a.entities.size(); ++i) {
    CHECK(a.entities.vector(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  cfg.seed = 99;
  CHECK_FALSE(train_toy_transe(six_entity_kg(), cfg).entities == a.entities);
}

TEST_CASE("TransE link prediction on the two-cluster fixture") {
  TransEConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 500;
  TransEModel m = train_toy_transe(six_entity_kg(), cfg);
  CHECK(hits_at_1(m, six_entity_kg()) >= 0.5);
  CHECK(testing::window_means_non_increasing(m.epoch_loss, 50));
}

TEST_CASE("pca_project on collinear points preserves distances") {
  KgEmbeddingTable t("g", 2);
  t.insert("a", Vec{{1.0, 0.0}});
  t.insert("b", Vec{{2.0, 0.0}});
  t.insert("c", Vec{{3.0, 0.0}});
  KgEmbeddingTable p = pca_project(t, 1);
  CHECK(p.dim() == 1);
  for (size_t i = 0; i < 3; ++i) {
    for (size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(p.vector(i)[0] - p.vector(j)[0]) ==
            doctest::Approx((t.vector(i) - t.vector(j)).norm()).epsilon(1e-12));
    }
  }
}

TEST_CASE("pca_project at full rank is a rotation") {
  std::mt19937_64 rng(11);
  KgEmbeddingTable t("g", 5);
  for (int i = 0; i < 12; ++i) t.insert("e" + std::to_string(i), testing::random_vec(5, rng));
  KgEmbeddingTable p = pca_project(t, 5);
  for (size_t i = 0; i < t.size(); ++i) {
    for (size_t j = 0; j < t.size(); ++j) {
      CHECK(std::abs((p.vector(i) - p.vector(j)).norm() - (t.vector(i) - t.vector(j)).norm()) <
            1e-9);
    }
  }
}

TEST_CASE("pca_project reconstruction error equals discarded eigenvalues") {
  std::mt19937_64 rng(5);
  KgEmbeddingTable t("g", 8);
  for (int i = 0; i < 10; ++i) t.insert("e" + std::to_string(i), testing::random_vec(8, rng));
  KgEmbeddingTable p = pca_project(t, 2);

  Mat x = t.as_matrix();
  x.rowwise() -= x.colwise().mean();
  const double n = static_cast<double>(t.size());
  std::vector<double> ev = testing::jacobi_eigenvalues(x.transpose() * x / n);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  const double discarded = std::accumulate(ev.begin() + 2, ev.end(), 0.0);

  // For an orthonormal basis, ||X - Y B^T||^2 = ||X||^2 - ||Y||^2.
  const double reconstruction = (x.squaredNorm() - p.as_matrix().squaredNorm()) / n;
  CHECK(std::abs(reconstruction - discarded) < 1e-6);
  CHECK(p.as_matrix().squaredNorm() <= x.squaredNorm() + 1e-9);
}

TEST_CASE("pca component variances are non-increasing") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    KgEmbeddingTable t("g", 6);
    for (int i = 0; i < 15; ++i) {
      Vec v = testing::random_vec(6, rng);
      v[trial % 6] *= 4.0;
      t.insert("e" + std::to_string(i), v);
    }
    Mat y = pca_project(t, 4).as_matrix();
    Eigen::RowVectorXd var = y.colwise().squaredNorm() / static_cast<double>(y.rows());
    for (int k = 1; k < 4; ++k) CHECK(var[k] <= var[k - 1] + 1e-12);
  }
}

TEST_CASE("pca_project errors") {
  KgEmbeddingTable one("g", 3);
  one.insert("a", Vec::Ones(3));
  CHECK_THROWS_AS(pca_project(one, 1), ConfigError);
  KgEmbeddingTable t("g", 3);
  t.insert("a", Vec::Ones(3));
  t.insert("b", Vec::Zero(3));
  CHECK_THROWS_AS(pca_project(t, 3), DimensionError);
  CHECK_NOTHROW(pca_project(t, 2));
}

}  // namespace
}  // namespace ki
