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

#include "ki/kg_store.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "ki/errors.h"

namespace ki {

std::string normalize_entity(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  bool pending_space = false;
  for (char c : surface) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back('_');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

KgEmbeddingTable::KgEmbeddingTable(std::string graph_name, int dim)
    : graph_name_(std::move(graph_name)), dim_(dim) {
  if (dim <= 0) throw DimensionError("embedding dimension must be positive");
}

void KgEmbeddingTable::insert(std::string_view entity, Vec vector) {
  if (vector.size() != dim_) {
    throw DimensionError("entity '" + std::string(entity) + "' has " +
                         std::to_string(vector.size()) +
                         " components, table dimension is " +
                         std::to_string(dim_));
  }
  if (!vector.allFinite()) {
    throw NumericError("entity '" + std::string(entity) +
                       "' has a non-finite component");
  }
  std::string key = normalize_entity(entity);
  if (index_.count(key) > 0) {
    throw ConfigError("duplicate entity '" + key + "' in table '" +
                      graph_name_ + "'");
  }
  index_.emplace(key, names_.size());
  names_.push_back(std::move(key));
  vectors_.push_back(std::move(vector));
}

const Vec *KgEmbeddingTable::find(std::string_view entity) const {
  auto it = index_.find(normalize_entity(entity));
  if (it == index_.end()) return nullptr;
  return &vectors_[it->second];
}

Mat KgEmbeddingTable::as_matrix() const {
  Mat m(static_cast<Eigen::Index>(size()), dim_);
  for (size_t i = 0; i < size(); ++i) m.row(i) = vectors_[i].transpose();
  return m;
}

bool KgEmbeddingTable::operator==(const KgEmbeddingTable &other) const {
  if (graph_name_ != other.graph_name_ || dim_ != other.dim_ ||
      names_ != other.names_) {
    return false;
  }
  for (size_t i = 0; i < vectors_.size(); ++i) {
    if (vectors_[i] != other.vectors_[i]) return false;
  }
  return true;
}

namespace {

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> parts;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) parts.push_back(s.substr(start, i - start));
  }
  return parts;
}

}  // namespace

KgEmbeddingTable load_lexicon(const std::filesystem::path &path,
                              std::optional<int> expected_dim,
                              std::string graph_name) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lexicon " + path.string());
  if (graph_name.empty()) graph_name = path.stem().string();

  std::optional<KgEmbeddingTable> table;
  if (expected_dim) table.emplace(graph_name, *expected_dim);

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);

    size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw ParseError(where + ": expected 2 tab-separated columns");
    }
    std::string_view entity = std::string_view(line).substr(0, tab);
    if (split_ws(entity).empty()) throw ParseError(where + ": empty entity");

    auto fields = split_ws(std::string_view(line).substr(tab + 1));
    if (fields.empty()) throw ParseError(where + ": no vector components");
    Vec v(static_cast<Eigen::Index>(fields.size()));
    for (size_t i = 0; i < fields.size(); ++i) {
      double x = 0;
      auto [ptr, ec] = std::from_chars(fields[i].data(),
                                       fields[i].data() + fields[i].size(), x);
      if (ec != std::errc() || ptr != fields[i].data() + fields[i].size()) {
        throw ParseError(where + ": non-numeric value '" +
                         std::string(fields[i]) + "'");
      }
      v[static_cast<Eigen::Index>(i)] = x;
    }

    if (!table) table.emplace(graph_name, static_cast<int>(v.size()));
    if (v.size() != table->dim()) {
      throw DimensionError(where + ": expected " + std::to_string(table->dim()) +
                           " components, got " + std::to_string(v.size()));
    }
    table->insert(entity, std::move(v));
  }

  if (!table) {
    throw DimensionError("lexicon " + path.string() +
                         " is empty and no dimension was given");
  }
  return std::move(*table);
}

void save_lexicon(const KgEmbeddingTable &table,
                  const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write lexicon " + path.string());
  char buf[64];
  for (size_t i = 0; i < table.size(); ++i) {
    out << table.name(i) << '\t';
    const Vec &v = table.vector(i);
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.9g", v[k]);
      if (k > 0) out << ' ';
      out << buf;
    }
    out << '\n';
  }
}

double transe_score(const Vec &h, const Vec &r, const Vec &t) {
  if (h.size() != r.size() || h.size() != t.size()) {
    throw DimensionError("transe_score: vectors must share one dimension");
  }
  return (h + r - t).norm();
}

void ToyKg::validate() const {
  std::set<std::tuple<int, int, int>> seen;
  const int ne = static_cast<int>(entities.size());
  const int nr = static_cast<int>(relations.size());
  for (const Triple &t : triples) {
    if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne ||
        t.relation < 0 || t.relation >= nr) {
      throw ConfigError("triple index out of range");
    }
    if (!seen.emplace(t.head, t.relation, t.tail).second) {
      throw ConfigError("duplicate triple (" + entities[t.head] + ", " +
                        relations[t.relation] + ", " + entities[t.tail] + ")");
    }
  }
}

void TransEConfig::validate() const {
  if (dim <= 0 || margin <= 0 || learning_rate <= 0 || epochs <= 0 ||
      negatives_per_positive <= 0) {
    throw ConfigError("TransE hyperparameters must be strictly positive");
  }
}

namespace {

Vec uniform_unit(int dim, std::mt19937_64 &rng) {
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> u(-bound, bound);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = u(rng);
  return v / v.norm();
}

// Gradient of ||x|| with respect to x; zero at the origin.
Vec norm_grad(const Vec &x) {
  double n = x.norm();
  if (n == 0) return Vec::Zero(x.size());
  return x / n;
}

}  // namespace

TransEModel train_toy_transe(const ToyKg &kg, const TransEConfig &cfg) {
  cfg.validate();
  kg.validate();
  if (kg.triples.empty()) throw ConfigError("knowledge graph has no triples");
  if (kg.entities.size() < 2) {
    throw ConfigError("negative sampling needs at least two entities");
  }

  std::mt19937_64 rng(cfg.seed);
  const int ne = static_cast<int>(kg.entities.size());
  std::vector<Vec> ent(ne);
  for (auto &e : ent) e = uniform_unit(cfg.dim, rng);
  std::vector<Vec> rel(kg.relations.size());
  for (auto &r : rel) r = uniform_unit(cfg.dim, rng);

  std::uniform_int_distribution<int> pick_entity(0, ne - 1);
  std::bernoulli_distribution corrupt_head(0.5);
  std::vector<size_t> order(kg.triples.size());
  std::iota(order.begin(), order.end(), 0);

  TransEModel model;
  model.epoch_loss.reserve(cfg.epochs);
  const double lr = cfg.learning_rate;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (size_t idx : order) {
      const Triple &pos = kg.triples[idx];
      for (int k = 0; k < cfg.negatives_per_positive; ++k) {
        Triple neg = pos;
        int &slot = corrupt_head(rng) ? neg.head : neg.tail;
        const int original = slot;
        do {
          slot = pick_entity(rng);
        } while (slot == original);

        Vec pos_diff = ent[pos.head] + rel[pos.relation] - ent[pos.tail];
        Vec neg_diff = ent[neg.head] + rel[neg.relation] - ent[neg.tail];
        double loss = cfg.margin + pos_diff.norm() - neg_diff.norm();
        if (loss <= 0) continue;
        total += loss;

        Vec gp = norm_grad(pos_diff);
        Vec gn = norm_grad(neg_diff);
        ent[pos.head] -= lr * gp;
        ent[pos.tail] += lr * gp;
        rel[pos.relation] -= lr * gp;
        ent[neg.head] += lr * gn;
        ent[neg.tail] -= lr * gn;
        rel[neg.relation] += lr * gn;
      }
    }
    for (auto &e : ent) {
      double n = e.norm();
      if (n > 0) e /= n;
    }
    model.epoch_loss.push_back(
        total / static_cast<double>(order.size() * cfg.negatives_per_positive));
  }

  model.entities = KgEmbeddingTable("transe", cfg.dim);
  for (int i = 0; i < ne; ++i) model.entities.insert(kg.entities[i], ent[i]);
  model.relations = std::move(rel);
  return model;
}

double hits_at_1(const TransEModel &model, const ToyKg &kg) {
  if (kg.triples.empty()) return 0;
  const int ne = static_cast<int>(kg.entities.size());
  int hits = 0;
  for (const Triple &t : kg.triples) {
    const Vec &h = model.entities.vector(t.head);
    const Vec &r = model.relations[t.relation];
    const double truth = transe_score(h, r, model.entities.vector(t.tail));
    bool best = true;
    for (int c = 0; c < ne && best; ++c) {
      if (c == t.tail) continue;
      if (transe_score(h, r, model.entities.vector(c)) <= truth) best = false;
    }
    hits += best ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(kg.triples.size());
}

KgEmbeddingTable pca_project(const KgEmbeddingTable &table, int target_dim) {
  const int n = static_cast<int>(table.size());
  if (n < 2) throw ConfigError("pca_project needs at least two entries");
  if (target_dim <= 0 || target_dim > std::min(table.dim(), n)) {
    throw DimensionError("pca target dimension " + std::to_string(target_dim) +
                         " exceeds min(dim, entries) = " +
                         std::to_string(std::min(table.dim(), n)));
  }

  Mat x = table.as_matrix();
  Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;
  Mat cov = (x.transpose() * x) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Mat> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw NumericError("covariance eigendecomposition failed");
  }

  // Canonical sign: the largest-magnitude component of each eigenvector is
  // positive. Ties in eigenvalue are ordered by that component's axis.
  const int d = table.dim();
  Mat vecs = solver.eigenvectors();
  std::vector<int> axis(d);
  for (int j = 0; j < d; ++j) {
    Eigen::Index arg = 0;
    vecs.col(j).cwiseAbs().maxCoeff(&arg);
    axis[j] = static_cast<int>(arg);
    if (vecs(arg, j) < 0) vecs.col(j) = -vecs.col(j);
  }
  const Vec &vals = solver.eigenvalues();
  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (vals[a] != vals[b]) return vals[a] > vals[b];
    return axis[a] < axis[b];
  });

  Mat basis(d, target_dim);
  for (int k = 0; k < target_dim; ++k) basis.col(k) = vecs.col(order[k]);
  Mat projected = x * basis;

  KgEmbeddingTable out(table.graph_name(), target_dim);
  for (int i = 0; i < n; ++i) {
    out.insert(table.name(i), projected.row(i).transpose());
  }
  return out;
}

}  // namespace ki
