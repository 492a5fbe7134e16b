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

#include "ki/model.h"

#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "ki/errors.h"

namespace ki {

const char *projection_mode_name(ProjectionMode mode) {
  switch (mode) {
    case ProjectionMode::kLearned: return "learned";
    case ProjectionMode::kPca: return "pca";
    case ProjectionMode::kNone: return "none";
  }
  return "learned";
}

ProjectionMode parse_projection_mode(const std::string &name) {
  if (name == "learned") return ProjectionMode::kLearned;
  if (name == "pca") return ProjectionMode::kPca;
  if (name == "none") return ProjectionMode::kNone;
  throw ConfigError("unknown projection_mode '" + name + "'");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char *what) {
    if (v <= 0) throw ConfigError(std::string(what) + " must be positive");
  };
  positive(model_dim, "model_dim");
  positive(num_layers, "num_layers");
  positive(num_heads, "num_heads");
  positive(ffn_dim, "ffn_dim");
  positive(vocab_size, "vocab_size");
  positive(max_positions, "max_positions");
  positive(num_classes, "num_classes");
  if (model_dim % num_heads != 0) {
    throw ConfigError("model_dim must be divisible by num_heads");
  }
  if (uses_entities() && num_token_types != 3) {
    throw ConfigError("num_token_types must be 3 when entities are enabled");
  }
  if (num_token_types < 2 || num_token_types > 3) {
    throw ConfigError("num_token_types must be 2 or 3");
  }
  if (!(dropout_rate >= 0 && dropout_rate < 1)) {
    throw ConfigError("dropout_rate must lie in [0, 1)");
  }
  if (conceptual_kg_dim < 0 || ambiguous_kg_dim < 0 || projection_hidden_dim < 0) {
    throw ConfigError("projection dimensions must be non-negative");
  }
}

EncodingOptions ModelConfig::encoding_options() const {
  EncodingOptions o;
  o.max_positions = max_positions;
  o.entity_token_types = use_entity_token_types;
  o.position_alignment = use_position_alignment;
  o.use_ent_unk = use_ent_unk;
  return o;
}

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{
      {"model_dim", model_dim},
      {"num_layers", num_layers},
      {"num_heads", num_heads},
      {"ffn_dim", ffn_dim},
      {"vocab_size", vocab_size},
      {"num_token_types", num_token_types},
      {"max_positions", max_positions},
      {"num_classes", num_classes},
      {"dropout_rate", dropout_rate},
      {"use_selective_attention", use_selective_attention},
      {"use_entity_token_types", use_entity_token_types},
      {"use_position_alignment", use_position_alignment},
      {"projection_mode", projection_mode_name(projection_mode)},
      {"conceptual_kg_dim", conceptual_kg_dim},
      {"ambiguous_kg_dim", ambiguous_kg_dim},
      {"projection_hidden_dim", projection_hidden_dim},
      {"projection_biases", projection_biases},
      {"use_ent_unk", use_ent_unk},
      {"seed", seed},
  };
}

ModelConfig ModelConfig::from_json(const nlohmann::json &j) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  ModelConfig c;
  const std::set<std::string> known = {
      "model_dim", "num_layers", "num_heads", "ffn_dim", "vocab_size",
      "num_token_types", "max_positions", "num_classes", "dropout_rate",
      "use_selective_attention", "use_entity_token_types",
      "use_position_alignment", "projection_mode", "conceptual_kg_dim",
      "ambiguous_kg_dim", "projection_hidden_dim", "projection_biases",
      "use_ent_unk", "seed"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (known.count(it.key()) == 0) {
      throw ConfigError("unknown model config key '" + it.key() + "'");
    }
  }
  try {
    auto get = [&](const char *key, auto &field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("model_dim", c.model_dim);
    get("num_layers", c.num_layers);
    get("num_heads", c.num_heads);
    get("ffn_dim", c.ffn_dim);
    get("vocab_size", c.vocab_size);
    get("num_token_types", c.num_token_types);
    get("max_positions", c.max_positions);
    get("num_classes", c.num_classes);
    get("dropout_rate", c.dropout_rate);
    get("use_selective_attention", c.use_selective_attention);
    get("use_entity_token_types", c.use_entity_token_types);
    get("use_position_alignment", c.use_position_alignment);
    if (j.contains("projection_mode")) {
      c.projection_mode = parse_projection_mode(j.at("projection_mode").get<std::string>());
    }
    get("conceptual_kg_dim", c.conceptual_kg_dim);
    get("ambiguous_kg_dim", c.ambiguous_kg_dim);
    get("projection_hidden_dim", c.projection_hidden_dim);
    get("projection_biases", c.projection_biases);
    get("use_ent_unk", c.use_ent_unk);
    get("seed", c.seed);
  } catch (const nlohmann::json::exception &e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  return c;
}

namespace {

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 stream(uint64_t seed, std::string_view name) {
  return std::mt19937_64(splitmix64(seed ^ fnv1a(name)));
}

Mat normal_matrix(int rows, int cols, double stddev, uint64_t seed,
                  std::string_view name) {
  auto rng = stream(seed, name);
  std::normal_distribution<double> dist(0.0, stddev);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

Mat uniform_matrix(int rows, int cols, double bound, uint64_t seed,
                   std::string_view name) {
  auto rng = stream(seed, name);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  }
  return m;
}

constexpr double kEmbeddingStd = 0.1;

}  // namespace

ModelParams ModelParams::init(const ModelConfig &config) {
  config.validate();
  const int d = config.model_dim;
  const uint64_t seed = config.seed;
  const double lin = 1.0 / std::sqrt(static_cast<double>(d));
  ModelParams p;
  p.token_embedding = normal_matrix(config.vocab_size, d, kEmbeddingStd, seed, "token_embedding");
  p.token_type_embedding =
      normal_matrix(config.num_token_types, d, kEmbeddingStd, seed, "token_type_embedding");
  p.position_embedding =
      normal_matrix(config.max_positions, d, kEmbeddingStd, seed, "position_embedding");
  for (int l = 0; l < config.num_layers; ++l) {
    const std::string pre = "layer" + std::to_string(l) + ".";
    LayerParams L;
    L.wq = uniform_matrix(d, d, lin, seed, pre + "wq");
    L.wk = uniform_matrix(d, d, lin, seed, pre + "wk");
    L.wv = uniform_matrix(d, d, lin, seed, pre + "wv");
    L.wo = uniform_matrix(d, d, lin, seed, pre + "wo");
    L.bq = L.bk = L.bv = L.bo = Vec::Zero(d);
    L.ln1_gamma = Vec::Ones(d);
    L.ln1_beta = Vec::Zero(d);
    L.ffn_w1 = uniform_matrix(d, config.ffn_dim, lin, seed, pre + "ffn_w1");
    L.ffn_b1 = Vec::Zero(config.ffn_dim);
    L.ffn_w2 = uniform_matrix(config.ffn_dim, d,
                              1.0 / std::sqrt(static_cast<double>(config.ffn_dim)),
                              seed, pre + "ffn_w2");
    L.ffn_b2 = Vec::Zero(d);
    L.ln2_gamma = Vec::Ones(d);
    L.ln2_beta = Vec::Zero(d);
    p.layers.push_back(std::move(L));
  }
  if (config.projection_mode == ProjectionMode::kLearned) {
    if (config.conceptual_kg_dim > 0) {
      p.conceptual_head =
          init_projection(config.conceptual_kg_dim, config.hidden_dim(), d,
                          EntityType::kConceptual, splitmix64(seed ^ fnv1a("conceptual_head")));
    }
    if (config.ambiguous_kg_dim > 0) {
      p.ambiguous_head =
          init_projection(config.ambiguous_kg_dim, config.hidden_dim(), d,
                          EntityType::kAmbiguous, splitmix64(seed ^ fnv1a("ambiguous_head")));
    }
    p.ambiguous_head.etype = EntityType::kAmbiguous;
  }
  if (config.uses_entities()) {
    p.ent_unk = normal_matrix(d, 1, kEmbeddingStd, seed, "ent_unk").col(0);
  }
  p.classifier_w = uniform_matrix(d, config.num_classes, lin, seed, "classifier_w");
  p.classifier_b = Vec::Zero(config.num_classes);
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z = *this;
  for (auto &t : z.tensors()) Eigen::Map<Vec>(t.data, t.size()).setZero();
  return z;
}

namespace {

template <typename P>
std::vector<TensorView> collect(P &p) {
  std::vector<TensorView> out;
  auto add = [&](std::string name, auto &m) {
    if (m.size() == 0) return;
    out.push_back({std::move(name), const_cast<double *>(m.data()), m.rows(), m.cols()});
  };
  add("token_embedding", p.token_embedding);
  add("token_type_embedding", p.token_type_embedding);
  add("position_embedding", p.position_embedding);
  for (size_t l = 0; l < p.layers.size(); ++l) {
    auto &L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    add(pre + "wq", L.wq);
    add(pre + "bq", L.bq);
    add(pre + "wk", L.wk);
    add(pre + "bk", L.bk);
    add(pre + "wv", L.wv);
    add(pre + "bv", L.bv);
    add(pre + "wo", L.wo);
    add(pre + "bo", L.bo);
    add(pre + "ln1_gamma", L.ln1_gamma);
    add(pre + "ln1_beta", L.ln1_beta);
    add(pre + "ffn_w1", L.ffn_w1);
    add(pre + "ffn_b1", L.ffn_b1);
    add(pre + "ffn_w2", L.ffn_w2);
    add(pre + "ffn_b2", L.ffn_b2);
    add(pre + "ln2_gamma", L.ln2_gamma);
    add(pre + "ln2_beta", L.ln2_beta);
  }
  add("conceptual_head.w1", p.conceptual_head.w1);
  add("conceptual_head.b1", p.conceptual_head.b1);
  add("conceptual_head.w2", p.conceptual_head.w2);
  add("conceptual_head.b2", p.conceptual_head.b2);
  add("ambiguous_head.w1", p.ambiguous_head.w1);
  add("ambiguous_head.b1", p.ambiguous_head.b1);
  add("ambiguous_head.w2", p.ambiguous_head.w2);
  add("ambiguous_head.b2", p.ambiguous_head.b2);
  add("ent_unk", p.ent_unk);
  add("classifier_w", p.classifier_w);
  add("classifier_b", p.classifier_b);
  return out;
}

}  // namespace

std::vector<TensorView> ModelParams::tensors() { return collect(*this); }
std::vector<TensorView> ModelParams::tensors() const { return collect(*this); }

size_t ModelParams::num_parameters() const {
  size_t n = 0;
  for (const auto &t : tensors()) n += static_cast<size_t>(t.size());
  return n;
}

bool ModelParams::all_finite() const {
  for (const auto &t : tensors()) {
    if (!Eigen::Map<const Vec>(t.data, t.size()).allFinite()) return false;
  }
  return true;
}

bool ModelParams::operator==(const ModelParams &other) const {
  auto a = tensors();
  auto b = other.tensors();
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].name != b[i].name || a[i].rows != b[i].rows || a[i].cols != b[i].cols) {
      return false;
    }
    for (Eigen::Index k = 0; k < a[i].size(); ++k) {
      if (std::bit_cast<uint64_t>(a[i].data[k]) != std::bit_cast<uint64_t>(b[i].data[k])) {
        return false;
      }
    }
  }
  return true;
}

namespace {

void put_u64(std::ostream &out, uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

uint64_t get_u64(std::istream &in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char *>(bytes), 8)) {
    throw ParseError("checkpoint is truncated");
  }
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path &path, const ModelConfig &config,
                     const ModelParams &params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write checkpoint " + path.string());
  const std::string header = config.to_json().dump();
  put_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto &t : params.tensors()) {
    put_u64(out, static_cast<uint64_t>(t.rows));
    put_u64(out, static_cast<uint64_t>(t.cols));
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        put_u64(out, std::bit_cast<uint64_t>(t.data[c * t.rows + r]));
      }
    }
  }
  if (!out) throw ParseError("failed writing checkpoint " + path.string());
}

std::pair<ModelConfig, ModelParams> load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  const uint64_t len = get_u64(in);
  if (len > (1u << 20)) throw ParseError("checkpoint header is implausibly large");
  std::string header(len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(len))) {
    throw ParseError("checkpoint header is truncated");
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  ModelConfig config = ModelConfig::from_json(j);
  ModelParams params = ModelParams::init(config);
  for (auto &t : params.tensors()) {
    const uint64_t rows = get_u64(in);
    const uint64_t cols = get_u64(in);
    if (rows != static_cast<uint64_t>(t.rows) || cols != static_cast<uint64_t>(t.cols)) {
      throw ParseError("checkpoint tensor " + t.name + " has shape " +
                       std::to_string(rows) + "x" + std::to_string(cols) +
                       ", config implies " + std::to_string(t.rows) + "x" +
                       std::to_string(t.cols));
    }
    for (Eigen::Index r = 0; r < t.rows; ++r) {
      for (Eigen::Index c = 0; c < t.cols; ++c) {
        t.data[c * t.rows + r] = std::bit_cast<double>(get_u64(in));
      }
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("checkpoint has trailing bytes");
  }
  return {config, std::move(params)};
}

}  // namespace ki
