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

#include "ki/encoder.h"

#include <cmath>
#include <random>
#include <string>

#include "ki/errors.h"
#include "ki/selective_attention.h"

namespace ki {

namespace {

constexpr double kLayerNormEps = 1e-12;
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluCubic = 0.044715;

struct LayerNormTrace {
  Mat xhat;
  Vec rstd;
};

Mat layer_norm(const Mat &x, const Vec &gamma, const Vec &beta, LayerNormTrace &tr) {
  const Eigen::Index rows = x.rows();
  tr.xhat.resize(rows, x.cols());
  tr.rstd.resize(rows);
  Mat y(rows, x.cols());
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    tr.rstd[i] = rstd;
    tr.xhat.row(i) = (x.row(i).array() - mean) * rstd;
    y.row(i) = tr.xhat.row(i).cwiseProduct(gamma.transpose()) + beta.transpose();
  }
  return y;
}

Mat layer_norm_backward(const Mat &dy, const LayerNormTrace &tr, const Vec &gamma,
                        Vec &dgamma, Vec &dbeta) {
  dgamma += (dy.cwiseProduct(tr.xhat)).colwise().sum().transpose();
  dbeta += dy.colwise().sum().transpose();
  Mat dx(dy.rows(), dy.cols());
  for (Eigen::Index i = 0; i < dy.rows(); ++i) {
    Eigen::RowVectorXd dxhat = dy.row(i).cwiseProduct(gamma.transpose());
    const double mean_d = dxhat.mean();
    const double mean_dx = dxhat.cwiseProduct(tr.xhat.row(i)).mean();
    dx.row(i) = tr.rstd[i] *
                (dxhat.array() - mean_d - tr.xhat.row(i).array() * mean_dx).matrix();
  }
  return dx;
}

double gelu(double u) {
  return 0.5 * u * (1.0 + std::tanh(kGeluScale * (u + kGeluCubic * u * u * u)));
}

double gelu_grad(double u) {
  const double t = std::tanh(kGeluScale * (u + kGeluCubic * u * u * u));
  return 0.5 * (1.0 + t) +
         0.5 * u * (1.0 - t * t) * kGeluScale * (1.0 + 3.0 * kGeluCubic * u * u);
}

void softmax_rows(Mat &s) {
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double mx = s.row(i).maxCoeff();
    s.row(i) = (s.row(i).array() - mx).exp();
    s.row(i) /= s.row(i).sum();
  }
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate,
                 std::mt19937_64 &rng) {
  std::bernoulli_distribution keep(1.0 - rate);
  Mat m(rows, cols);
  const double scale = 1.0 / (1.0 - rate);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = keep(rng) ? scale : 0.0;
  }
  return m;
}

struct LayerTrace {
  Mat x;        // layer input
  Mat q, k, v;  // projections
  std::vector<Mat> probs;
  Mat context;
  Mat drop_attn;  // empty when dropout is off
  LayerNormTrace ln1;
  Mat h1;
  Mat ffn_pre;
  Mat ffn_act;
  Mat drop_ffn;
  LayerNormTrace ln2;
};

enum class RowSource { kToken, kProjected, kEntUnk, kFixed };

struct RowInfo {
  RowSource source = RowSource::kToken;
  int token_id = 0;
  EntityType etype = EntityType::kConceptual;
  ProjectionTrace projection;
};

struct PassTrace {
  std::vector<RowInfo> rows;
  std::vector<LayerTrace> layers;
  Mat final_states;
  Vec logits;
};

// Index of the entity slot at sequence position i (i past the tokens and not
// an entity-segment [SEP]).
int slot_at(const EncodedInput &enc, int i) {
  return i < enc.entity_sep1_index() ? i - enc.num_tokens() : i - enc.num_tokens() - 1;
}

const ProjectionHead &head_for(const ModelParams &p, EntityType t) {
  return t == EntityType::kConceptual ? p.conceptual_head : p.ambiguous_head;
}

ProjectionHead &head_for(ModelParams &p, EntityType t) {
  return t == EntityType::kConceptual ? p.conceptual_head : p.ambiguous_head;
}

Mat embed_inputs(const ModelParams &params, const ModelConfig &config,
                 const EncodedInput &enc, const KgTables &tables, int L,
                 PassTrace *trace) {
  const int d = config.model_dim;
  Mat x(L, d);
  std::vector<RowInfo> rows(L);
  const int sep_id = enc.token_ids.at(enc.layout.n + 1);
  for (int i = 0; i < L; ++i) {
    const int tt = enc.token_types.at(i);
    const int pos = enc.position_ids.at(i);
    if (tt < 0 || tt >= config.num_token_types) {
      throw EncodingError("token type " + std::to_string(tt) + " out of range");
    }
    if (pos < 0 || pos >= config.max_positions) {
      throw EncodingError("position id " + std::to_string(pos) + " out of range");
    }
    RowInfo &info = rows[i];
    Vec base;
    if (i < enc.num_tokens() || enc.is_entity_sep(i)) {
      info.token_id = i < enc.num_tokens() ? enc.token_ids[i] : sep_id;
      if (info.token_id < 0 || info.token_id >= config.vocab_size) {
        throw EncodingError("token id " + std::to_string(info.token_id) + " out of range");
      }
      base = params.token_embedding.row(info.token_id).transpose();
    } else {
      const EntitySlot &slot = enc.entities.at(slot_at(enc, i));
      info.etype = slot.etype;
      const KgEmbeddingTable *table = tables.for_type(slot.etype);
      if (table == nullptr) {
        throw ConfigError(std::string("no KG table for ") +
                          entity_type_name(slot.etype) + " entities");
      }
      const Vec *wk = slot.entity_id.empty() ? nullptr : table->find(slot.entity_id);
      if (wk == nullptr) {
        info.source = RowSource::kEntUnk;
        base = params.ent_unk;
      } else if (config.projection_mode == ProjectionMode::kLearned) {
        const ProjectionHead &head = head_for(params, slot.etype);
        if (head.empty()) {
          throw ConfigError(std::string("model has no projection head for ") +
                            entity_type_name(slot.etype) + " entities");
        }
        info.source = RowSource::kProjected;
        base = project(head, *wk, &info.projection);
      } else {
        if (wk->size() > d) {
          throw DimensionError("PCA lexicon vectors exceed model_dim");
        }
        info.source = RowSource::kFixed;
        base = Vec::Zero(d);
        base.head(wk->size()) = *wk;
      }
    }
    x.row(i) = base.transpose() + params.token_type_embedding.row(tt) +
               params.position_embedding.row(pos);
  }
  if (trace != nullptr) trace->rows = std::move(rows);
  return x;
}

ForwardResult run_forward(const ModelParams &params, const ModelConfig &config,
                          const EncodedInput &enc, const KgTables &tables,
                          const ForwardOptions &options, PassTrace *trace) {
  const int L = model_seq_len(config, enc);
  const int d = config.model_dim;
  const int nh = config.num_heads;
  const int dh = config.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const bool dropout = options.training && config.dropout_rate > 0;
  std::mt19937_64 rng(options.dropout_seed);

  Mat bias;
  if (options.bias_override != nullptr) {
    if (options.bias_override->rows() != L || options.bias_override->cols() != L) {
      throw DimensionError("bias override has the wrong shape");
    }
    bias = *options.bias_override;
  } else {
    bias = mask_to_bias(build_mask(enc, config.use_selective_attention)).topLeftCorner(L, L);
  }

  ForwardResult result;
  Mat x = embed_inputs(params, config, enc, tables, L, trace);
  if (trace != nullptr) trace->layers.resize(params.layers.size());

  for (size_t l = 0; l < params.layers.size(); ++l) {
    const LayerParams &P = params.layers[l];
    LayerTrace local;
    LayerTrace &t = trace != nullptr ? trace->layers[l] : local;
    t.x = x;
    t.q = (x * P.wq).rowwise() + P.bq.transpose();
    t.k = (x * P.wk).rowwise() + P.bk.transpose();
    t.v = (x * P.wv).rowwise() + P.bv.transpose();
    t.context.resize(L, d);
    t.probs.resize(nh);
    for (int h = 0; h < nh; ++h) {
      Mat s = t.q.middleCols(h * dh, dh) * t.k.middleCols(h * dh, dh).transpose() * scale + bias;
      softmax_rows(s);
      t.context.middleCols(h * dh, dh) = s * t.v.middleCols(h * dh, dh);
      if (options.keep_attention) result.attention.push_back(s);
      t.probs[h] = std::move(s);
    }
    Mat attn = (t.context * P.wo).rowwise() + P.bo.transpose();
    if (dropout) {
      t.drop_attn = dropout_mask(L, d, config.dropout_rate, rng);
      attn = attn.cwiseProduct(t.drop_attn);
    }
    t.h1 = layer_norm(x + attn, P.ln1_gamma, P.ln1_beta, t.ln1);
    t.ffn_pre = (t.h1 * P.ffn_w1).rowwise() + P.ffn_b1.transpose();
    t.ffn_act = t.ffn_pre.unaryExpr([](double u) { return gelu(u); });
    Mat ffn = (t.ffn_act * P.ffn_w2).rowwise() + P.ffn_b2.transpose();
    if (dropout) {
      t.drop_ffn = dropout_mask(L, d, config.dropout_rate, rng);
      ffn = ffn.cwiseProduct(t.drop_ffn);
    }
    x = layer_norm(t.h1 + ffn, P.ln2_gamma, P.ln2_beta, t.ln2);
  }

  result.logits = params.classifier_w.transpose() * x.row(0).transpose() + params.classifier_b;
  result.final_states = std::move(x);
  if (trace != nullptr) {
    trace->final_states = result.final_states;
    trace->logits = result.logits;
  }
  return result;
}

void run_backward(const ModelParams &params, const ModelConfig &config,
                  const EncodedInput &enc, const PassTrace &trace,
                  const Vec &dlogits, ModelParams &g) {
  const int nh = config.num_heads;
  const int dh = config.head_dim();
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  const Eigen::RowVectorXd cls = trace.final_states.row(0);
  g.classifier_w.noalias() += cls.transpose() * dlogits.transpose();
  g.classifier_b += dlogits;
  Mat dx = Mat::Zero(trace.final_states.rows(), trace.final_states.cols());
  dx.row(0) = (params.classifier_w * dlogits).transpose();

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const LayerParams &P = params.layers[l];
    const LayerTrace &t = trace.layers[l];
    LayerParams &G = g.layers[l];

    Mat dr2 = layer_norm_backward(dx, t.ln2, P.ln2_gamma, G.ln2_gamma, G.ln2_beta);
    Mat dffn = dr2;
    if (t.drop_ffn.size() > 0) dffn = dffn.cwiseProduct(t.drop_ffn);
    G.ffn_w2.noalias() += t.ffn_act.transpose() * dffn;
    G.ffn_b2 += dffn.colwise().sum().transpose();
    Mat dpre = (dffn * P.ffn_w2.transpose()).cwiseProduct(t.ffn_pre.unaryExpr([](double u) { return gelu_grad(u); }));
    G.ffn_w1.noalias() += t.h1.transpose() * dpre;
    G.ffn_b1 += dpre.colwise().sum().transpose();
    Mat dh1 = dr2 + dpre * P.ffn_w1.transpose();

    Mat dr1 = layer_norm_backward(dh1, t.ln1, P.ln1_gamma, G.ln1_gamma, G.ln1_beta);
    Mat dattn = dr1;
    if (t.drop_attn.size() > 0) dattn = dattn.cwiseProduct(t.drop_attn);
    G.wo.noalias() += t.context.transpose() * dattn;
    G.bo += dattn.colwise().sum().transpose();
    Mat dctx = dattn * P.wo.transpose();

    Mat dq(dctx.rows(), dctx.cols()), dk(dctx.rows(), dctx.cols()),
        dv(dctx.rows(), dctx.cols());
    for (int h = 0; h < nh; ++h) {
      const Mat &p = t.probs[h];
      auto dc = dctx.middleCols(h * dh, dh);
      Mat dp = dc * t.v.middleCols(h * dh, dh).transpose();
      dv.middleCols(h * dh, dh) = p.transpose() * dc;
      Vec row_dot = dp.cwiseProduct(p).rowwise().sum();
      Mat ds = p.cwiseProduct(dp.colwise() - row_dot) * scale;
      dq.middleCols(h * dh, dh) = ds * t.k.middleCols(h * dh, dh);
      dk.middleCols(h * dh, dh) = ds.transpose() * t.q.middleCols(h * dh, dh);
    }
    G.wq.noalias() += t.x.transpose() * dq;
    G.bq += dq.colwise().sum().transpose();
    G.wk.noalias() += t.x.transpose() * dk;
    G.bk += dk.colwise().sum().transpose();
    G.wv.noalias() += t.x.transpose() * dv;
    G.bv += dv.colwise().sum().transpose();
    dx = dr1 + dq * P.wq.transpose() + dk * P.wk.transpose() + dv * P.wv.transpose();
  }

  for (int i = 0; i < static_cast<int>(trace.rows.size()); ++i) {
    const RowInfo &info = trace.rows[i];
    const Eigen::RowVectorXd drow = dx.row(i);
    g.token_type_embedding.row(enc.token_types[i]) += drow;
    g.position_embedding.row(enc.position_ids[i]) += drow;
    switch (info.source) {
      case RowSource::kToken:
        g.token_embedding.row(info.token_id) += drow;
        break;
      case RowSource::kProjected:
        project_backward(head_for(params, info.etype), info.projection, drow.transpose(),
                         head_for(g, info.etype));
        break;
      case RowSource::kEntUnk:
        g.ent_unk += drow.transpose();
        break;
      case RowSource::kFixed:
        break;
    }
  }
}

}  // namespace

int model_seq_len(const ModelConfig &config, const EncodedInput &encoded) {
  return config.uses_entities() ? encoded.seq_len() : encoded.num_tokens();
}

ForwardResult forward(const ModelParams &params, const ModelConfig &config,
                      const EncodedInput &encoded, const KgTables &tables,
                      const ForwardOptions &options) {
  return run_forward(params, config, encoded, tables, options, nullptr);
}

Vec softmax(const Vec &logits) {
  Vec p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

double loss(const Vec &logits, int label) {
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  const double l = lse - logits[label];
  // Rounding can push l a hair below zero; NaN must pass through.
  return l < 0 ? 0.0 : l;
}

GradientResult grad(const ModelParams &params, const ModelConfig &config,
                    std::span<const Example> batch, const KgTables &tables,
                    const ForwardOptions &options) {
  if (batch.empty()) throw ConfigError("gradient of an empty batch");
  GradientResult out{params.zeros_like(), 0.0};
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (size_t r = 0; r < batch.size(); ++r) {
    const Example &ex = batch[r];
    if (ex.label < 0 || ex.label >= config.num_classes) {
      throw ConfigError("label out of range in record " + std::to_string(r));
    }
    ForwardOptions opts = options;
    opts.dropout_seed = options.dropout_seed + r;
    opts.keep_attention = false;
    PassTrace trace;
    run_forward(params, config, ex.input, tables, opts, &trace);
    const double l = loss(trace.logits, ex.label);
    if (!std::isfinite(l)) {
      throw NumericError("non-finite loss at record " + std::to_string(r));
    }
    out.loss += l * inv;
    Vec dlogits = softmax(trace.logits);
    dlogits[ex.label] -= 1.0;
    dlogits *= inv;
    run_backward(params, config, ex.input, trace, dlogits, out.gradient);
  }
  if (!config.projection_biases) {
    for (ProjectionHead *h : {&out.gradient.conceptual_head, &out.gradient.ambiguous_head}) {
      h->b1.setZero();
      h->b2.setZero();
    }
  }
  return out;
}

double batch_loss(const ModelParams &params, const ModelConfig &config,
                  std::span<const Example> batch, const KgTables &tables) {
  if (batch.empty()) throw ConfigError("loss of an empty batch");
  double total = 0;
  for (const Example &ex : batch) {
    total += loss(forward(params, config, ex.input, tables).logits, ex.label);
  }
  return total / static_cast<double>(batch.size());
}

std::vector<double> predict_proba(const ModelParams &params, const ModelConfig &config,
                                  const EncodedInput &encoded, const KgTables &tables) {
  Vec p = softmax(forward(params, config, encoded, tables).logits);
  return std::vector<double>(p.data(), p.data() + p.size());
}

double accuracy(const ModelParams &params, const ModelConfig &config,
                std::span<const Example> examples, const KgTables &tables) {
  if (examples.empty()) return 0;
  int correct = 0;
  for (const Example &ex : examples) {
    Eigen::Index arg = 0;
    forward(params, config, ex.input, tables).logits.maxCoeff(&arg);
    correct += static_cast<int>(arg) == ex.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(examples.size());
}

}  // namespace ki
