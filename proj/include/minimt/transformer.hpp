/* minimt - a compact Marathi-English neural machine translation toolkit.
 * Copyright (C) 2026 minimt contributors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "minimt/errors.hpp"
#include "minimt/rng.hpp"
#include "minimt/tensor.hpp"

// Encoder-decoder transformer with sinusoidal positions, multi-head
// attention and hand-written backpropagation. Both pre- and post-layernorm
// variants are supported; presets carry the conventional shapes of the
// fairseq architectures they are named after, scaled for desk use.

namespace minimt::transformer {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::int32_t kBosId = 2;
inline constexpr std::int32_t kEosId = 3;

struct ModelConfig {
  std::string preset = "toy";
  std::size_t d_model = 64;
  std::size_t n_heads = 4;
  std::size_t n_encoder_layers = 2;
  std::size_t n_decoder_layers = 2;
  std::size_t ffn_dim = 128;
  double dropout = 0.3;
  bool share_decoder_io = true;
  bool pre_layernorm = false;
  std::size_t max_source_positions = 512;
  std::size_t max_target_positions = 512;
  std::size_t src_vocab_size = 0;
  std::size_t tgt_vocab_size = 0;

  void validate() const {
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
      fail(ErrorKind::kConfig, "d_model must be a positive multiple of n_heads");
    if (!(dropout >= 0.0 && dropout < 1.0))
      fail(ErrorKind::kConfig, "dropout must be in [0,1)");
    if (max_source_positions < 1 || max_target_positions < 1)
      fail(ErrorKind::kConfig, "position limits must be >= 1");
    if (src_vocab_size <= static_cast<std::size_t>(kEosId) ||
        tgt_vocab_size <= static_cast<std::size_t>(kEosId))
      fail(ErrorKind::kConfig, "vocabulary sizes must cover the special ids");
    if (n_encoder_layers == 0 || n_decoder_layers == 0)
      fail(ErrorKind::kConfig, "layer counts must be >= 1");
  }

  bool operator==(const ModelConfig&) const = default;
};

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> kNames = {
      "iwslt-de-en", "wmt-en-de", "wmt-en-de-big-t2t", "vaswani-wmt-en-de-big",
      "toy"};
  return kNames;
}

inline ModelConfig preset(const std::string& name) {
  ModelConfig cfg;
  cfg.preset = name;
  if (name == "iwslt-de-en") {
    cfg.n_encoder_layers = cfg.n_decoder_layers = 6;
    cfg.d_model = 512;
    cfg.ffn_dim = 1024;
    cfg.n_heads = 4;
    cfg.pre_layernorm = false;
  } else if (name == "wmt-en-de") {
    cfg.n_encoder_layers = cfg.n_decoder_layers = 6;
    cfg.d_model = 512;
    cfg.ffn_dim = 2048;
    cfg.n_heads = 8;
    cfg.pre_layernorm = false;
  } else if (name == "wmt-en-de-big-t2t") {
    cfg.n_encoder_layers = cfg.n_decoder_layers = 6;
    cfg.d_model = 1024;
    cfg.ffn_dim = 4096;
    cfg.n_heads = 16;
    cfg.pre_layernorm = true;
  } else if (name == "vaswani-wmt-en-de-big") {
    cfg.n_encoder_layers = cfg.n_decoder_layers = 6;
    cfg.d_model = 1024;
    cfg.ffn_dim = 4096;
    cfg.n_heads = 16;
    cfg.pre_layernorm = false;
  } else if (name == "toy") {
    cfg.n_encoder_layers = cfg.n_decoder_layers = 2;
    cfg.d_model = 64;
    cfg.ffn_dim = 128;
    cfg.n_heads = 4;
    cfg.pre_layernorm = false;
  } else {
    std::string names;
    for (const auto& n : preset_names()) names += (names.empty() ? "" : ", ") + n;
    fail(ErrorKind::kConfig, "unknown preset '" + name + "'; valid: " + names);
  }
  return cfg;
}

// ---- Parameter layout --------------------------------------------------

using Shape = std::vector<std::size_t>;

inline std::map<std::string, Shape> expected_shapes(const ModelConfig& cfg) {
  cfg.validate();
  std::map<std::string, Shape> s;
  const std::size_t d = cfg.d_model, f = cfg.ffn_dim;
  s["src_embed"] = {cfg.src_vocab_size, d};
  s["tgt_embed"] = {cfg.tgt_vocab_size, d};
  if (!cfg.share_decoder_io) s["out_proj"] = {cfg.tgt_vocab_size, d};

  const auto attention = [&](const std::string& p) {
    for (const char* m : {"wq", "wk", "wv", "wo"}) s[p + "." + m] = {d, d};
    for (const char* m : {"bq", "bk", "bv", "bo"}) s[p + "." + m] = {d};
  };
  const auto norm = [&](const std::string& p) {
    s[p + ".gain"] = {d};
    s[p + ".bias"] = {d};
  };
  const auto ffn = [&](const std::string& p) {
    s[p + ".w1"] = {f, d};
    s[p + ".b1"] = {f};
    s[p + ".w2"] = {d, f};
    s[p + ".b2"] = {d};
  };

  for (std::size_t i = 0; i < cfg.n_encoder_layers; ++i) {
    const std::string p = "enc." + std::to_string(i);
    attention(p + ".attn");
    norm(p + ".attn_ln");
    ffn(p + ".ffn");
    norm(p + ".ffn_ln");
  }
  for (std::size_t i = 0; i < cfg.n_decoder_layers; ++i) {
    const std::string p = "dec." + std::to_string(i);
    attention(p + ".self_attn");
    norm(p + ".self_attn_ln");
    attention(p + ".cross_attn");
    norm(p + ".cross_attn_ln");
    ffn(p + ".ffn");
    norm(p + ".ffn_ln");
  }
  if (cfg.pre_layernorm) {
    norm("enc.final_ln");
    norm("dec.final_ln");
  }
  return s;
}

inline std::size_t param_count(const ModelConfig& cfg) {
  std::size_t n = 0;
  for (const auto& [name, shape] : expected_shapes(cfg))
    n += Tensor<float>::numel_of(shape);
  return n;
}

template <typename R = float>
ParamMap<R> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  const auto shapes = expected_shapes(cfg);
  Rng rng(seed);
  ParamMap<R> params;
  for (const auto& [name, shape] : shapes) {
    Tensor<R> t(shape);
    if (name.ends_with(".gain")) {
      t.fill(R(1));
    } else if (shape.size() == 1) {
      t.fill(R(0));  // biases
    } else if (name == "src_embed" || name == "tgt_embed" ||
               name == "out_proj") {
      const double std_dev = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
      for (auto& x : t.v) x = static_cast<R>(rng.next_normal() * std_dev);
      if (name != "out_proj") {
        // pad embedding row is zero
        for (std::size_t j = 0; j < cfg.d_model; ++j)
          t.v[static_cast<std::size_t>(kPadId) * cfg.d_model + j] = R(0);
      }
    } else {
      // Xavier uniform for projection matrices [out, in].
      const double limit =
          std::sqrt(6.0 / static_cast<double>(shape[0] + shape[1]));
      for (auto& x : t.v) x = static_cast<R>(rng.next_uniform(-limit, limit));
    }
    params.emplace(name, std::move(t));
  }
  return params;
}

// ---- Batches -------------------------------------------------------------

struct Batch {
  IntMat src;         // B x S, right-padded with kPadId
  IntMat tgt_input;   // B x T: bos + target (+ pads)
  IntMat tgt_output;  // B x T: target + eos (+ pads)
};

// Builds a teacher-forcing batch from raw (src, tgt) id sequences.
inline Batch make_batch(
    const std::vector<std::pair<std::vector<std::int32_t>,
                                std::vector<std::int32_t>>>& pairs) {
  std::size_t s_max = 0, t_max = 0;
  for (const auto& [s, t] : pairs) {
    s_max = std::max(s_max, s.size());
    t_max = std::max(t_max, t.size() + 1);
  }
  Batch b;
  b.src = IntMat(pairs.size(), s_max, kPadId);
  b.tgt_input = IntMat(pairs.size(), t_max, kPadId);
  b.tgt_output = IntMat(pairs.size(), t_max, kPadId);
  for (std::size_t r = 0; r < pairs.size(); ++r) {
    const auto& [s, t] = pairs[r];
    for (std::size_t i = 0; i < s.size(); ++i) b.src.at(r, i) = s[i];
    b.tgt_input.at(r, 0) = kBosId;
    for (std::size_t i = 0; i < t.size(); ++i) {
      b.tgt_input.at(r, i + 1) = t[i];
      b.tgt_output.at(r, i) = t[i];
    }
    b.tgt_output.at(r, t.size()) = kEosId;
  }
  return b;
}

// ---- Primitives with caches ----------------------------------------------

namespace detail {

template <typename R>
struct DropoutCache {
  std::vector<std::uint8_t> keep;  // empty when dropout was inactive
  R keep_prob = R(1);
};

template <typename R>
void dropout_forward(Tensor<R>& x, double p, bool train, Rng* rng,
                     DropoutCache<R>& cache) {
  if (!train || p <= 0.0) {
    cache.keep.clear();
    cache.keep_prob = R(1);
    return;
  }
  cache.keep.assign(x.numel(), 1);
  cache.keep_prob = static_cast<R>(1.0 - p);
  const R scale = R(1) / cache.keep_prob;
  for (std::size_t i = 0; i < x.numel(); ++i) {
    if (rng->next_double() < p) {
      cache.keep[i] = 0;
      x.v[i] = R(0);
    } else {
      x.v[i] *= scale;
    }
  }
}

template <typename R>
void dropout_backward(Tensor<R>& dx, const DropoutCache<R>& cache) {
  if (cache.keep.empty()) return;
  const R scale = R(1) / cache.keep_prob;
  for (std::size_t i = 0; i < dx.numel(); ++i)
    dx.v[i] = cache.keep[i] ? dx.v[i] * scale : R(0);
}

template <typename R>
struct LayerNormCache {
  Tensor<R> x;
  std::vector<R> mean, rstd;
};

inline constexpr double kLnEps = 1e-5;

template <typename R>
Tensor<R> layernorm_forward(const Tensor<R>& x, const Tensor<R>& gain,
                            const Tensor<R>& bias, LayerNormCache<R>& cache) {
  const std::size_t d = gain.numel();
  const std::size_t rows = x.numel() / d;
  Tensor<R> y(x.shape);
  cache.x = x;
  cache.mean.resize(rows);
  cache.rstd.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const R* xr = x.data() + r * d;
    R* yr = y.data() + r * d;
    R mu = R(0);
    for (std::size_t i = 0; i < d; ++i) mu += xr[i];
    mu /= static_cast<R>(d);
    R var = R(0);
    for (std::size_t i = 0; i < d; ++i) var += (xr[i] - mu) * (xr[i] - mu);
    var /= static_cast<R>(d);
    const R rstd = R(1) / std::sqrt(var + static_cast<R>(kLnEps));
    cache.mean[r] = mu;
    cache.rstd[r] = rstd;
    for (std::size_t i = 0; i < d; ++i)
      yr[i] = gain.v[i] * (xr[i] - mu) * rstd + bias.v[i];
  }
  return y;
}

template <typename R>
Tensor<R> layernorm_backward(const Tensor<R>& dy, const Tensor<R>& gain,
                             const LayerNormCache<R>& cache, Tensor<R>& dgain,
                             Tensor<R>& dbias) {
  const std::size_t d = gain.numel();
  const std::size_t rows = dy.numel() / d;
  Tensor<R> dx(dy.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    const R* dyr = dy.data() + r * d;
    const R* xr = cache.x.data() + r * d;
    R* dxr = dx.data() + r * d;
    const R mu = cache.mean[r], rstd = cache.rstd[r];
    R mean_dxhat = R(0), mean_dxhat_xhat = R(0);
    for (std::size_t i = 0; i < d; ++i) {
      const R xhat = (xr[i] - mu) * rstd;
      const R dxhat = dyr[i] * gain.v[i];
      mean_dxhat += dxhat;
      mean_dxhat_xhat += dxhat * xhat;
      dgain.v[i] += dyr[i] * xhat;
      dbias.v[i] += dyr[i];
    }
    mean_dxhat /= static_cast<R>(d);
    mean_dxhat_xhat /= static_cast<R>(d);
    for (std::size_t i = 0; i < d; ++i) {
      const R xhat = (xr[i] - mu) * rstd;
      const R dxhat = dyr[i] * gain.v[i];
      dxr[i] = rstd * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
    }
  }
  return dx;
}

// Sinusoidal position table for positions [0, len).
template <typename R>
Tensor<R> positional_encoding(std::size_t len, std::size_t d) {
  Tensor<R> pe({len, d});
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t k = 0; k < d; k += 2) {
      const double freq =
          std::exp(-std::log(10000.0) * static_cast<double>(k) /
                   static_cast<double>(d));
      const double angle = static_cast<double>(pos) * freq;
      pe.v[pos * d + k] = static_cast<R>(std::sin(angle));
      if (k + 1 < d) pe.v[pos * d + k + 1] = static_cast<R>(std::cos(angle));
    }
  }
  return pe;
}

template <typename R>
struct EmbedCache {
  IntMat ids;
  DropoutCache<R> drop;
};

// scaled embedding + positions + post-embedding dropout
template <typename R>
Tensor<R> embed_forward(const IntMat& ids, const Tensor<R>& table,
                        std::size_t d, double p_drop, bool train, Rng* rng,
                        EmbedCache<R>& cache) {
  const R scale = static_cast<R>(std::sqrt(static_cast<double>(d)));
  Tensor<R> x({ids.rows, ids.cols, d});
  const Tensor<R> pe = positional_encoding<R>(ids.cols, d);
  for (std::size_t r = 0; r < ids.rows; ++r) {
    for (std::size_t t = 0; t < ids.cols; ++t) {
      const R* row = table.data() + static_cast<std::size_t>(ids.at(r, t)) * d;
      R* out = x.data() + (r * ids.cols + t) * d;
      const R* pet = pe.data() + t * d;
      for (std::size_t i = 0; i < d; ++i) out[i] = row[i] * scale + pet[i];
    }
  }
  cache.ids = ids;
  dropout_forward(x, p_drop, train, rng, cache.drop);
  return x;
}

template <typename R>
void embed_backward(Tensor<R> dx, const EmbedCache<R>& cache, std::size_t d,
                    Tensor<R>& dtable) {
  dropout_backward(dx, cache.drop);
  const R scale = static_cast<R>(std::sqrt(static_cast<double>(d)));
  const IntMat& ids = cache.ids;
  for (std::size_t r = 0; r < ids.rows; ++r) {
    for (std::size_t t = 0; t < ids.cols; ++t) {
      R* drow = dtable.data() + static_cast<std::size_t>(ids.at(r, t)) * d;
      const R* g = dx.data() + (r * ids.cols + t) * d;
      for (std::size_t i = 0; i < d; ++i) drow[i] += g[i] * scale;
    }
  }
}

// Attention mask: keys at padded positions are excluded; causal limits
// decoder self-attention to j <= i.
struct MaskSpec {
  const IntMat* key_ids = nullptr;  // pad positions derived from these
  bool causal = false;

  bool allowed(std::size_t b, std::size_t i, std::size_t j) const {
    if (causal && j > i) return false;
    if (key_ids && key_ids->at(b, j) == kPadId) return false;
    return true;
  }
};

template <typename R>
struct AttnParams {
  const Tensor<R>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
};

template <typename R>
AttnParams<R> attn_params(const ParamMap<R>& params, const std::string& p) {
  return {&params.at(p + ".wq"), &params.at(p + ".bq"), &params.at(p + ".wk"),
          &params.at(p + ".bk"), &params.at(p + ".wv"), &params.at(p + ".bv"),
          &params.at(p + ".wo"), &params.at(p + ".bo")};
}

template <typename R>
struct MhaCache {
  Tensor<R> q_in, kv_in;    // (B,Lq,D), (B,Lk,D)
  Tensor<R> qh, kh, vh;     // (B,H,L,dh)
  Tensor<R> probs;          // post-softmax attention (B,H,Lq,Lk)
  DropoutCache<R> drop;     // over probs
  Tensor<R> ctx;            // merged context (B,Lq,D)
  MaskSpec mask;
  IntMat mask_ids;          // owned copy backing mask.key_ids
};

// Splits a (rows=B*L, D) projection into head-major (B,H,L,dh).
template <typename R>
Tensor<R> split_heads(const Tensor<R>& flat, std::size_t b_sz, std::size_t len,
                      std::size_t heads, std::size_t dh) {
  Tensor<R> out({b_sz, heads, len, dh});
  for (std::size_t b = 0; b < b_sz; ++b)
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t h = 0; h < heads; ++h) {
        const R* src = flat.data() + (b * len + t) * heads * dh + h * dh;
        R* dst = out.data() + ((b * heads + h) * len + t) * dh;
        std::copy(src, src + dh, dst);
      }
  return out;
}

template <typename R>
Tensor<R> merge_heads(const Tensor<R>& headed, std::size_t b_sz,
                      std::size_t len, std::size_t heads, std::size_t dh) {
  Tensor<R> out({b_sz, len, heads * dh});
  for (std::size_t b = 0; b < b_sz; ++b)
    for (std::size_t t = 0; t < len; ++t)
      for (std::size_t h = 0; h < heads; ++h) {
        const R* src = headed.data() + ((b * heads + h) * len + t) * dh;
        R* dst = out.data() + (b * len + t) * heads * dh + h * dh;
        std::copy(src, src + dh, dst);
      }
  return out;
}

inline constexpr double kMaskScore = -1e30;

template <typename R>
Tensor<R> mha_forward(const Tensor<R>& q_in, const Tensor<R>& kv_in,
                      const AttnParams<R>& w, std::size_t heads,
                      const MaskSpec& mask, double p_drop, bool train,
                      Rng* rng, MhaCache<R>& cache) {
  const std::size_t b_sz = q_in.dim(0), lq = q_in.dim(1), d = q_in.dim(2);
  const std::size_t lk = kv_in.dim(1);
  const std::size_t dh = d / heads;
  const R inv_sqrt = static_cast<R>(1.0 / std::sqrt(static_cast<double>(dh)));

  cache.q_in = q_in;
  cache.kv_in = kv_in;
  if (mask.key_ids) {
    cache.mask_ids = *mask.key_ids;
    cache.mask = {&cache.mask_ids, mask.causal};
  } else {
    cache.mask = {nullptr, mask.causal};
  }

  Tensor<R> q_flat({b_sz * lq, d}), k_flat({b_sz * lk, d}),
      v_flat({b_sz * lk, d});
  nn::linear_forward(q_in.data(), w.wq->data(), w.bq->data(), q_flat.data(),
                     b_sz * lq, d, d);
  nn::linear_forward(kv_in.data(), w.wk->data(), w.bk->data(), k_flat.data(),
                     b_sz * lk, d, d);
  nn::linear_forward(kv_in.data(), w.wv->data(), w.bv->data(), v_flat.data(),
                     b_sz * lk, d, d);
  cache.qh = split_heads(q_flat, b_sz, lq, heads, dh);
  cache.kh = split_heads(k_flat, b_sz, lk, heads, dh);
  cache.vh = split_heads(v_flat, b_sz, lk, heads, dh);

  cache.probs = Tensor<R>({b_sz, heads, lq, lk});
  for (std::size_t b = 0; b < b_sz; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < lq; ++i) {
        R* row = cache.probs.data() + ((b * heads + h) * lq + i) * lk;
        const R* qrow = cache.qh.data() + ((b * heads + h) * lq + i) * dh;
        for (std::size_t j = 0; j < lk; ++j) {
          if (!cache.mask.allowed(b, i, j)) {
            row[j] = static_cast<R>(kMaskScore);
            continue;
          }
          const R* krow = cache.kh.data() + ((b * heads + h) * lk + j) * dh;
          R acc = R(0);
          for (std::size_t x = 0; x < dh; ++x) acc += qrow[x] * krow[x];
          row[j] = acc * inv_sqrt;
        }
        nn::softmax_row(row, lk);
      }

  Tensor<R> probs_d = cache.probs;
  dropout_forward(probs_d, p_drop, train, rng, cache.drop);

  Tensor<R> ctx_h({b_sz, heads, lq, dh});
  for (std::size_t b = 0; b < b_sz; ++b)
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < lq; ++i) {
        const R* prow = probs_d.data() + ((b * heads + h) * lq + i) * lk;
        R* crow = ctx_h.data() + ((b * heads + h) * lq + i) * dh;
        for (std::size_t j = 0; j < lk; ++j) {
          const R p = prow[j];
          if (p == R(0)) continue;
          const R* vrow = cache.vh.data() + ((b * heads + h) * lk + j) * dh;
          for (std::size_t x = 0; x < dh; ++x) crow[x] += p * vrow[x];
        }
      }
  cache.ctx = merge_heads(ctx_h, b_sz, lq, heads, dh);

  Tensor<R> out({b_sz, lq, d});
  nn::linear_forward(cache.ctx.data(), w.wo->data(), w.bo->data(), out.data(),
                     b_sz * lq, d, d);
  return out;
}

template <typename R>
struct AttnGrads {
  Tensor<R>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
};

template <typename R>
AttnGrads<R> attn_grads(ParamMap<R>& grads, const std::string& p) {
  return {&grads.at(p + ".wq"), &grads.at(p + ".bq"), &grads.at(p + ".wk"),
          &grads.at(p + ".bk"), &grads.at(p + ".wv"), &grads.at(p + ".bv"),
          &grads.at(p + ".wo"), &grads.at(p + ".bo")};
}

// Returns (dq_in, dkv_in); accumulates parameter gradients.
template <typename R>
std::pair<Tensor<R>, Tensor<R>> mha_backward(const Tensor<R>& dout,
                                             const AttnParams<R>& w,
                                             const AttnGrads<R>& g,
                                             std::size_t heads,
                                             const MhaCache<R>& cache) {
  const std::size_t b_sz = cache.q_in.dim(0), lq = cache.q_in.dim(1),
                    d = cache.q_in.dim(2);
  const std::size_t lk = cache.kv_in.dim(1);
  const std::size_t dh = d / heads;
  const R inv_sqrt = static_cast<R>(1.0 / std::sqrt(static_cast<double>(dh)));

  // Through the output projection.
  Tensor<R> dctx({b_sz, lq, d});
  nn::linear_backward(cache.ctx.data(), w.wo->data(), dout.data(),
                      dctx.data(), g.wo->data(), g.bo->data(), b_sz * lq, d,
                      d);
  Tensor<R> dctx_h = split_heads(dctx, b_sz, lq, heads, dh);

  // probs after dropout (recomputed), for dV.
  Tensor<R> probs_d = cache.probs;
  if (!cache.drop.keep.empty()) {
    const R scale = R(1) / cache.drop.keep_prob;
    for (std::size_t i = 0; i < probs_d.numel(); ++i)
      probs_d.v[i] = cache.drop.keep[i] ? probs_d.v[i] * scale : R(0);
  }

  Tensor<R> dqh({b_sz, heads, lq, dh}), dkh({b_sz, heads, lk, dh}),
      dvh({b_sz, heads, lk, dh});
  std::vector<R> dprobs(lk);
  for (std::size_t b = 0; b < b_sz; ++b)
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t base_q = (b * heads + h) * lq;
      const std::size_t base_k = (b * heads + h) * lk;
      for (std::size_t i = 0; i < lq; ++i) {
        const R* dcrow = dctx_h.data() + (base_q + i) * dh;
        const R* pdrow = probs_d.data() + (base_q + i) * lk;
        // dPd and dV
        for (std::size_t j = 0; j < lk; ++j) {
          const R* vrow = cache.vh.data() + (base_k + j) * dh;
          R acc = R(0);
          for (std::size_t x = 0; x < dh; ++x) acc += dcrow[x] * vrow[x];
          dprobs[j] = acc;
          const R p = pdrow[j];
          if (p != R(0)) {
            R* dvrow = dvh.data() + (base_k + j) * dh;
            for (std::size_t x = 0; x < dh; ++x) dvrow[x] += p * dcrow[x];
          }
        }
        // dropout backward on the attention probabilities
        if (!cache.drop.keep.empty()) {
          const R scale = R(1) / cache.drop.keep_prob;
          const std::uint8_t* keep = cache.drop.keep.data() + (base_q + i) * lk;
          for (std::size_t j = 0; j < lk; ++j)
            dprobs[j] = keep[j] ? dprobs[j] * scale : R(0);
        }
        // softmax backward: dS = P o (dP - sum(dP o P))
        const R* prow = cache.probs.data() + (base_q + i) * lk;
        R dot = R(0);
        for (std::size_t j = 0; j < lk; ++j) dot += dprobs[j] * prow[j];
        const R* qrow = cache.qh.data() + (base_q + i) * dh;
        R* dqrow = dqh.data() + (base_q + i) * dh;
        for (std::size_t j = 0; j < lk; ++j) {
          const R ds = prow[j] * (dprobs[j] - dot) * inv_sqrt;
          if (ds == R(0)) continue;
          const R* krow = cache.kh.data() + (base_k + j) * dh;
          R* dkrow = dkh.data() + (base_k + j) * dh;
          for (std::size_t x = 0; x < dh; ++x) {
            dqrow[x] += ds * krow[x];
            dkrow[x] += ds * qrow[x];
          }
        }
      }
    }

  const Tensor<R> dq_flat = merge_heads(dqh, b_sz, lq, heads, dh);
  const Tensor<R> dk_flat = merge_heads(dkh, b_sz, lk, heads, dh);
  const Tensor<R> dv_flat = merge_heads(dvh, b_sz, lk, heads, dh);

  Tensor<R> dq_in({b_sz, lq, d});
  nn::linear_backward(cache.q_in.data(), w.wq->data(), dq_flat.data(),
                      dq_in.data(), g.wq->data(), g.bq->data(), b_sz * lq, d,
                      d);
  Tensor<R> dkv_in({b_sz, lk, d});
  Tensor<R> dkv_tmp({b_sz, lk, d});
  nn::linear_backward(cache.kv_in.data(), w.wk->data(), dk_flat.data(),
                      dkv_in.data(), g.wk->data(), g.bk->data(), b_sz * lk, d,
                      d);
  nn::linear_backward(cache.kv_in.data(), w.wv->data(), dv_flat.data(),
                      dkv_tmp.data(), g.wv->data(), g.bv->data(), b_sz * lk,
                      d, d);
  for (std::size_t i = 0; i < dkv_in.numel(); ++i)
    dkv_in.v[i] += dkv_tmp.v[i];
  return {std::move(dq_in), std::move(dkv_in)};
}

template <typename R>
struct FfnCache {
  Tensor<R> x;       // input (B,L,D)
  Tensor<R> h_relu;  // post-relu, pre-dropout (rows, F)
  DropoutCache<R> drop;
};

template <typename R>
Tensor<R> ffn_forward(const Tensor<R>& x, const ParamMap<R>& params,
                      const std::string& p, double p_drop, bool train,
                      Rng* rng, FfnCache<R>& cache) {
  const Tensor<R>& w1 = params.at(p + ".w1");
  const Tensor<R>& b1 = params.at(p + ".b1");
  const Tensor<R>& w2 = params.at(p + ".w2");
  const Tensor<R>& b2 = params.at(p + ".b2");
  const std::size_t d = x.shape.back();
  const std::size_t rows = x.numel() / d;
  const std::size_t f = w1.dim(0);

  cache.x = x;
  cache.h_relu = Tensor<R>({rows, f});
  nn::linear_forward(x.data(), w1.data(), b1.data(), cache.h_relu.data(),
                     rows, d, f);
  for (auto& h : cache.h_relu.v) h = h > R(0) ? h : R(0);

  Tensor<R> h_drop = cache.h_relu;
  dropout_forward(h_drop, p_drop, train, rng, cache.drop);

  Tensor<R> y(x.shape);
  nn::linear_forward(h_drop.data(), w2.data(), b2.data(), y.data(), rows, f,
                     d);
  return y;
}

template <typename R>
Tensor<R> ffn_backward(const Tensor<R>& dy, const ParamMap<R>& params,
                       ParamMap<R>& grads, const std::string& p,
                       const FfnCache<R>& cache) {
  const Tensor<R>& w1 = params.at(p + ".w1");
  const Tensor<R>& w2 = params.at(p + ".w2");
  const std::size_t d = dy.shape.back();
  const std::size_t rows = dy.numel() / d;
  const std::size_t f = w1.dim(0);

  // recompute dropped activations for the w2 gradient
  Tensor<R> h_drop = cache.h_relu;
  if (!cache.drop.keep.empty()) {
    const R scale = R(1) / cache.drop.keep_prob;
    for (std::size_t i = 0; i < h_drop.numel(); ++i)
      h_drop.v[i] = cache.drop.keep[i] ? h_drop.v[i] * scale : R(0);
  }

  Tensor<R> dh({rows, f});
  nn::linear_backward(h_drop.data(), w2.data(), dy.data(), dh.data(),
                      grads.at(p + ".w2").data(), grads.at(p + ".b2").data(),
                      rows, f, d);
  dropout_backward(dh, cache.drop);
  for (std::size_t i = 0; i < dh.numel(); ++i)
    if (cache.h_relu.v[i] <= R(0)) dh.v[i] = R(0);

  Tensor<R> dx(cache.x.shape);
  nn::linear_backward(cache.x.data(), w1.data(), dh.data(), dx.data(),
                      grads.at(p + ".w1").data(), grads.at(p + ".b1").data(),
                      rows, d, f);
  return dx;
}

template <typename R>
void add_inplace(Tensor<R>& a, const Tensor<R>& b) {
  for (std::size_t i = 0; i < a.numel(); ++i) a.v[i] += b.v[i];
}

template <typename R>
struct EncLayerCache {
  MhaCache<R> attn;
  LayerNormCache<R> ln1, ln2;
  FfnCache<R> ffn;
};

template <typename R>
struct DecLayerCache {
  MhaCache<R> self_attn, cross_attn;
  LayerNormCache<R> ln1, ln2, ln3;
  FfnCache<R> ffn;
};

}  // namespace detail

// ---- Full model forward / backward ---------------------------------------

template <typename R>
struct ForwardCache {
  Batch batch;
  detail::EmbedCache<R> src_embed, tgt_embed;
  std::vector<detail::EncLayerCache<R>> enc;
  std::vector<detail::DecLayerCache<R>> dec;
  detail::LayerNormCache<R> enc_final_ln, dec_final_ln;
  Tensor<R> memory;   // encoder output (B,S,D)
  Tensor<R> dec_out;  // decoder output fed to the logit projection
};

namespace detail {

template <typename R>
Tensor<R> encoder_layer_forward(const Tensor<R>& x, const ParamMap<R>& params,
                                const ModelConfig& cfg, const std::string& p,
                                const MaskSpec& mask, bool train, Rng* rng,
                                EncLayerCache<R>& cache) {
  const auto aw = attn_params(params, p + ".attn");
  const double pd = cfg.dropout;
  if (cfg.pre_layernorm) {
    Tensor<R> n1 = layernorm_forward(x, params.at(p + ".attn_ln.gain"),
                                     params.at(p + ".attn_ln.bias"), cache.ln1);
    Tensor<R> a = mha_forward(n1, n1, aw, cfg.n_heads, mask, pd, train, rng,
                              cache.attn);
    add_inplace(a, x);  // r1 = x + attn
    Tensor<R> n2 = layernorm_forward(a, params.at(p + ".ffn_ln.gain"),
                                     params.at(p + ".ffn_ln.bias"), cache.ln2);
    Tensor<R> f =
        ffn_forward(n2, params, p + ".ffn", pd, train, rng, cache.ffn);
    add_inplace(f, a);  // out = r1 + ffn
    return f;
  }
  Tensor<R> a =
      mha_forward(x, x, aw, cfg.n_heads, mask, pd, train, rng, cache.attn);
  add_inplace(a, x);
  Tensor<R> y1 = layernorm_forward(a, params.at(p + ".attn_ln.gain"),
                                   params.at(p + ".attn_ln.bias"), cache.ln1);
  Tensor<R> f = ffn_forward(y1, params, p + ".ffn", pd, train, rng, cache.ffn);
  add_inplace(f, y1);
  return layernorm_forward(f, params.at(p + ".ffn_ln.gain"),
                           params.at(p + ".ffn_ln.bias"), cache.ln2);
}

template <typename R>
Tensor<R> encoder_layer_backward(const Tensor<R>& dout,
                                 const ParamMap<R>& params,
                                 ParamMap<R>& grads, const ModelConfig& cfg,
                                 const std::string& p,
                                 const EncLayerCache<R>& cache) {
  const auto aw = attn_params(params, p + ".attn");
  auto ag = attn_grads(grads, p + ".attn");
  if (cfg.pre_layernorm) {
    // out = r1 + ffn(ln2(r1)); r1 = x + attn(ln1(x))
    Tensor<R> dr1 = dout;
    Tensor<R> dn2 = ffn_backward(dout, params, grads, p + ".ffn", cache.ffn);
    add_inplace(dr1, layernorm_backward(dn2, params.at(p + ".ffn_ln.gain"),
                                        cache.ln2,
                                        grads.at(p + ".ffn_ln.gain"),
                                        grads.at(p + ".ffn_ln.bias")));
    Tensor<R> dx = dr1;
    auto [dq, dkv] = mha_backward(dr1, aw, ag, cfg.n_heads, cache.attn);
    add_inplace(dq, dkv);
    add_inplace(dx, layernorm_backward(dq, params.at(p + ".attn_ln.gain"),
                                       cache.ln1,
                                       grads.at(p + ".attn_ln.gain"),
                                       grads.at(p + ".attn_ln.bias")));
    return dx;
  }
  // out = ln2(y1 + ffn(y1)); y1 = ln1(x + attn(x))
  Tensor<R> dr2 = layernorm_backward(dout, params.at(p + ".ffn_ln.gain"),
                                     cache.ln2, grads.at(p + ".ffn_ln.gain"),
                                     grads.at(p + ".ffn_ln.bias"));
  Tensor<R> dy1 = dr2;
  add_inplace(dy1, ffn_backward(dr2, params, grads, p + ".ffn", cache.ffn));
  Tensor<R> dr1 = layernorm_backward(dy1, params.at(p + ".attn_ln.gain"),
                                     cache.ln1, grads.at(p + ".attn_ln.gain"),
                                     grads.at(p + ".attn_ln.bias"));
  Tensor<R> dx = dr1;
  auto [dq, dkv] = mha_backward(dr1, aw, ag, cfg.n_heads, cache.attn);
  add_inplace(dx, dq);
  add_inplace(dx, dkv);
  return dx;
}

template <typename R>
Tensor<R> decoder_layer_forward(const Tensor<R>& x, const Tensor<R>& memory,
                                const ParamMap<R>& params,
                                const ModelConfig& cfg, const std::string& p,
                                const MaskSpec& self_mask,
                                const MaskSpec& cross_mask, bool train,
                                Rng* rng, DecLayerCache<R>& cache) {
  const auto sw = attn_params(params, p + ".self_attn");
  const auto cw = attn_params(params, p + ".cross_attn");
  const double pd = cfg.dropout;
  if (cfg.pre_layernorm) {
    Tensor<R> n1 =
        layernorm_forward(x, params.at(p + ".self_attn_ln.gain"),
                          params.at(p + ".self_attn_ln.bias"), cache.ln1);
    Tensor<R> a = mha_forward(n1, n1, sw, cfg.n_heads, self_mask, pd, train,
                              rng, cache.self_attn);
    add_inplace(a, x);  // r1
    Tensor<R> n2 =
        layernorm_forward(a, params.at(p + ".cross_attn_ln.gain"),
                          params.at(p + ".cross_attn_ln.bias"), cache.ln2);
    Tensor<R> c = mha_forward(n2, memory, cw, cfg.n_heads, cross_mask, pd,
                              train, rng, cache.cross_attn);
    add_inplace(c, a);  // r2
    Tensor<R> n3 = layernorm_forward(c, params.at(p + ".ffn_ln.gain"),
                                     params.at(p + ".ffn_ln.bias"), cache.ln3);
    Tensor<R> f =
        ffn_forward(n3, params, p + ".ffn", pd, train, rng, cache.ffn);
    add_inplace(f, c);
    return f;
  }
  Tensor<R> a = mha_forward(x, x, sw, cfg.n_heads, self_mask, pd, train, rng,
                            cache.self_attn);
  add_inplace(a, x);
  Tensor<R> y1 =
      layernorm_forward(a, params.at(p + ".self_attn_ln.gain"),
                        params.at(p + ".self_attn_ln.bias"), cache.ln1);
  Tensor<R> c = mha_forward(y1, memory, cw, cfg.n_heads, cross_mask, pd,
                            train, rng, cache.cross_attn);
  add_inplace(c, y1);
  Tensor<R> y2 =
      layernorm_forward(c, params.at(p + ".cross_attn_ln.gain"),
                        params.at(p + ".cross_attn_ln.bias"), cache.ln2);
  Tensor<R> f = ffn_forward(y2, params, p + ".ffn", pd, train, rng, cache.ffn);
  add_inplace(f, y2);
  return layernorm_forward(f, params.at(p + ".ffn_ln.gain"),
                           params.at(p + ".ffn_ln.bias"), cache.ln3);
}

// Returns dx; accumulates dmemory.
template <typename R>
Tensor<R> decoder_layer_backward(const Tensor<R>& dout,
                                 const ParamMap<R>& params,
                                 ParamMap<R>& grads, const ModelConfig& cfg,
                                 const std::string& p,
                                 const DecLayerCache<R>& cache,
                                 Tensor<R>& dmemory) {
  const auto sw = attn_params(params, p + ".self_attn");
  const auto cw = attn_params(params, p + ".cross_attn");
  auto sg = attn_grads(grads, p + ".self_attn");
  auto cg = attn_grads(grads, p + ".cross_attn");
  if (cfg.pre_layernorm) {
    // out = r2 + ffn(ln3(r2)); r2 = r1 + cross(ln2(r1), mem);
    // r1 = x + self(ln1(x))
    Tensor<R> dr2 = dout;
    Tensor<R> dn3 = ffn_backward(dout, params, grads, p + ".ffn", cache.ffn);
    add_inplace(dr2, layernorm_backward(dn3, params.at(p + ".ffn_ln.gain"),
                                        cache.ln3,
                                        grads.at(p + ".ffn_ln.gain"),
                                        grads.at(p + ".ffn_ln.bias")));
    Tensor<R> dr1 = dr2;
    auto [dcq, dmem] =
        mha_backward(dr2, cw, cg, cfg.n_heads, cache.cross_attn);
    add_inplace(dmemory, dmem);
    add_inplace(dr1,
                layernorm_backward(dcq, params.at(p + ".cross_attn_ln.gain"),
                                   cache.ln2,
                                   grads.at(p + ".cross_attn_ln.gain"),
                                   grads.at(p + ".cross_attn_ln.bias")));
    Tensor<R> dx = dr1;
    auto [dsq, dskv] =
        mha_backward(dr1, sw, sg, cfg.n_heads, cache.self_attn);
    add_inplace(dsq, dskv);
    add_inplace(dx,
                layernorm_backward(dsq, params.at(p + ".self_attn_ln.gain"),
                                   cache.ln1,
                                   grads.at(p + ".self_attn_ln.gain"),
                                   grads.at(p + ".self_attn_ln.bias")));
    return dx;
  }
  // out = ln3(y2 + ffn(y2)); y2 = ln2(y1 + cross(y1)); y1 = ln1(x + self(x))
  Tensor<R> dr3 = layernorm_backward(dout, params.at(p + ".ffn_ln.gain"),
                                     cache.ln3, grads.at(p + ".ffn_ln.gain"),
                                     grads.at(p + ".ffn_ln.bias"));
  Tensor<R> dy2 = dr3;
  add_inplace(dy2, ffn_backward(dr3, params, grads, p + ".ffn", cache.ffn));
  Tensor<R> dr2 =
      layernorm_backward(dy2, params.at(p + ".cross_attn_ln.gain"), cache.ln2,
                         grads.at(p + ".cross_attn_ln.gain"),
                         grads.at(p + ".cross_attn_ln.bias"));
  Tensor<R> dy1 = dr2;
  auto [dcq, dmem] = mha_backward(dr2, cw, cg, cfg.n_heads, cache.cross_attn);
  add_inplace(dmemory, dmem);
  add_inplace(dy1, dcq);
  Tensor<R> dr1 =
      layernorm_backward(dy1, params.at(p + ".self_attn_ln.gain"), cache.ln1,
                         grads.at(p + ".self_attn_ln.gain"),
                         grads.at(p + ".self_attn_ln.bias"));
  Tensor<R> dx = dr1;
  auto [dsq, dskv] = mha_backward(dr1, sw, sg, cfg.n_heads, cache.self_attn);
  add_inplace(dx, dsq);
  add_inplace(dx, dskv);
  return dx;
}

}  // namespace detail

template <typename R>
Tensor<R> run_encoder(const ModelConfig& cfg, const ParamMap<R>& params,
                      const IntMat& src, bool train, Rng* rng,
                      ForwardCache<R>& cache) {
  if (src.cols > cfg.max_source_positions)
    fail(ErrorKind::kLength,
         "source length " + std::to_string(src.cols) + " exceeds limit " +
             std::to_string(cfg.max_source_positions));
  Tensor<R> x = detail::embed_forward(src, params.at("src_embed"), cfg.d_model,
                                      cfg.dropout, train, rng, cache.src_embed);
  detail::MaskSpec mask{&src, false};
  cache.enc.resize(cfg.n_encoder_layers);
  for (std::size_t i = 0; i < cfg.n_encoder_layers; ++i)
    x = detail::encoder_layer_forward(x, params, cfg,
                                      "enc." + std::to_string(i), mask, train,
                                      rng, cache.enc[i]);
  if (cfg.pre_layernorm)
    x = detail::layernorm_forward(x, params.at("enc.final_ln.gain"),
                                  params.at("enc.final_ln.bias"),
                                  cache.enc_final_ln);
  cache.memory = x;
  return x;
}

template <typename R>
Tensor<R> run_decoder(const ModelConfig& cfg, const ParamMap<R>& params,
                      const IntMat& tgt_input, const Tensor<R>& memory,
                      const IntMat& src, bool train, Rng* rng,
                      ForwardCache<R>& cache) {
  if (tgt_input.cols > cfg.max_target_positions)
    fail(ErrorKind::kLength,
         "target length " + std::to_string(tgt_input.cols) +
             " exceeds limit " + std::to_string(cfg.max_target_positions));
  Tensor<R> x =
      detail::embed_forward(tgt_input, params.at("tgt_embed"), cfg.d_model,
                            cfg.dropout, train, rng, cache.tgt_embed);
  detail::MaskSpec self_mask{&tgt_input, true};
  detail::MaskSpec cross_mask{&src, false};
  cache.dec.resize(cfg.n_decoder_layers);
  for (std::size_t i = 0; i < cfg.n_decoder_layers; ++i)
    x = detail::decoder_layer_forward(x, memory, params, cfg,
                                      "dec." + std::to_string(i), self_mask,
                                      cross_mask, train, rng, cache.dec[i]);
  if (cfg.pre_layernorm)
    x = detail::layernorm_forward(x, params.at("dec.final_ln.gain"),
                                  params.at("dec.final_ln.bias"),
                                  cache.dec_final_ln);
  cache.dec_out = x;
  return x;
}

// logits[r, v] = hidden[r, :] . W_out[v, :]; W_out is the shared decoder
// embedding table unless the config says otherwise.
template <typename R>
Tensor<R> project_logits(const ModelConfig& cfg, const ParamMap<R>& params,
                         const Tensor<R>& hidden) {
  const Tensor<R>& w =
      cfg.share_decoder_io ? params.at("tgt_embed") : params.at("out_proj");
  const std::size_t d = cfg.d_model;
  const std::size_t rows = hidden.numel() / d;
  Tensor<R> logits({hidden.dim(0), hidden.dim(1), cfg.tgt_vocab_size});
  nn::linear_forward(hidden.data(), w.data(), static_cast<const R*>(nullptr),
                     logits.data(), rows, d, cfg.tgt_vocab_size);
  return logits;
}

// Teacher-forcing forward pass over a batch. The cache is required for a
// subsequent backward() call.
template <typename R>
Tensor<R> forward(const ModelConfig& cfg, const ParamMap<R>& params,
                  const Batch& batch, bool train, Rng* rng,
                  ForwardCache<R>& cache) {
  cfg.validate();
  if (train && cfg.dropout > 0.0 && rng == nullptr)
    fail(ErrorKind::kConfig, "train-mode forward with dropout needs an RNG");
  cache.batch = batch;
  const Tensor<R> memory =
      run_encoder(cfg, params, batch.src, train, rng, cache);
  const Tensor<R> hidden = run_decoder(cfg, params, batch.tgt_input, memory,
                                       batch.src, train, rng, cache);
  return project_logits(cfg, params, hidden);
}

template <typename R>
Tensor<R> forward(const ModelConfig& cfg, const ParamMap<R>& params,
                  const Batch& batch, bool train = false, Rng* rng = nullptr) {
  ForwardCache<R> cache;
  return forward(cfg, params, batch, train, rng, cache);
}

// Backpropagates d(loss)/d(logits) through the cached forward pass.
template <typename R>
ParamMap<R> backward(const ModelConfig& cfg, const ParamMap<R>& params,
                     const ForwardCache<R>& cache, const Tensor<R>& dlogits) {
  ParamMap<R> grads;
  for (const auto& [name, shape] : expected_shapes(cfg))
    grads.emplace(name, Tensor<R>(shape));

  const std::size_t d = cfg.d_model;
  const std::size_t rows = cache.dec_out.numel() / d;

  // Output projection.
  const Tensor<R>& w_out =
      cfg.share_decoder_io ? params.at("tgt_embed") : params.at("out_proj");
  Tensor<R>& dw_out =
      cfg.share_decoder_io ? grads.at("tgt_embed") : grads.at("out_proj");
  Tensor<R> dhidden(cache.dec_out.shape);
  nn::linear_backward(cache.dec_out.data(), w_out.data(), dlogits.data(),
                      dhidden.data(), dw_out.data(), static_cast<R*>(nullptr),
                      rows, d, cfg.tgt_vocab_size);

  // Decoder stack.
  Tensor<R> dx = std::move(dhidden);
  if (cfg.pre_layernorm)
    dx = detail::layernorm_backward(dx, params.at("dec.final_ln.gain"),
                                    cache.dec_final_ln,
                                    grads.at("dec.final_ln.gain"),
                                    grads.at("dec.final_ln.bias"));
  Tensor<R> dmemory(cache.memory.shape);
  for (std::size_t i = cfg.n_decoder_layers; i-- > 0;)
    dx = detail::decoder_layer_backward(dx, params, grads, cfg,
                                        "dec." + std::to_string(i),
                                        cache.dec[i], dmemory);
  detail::embed_backward(std::move(dx), cache.tgt_embed, d,
                         grads.at("tgt_embed"));

  // Encoder stack.
  Tensor<R> de = std::move(dmemory);
  if (cfg.pre_layernorm)
    de = detail::layernorm_backward(de, params.at("enc.final_ln.gain"),
                                    cache.enc_final_ln,
                                    grads.at("enc.final_ln.gain"),
                                    grads.at("enc.final_ln.bias"));
  for (std::size_t i = cfg.n_encoder_layers; i-- > 0;)
    de = detail::encoder_layer_backward(de, params, grads, cfg,
                                        "enc." + std::to_string(i),
                                        cache.enc[i]);
  detail::embed_backward(std::move(de), cache.src_embed, d,
                         grads.at("src_embed"));
  return grads;
}

// ---- Inference-side entry points ------------------------------------------

template <typename R>
struct EncoderMemory {
  Tensor<R> states;  // (B, S, d_model)
  IntMat src;        // retained for pad masking in cross-attention
};

template <typename R>
EncoderMemory<R> encode_source(const ModelConfig& cfg,
                               const ParamMap<R>& params, const IntMat& src) {
  cfg.validate();
  ForwardCache<R> cache;
  EncoderMemory<R> mem;
  mem.states = run_encoder(cfg, params, src, /*train=*/false, nullptr, cache);
  mem.src = src;
  return mem;
}

// Log-probabilities over the target vocabulary for the token following the
// prefix (which must start with bos). Equals the last-position slice of a
// full eval-mode forward pass.
template <typename R>
std::vector<R> decode_step(const ModelConfig& cfg, const ParamMap<R>& params,
                           const EncoderMemory<R>& memory,
                           const std::vector<std::int32_t>& prefix) {
  if (prefix.empty() || prefix.front() != kBosId)
    fail(ErrorKind::kInput, "decode_step prefix must start with bos");
  if (prefix.size() > cfg.max_target_positions)
    fail(ErrorKind::kLength,
         "prefix length " + std::to_string(prefix.size()) +
             " exceeds limit " + std::to_string(cfg.max_target_positions));
  IntMat tgt(1, prefix.size());
  for (std::size_t i = 0; i < prefix.size(); ++i) tgt.at(0, i) = prefix[i];
  ForwardCache<R> cache;
  const Tensor<R> hidden = run_decoder(cfg, params, tgt, memory.states,
                                       memory.src, /*train=*/false, nullptr,
                                       cache);
  const Tensor<R> logits = project_logits(cfg, params, hidden);
  const std::size_t v = cfg.tgt_vocab_size;
  std::vector<R> logprobs(v);
  nn::log_softmax_row(logits.data() + (prefix.size() - 1) * v,
                      logprobs.data(), v);
  return logprobs;
}

// Loss hook: maps logits and gold output ids to (total loss, token count,
// d loss / d logits).
template <typename R>
struct LossGrad {
  R loss = R(0);
  std::size_t tokens = 0;
  Tensor<R> dlogits;
};

template <typename R>
struct GradResult {
  ParamMap<R> grads;
  R loss = R(0);
  std::size_t tokens = 0;
};

// Composition used by the training loop: forward, loss, backward.
template <typename R, typename LossFn>
GradResult<R> grad(const ModelConfig& cfg, const ParamMap<R>& params,
                   const Batch& batch, LossFn&& loss_fn, bool train,
                   Rng* rng) {
  ForwardCache<R> cache;
  const Tensor<R> logits = forward(cfg, params, batch, train, rng, cache);
  LossGrad<R> lg = loss_fn(logits, batch.tgt_output);
  GradResult<R> out;
  out.loss = lg.loss;
  out.tokens = lg.tokens;
  out.grads = backward(cfg, params, cache, lg.dlogits);
  return out;
}

}  // namespace minimt::transformer
