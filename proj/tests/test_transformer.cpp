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

#include "minimt/transformer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "minimt/training.hpp"

namespace tr = minimt::transformer;
using minimt::IntMat;
using minimt::ParamMap;
using minimt::Rng;
using minimt::Tensor;

namespace {

tr::ModelConfig toy_config(std::size_t src_v = 17, std::size_t tgt_v = 19) {
  tr::ModelConfig cfg = tr::preset("toy");
  cfg.src_vocab_size = src_v;
  cfg.tgt_vocab_size = tgt_v;
  cfg.dropout = 0.0;
  return cfg;
}

tr::Batch toy_batch() {
  return tr::make_batch({
      {{4, 5, 6, 7}, {4, 5, 6}},
      {{8, 9, 10}, {7, 8, 9, 10}},
  });
}

// Closed-form parameter count derived from the layer shapes alone.
std::size_t expected_param_count(const tr::ModelConfig& c) {
  const std::size_t d = c.d_model, f = c.ffn_dim;
  const std::size_t attn = 4 * (d * d + d);
  const std::size_t ln = 2 * d;
  const std::size_t ffn = f * d + f + d * f + d;
  const std::size_t enc_layer = attn + 2 * ln + ffn;
  const std::size_t dec_layer = 2 * attn + 3 * ln + ffn;
  std::size_t total = c.src_vocab_size * d + c.tgt_vocab_size * d;
  if (!c.share_decoder_io) total += c.tgt_vocab_size * d;
  total += c.n_encoder_layers * enc_layer + c.n_decoder_layers * dec_layer;
  if (c.pre_layernorm) total += 2 * ln;
  return total;
}

}  // namespace

TEST(Presets, KnownShapes) {
  const auto iwslt = tr::preset("iwslt-de-en");
  EXPECT_EQ(iwslt.d_model, 512u);
  EXPECT_EQ(iwslt.ffn_dim, 1024u);
  EXPECT_EQ(iwslt.n_heads, 4u);
  EXPECT_FALSE(iwslt.pre_layernorm);
  const auto t2t = tr::preset("wmt-en-de-big-t2t");
  EXPECT_EQ(t2t.d_model, 1024u);
  EXPECT_TRUE(t2t.pre_layernorm);
  const auto vaswani = tr::preset("vaswani-wmt-en-de-big");
  EXPECT_FALSE(vaswani.pre_layernorm);
  EXPECT_EQ(vaswani.n_heads, 16u);
  EXPECT_EQ(tr::preset("wmt-en-de").ffn_dim, 2048u);
  EXPECT_TRUE(tr::preset("toy").share_decoder_io);
  EXPECT_THROW(tr::preset("nope"), minimt::Error);
}

TEST(InitParams, DeterministicBitwise) {
  const auto cfg = toy_config();
  const auto a = tr::init_params<float>(cfg, 0);
  const auto b = tr::init_params<float>(cfg, 0);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [name, t] : a) {
    const auto& u = b.at(name);
    ASSERT_EQ(t.shape, u.shape) << name;
    EXPECT_EQ(std::memcmp(t.data(), u.data(), t.numel() * sizeof(float)), 0)
        << name;
  }
  const auto c = tr::init_params<float>(cfg, 1);
  EXPECT_NE(std::memcmp(a.at("src_embed").data(), c.at("src_embed").data(),
                        a.at("src_embed").numel() * sizeof(float)),
            0);
}

TEST(InitParams, GainsOneBiasesZeroPadRowZero) {
  const auto cfg = toy_config();
  const auto p = tr::init_params<float>(cfg, 0);
  for (const float g : p.at("enc.0.attn_ln.gain").v) EXPECT_EQ(g, 1.0f);
  for (const float b : p.at("dec.1.ffn_ln.bias").v) EXPECT_EQ(b, 0.0f);
  for (const float b : p.at("enc.0.attn.bq").v) EXPECT_EQ(b, 0.0f);
  const auto& emb = p.at("src_embed");
  for (std::size_t j = 0; j < cfg.d_model; ++j)
    EXPECT_EQ(emb.v[tr::kPadId * cfg.d_model + j], 0.0f);
}

TEST(InitParams, CountMatchesShapeArithmetic) {
  for (const auto& name : tr::preset_names()) {
    auto cfg = tr::preset(name);
    cfg.src_vocab_size = 101;
    cfg.tgt_vocab_size = 97;
    EXPECT_EQ(tr::param_count(cfg), expected_param_count(cfg)) << name;
    cfg.share_decoder_io = false;
    EXPECT_EQ(tr::param_count(cfg), expected_param_count(cfg)) << name;
    const auto params = tr::init_params<float>(cfg, 0);
    EXPECT_EQ(minimt::total_numel(params), tr::param_count(cfg)) << name;
  }
}

TEST(Forward, LogitShape) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  const auto batch = toy_batch();
  const auto logits = tr::forward(cfg, params, batch);
  ASSERT_EQ(logits.shape.size(), 3u);
  EXPECT_EQ(logits.dim(0), 2u);
  EXPECT_EQ(logits.dim(1), batch.tgt_input.cols);
  EXPECT_EQ(logits.dim(2), cfg.tgt_vocab_size);
}

TEST(Forward, EvalModeDeterministic) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  const auto batch = toy_batch();
  const auto a = tr::forward(cfg, params, batch);
  const auto b = tr::forward(cfg, params, batch);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.numel() * sizeof(float)), 0);
}

TEST(Forward, CausalityInTargetPositions) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  auto batch = toy_batch();
  const auto base = tr::forward(cfg, params, batch);
  // Change the last target input token of row 0; logits at positions
  // before it must not move.
  tr::Batch mutated = batch;
  const std::size_t t_last = mutated.tgt_input.cols - 1;
  mutated.tgt_input.at(0, t_last) = 12;
  const auto changed = tr::forward(cfg, params, mutated);
  const std::size_t v = cfg.tgt_vocab_size;
  for (std::size_t t = 0; t < t_last; ++t)
    for (std::size_t k = 0; k < v; ++k)
      EXPECT_EQ(base.v[(0 * base.dim(1) + t) * v + k],
                changed.v[(0 * base.dim(1) + t) * v + k])
          << "t=" << t;
}

TEST(Forward, PadColumnsDoNotChangeLogits) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  const auto batch = toy_batch();
  const auto base = tr::forward(cfg, params, batch);

  tr::Batch padded = batch;
  padded.src = IntMat(batch.src.rows, batch.src.cols + 3, tr::kPadId);
  for (std::size_t r = 0; r < batch.src.rows; ++r)
    for (std::size_t c = 0; c < batch.src.cols; ++c)
      padded.src.at(r, c) = batch.src.at(r, c);
  const auto with_pads = tr::forward(cfg, params, padded);
  ASSERT_EQ(base.numel(), with_pads.numel());
  for (std::size_t i = 0; i < base.numel(); ++i)
    ASSERT_NEAR(base.v[i], with_pads.v[i], 1e-6f);
}

TEST(EncodeSource, DeterministicShapeAndBatchIndependence) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  IntMat one(1, 4);
  IntMat two(2, 4);
  for (std::size_t c = 0; c < 4; ++c) {
    one.at(0, c) = static_cast<std::int32_t>(4 + c);
    two.at(0, c) = static_cast<std::int32_t>(4 + c);
    two.at(1, c) = static_cast<std::int32_t>(8 + c);
  }
  const auto m1 = tr::encode_source(cfg, params, one);
  const auto m1b = tr::encode_source(cfg, params, one);
  const auto m2 = tr::encode_source(cfg, params, two);
  EXPECT_EQ(m1.states.shape,
            (std::vector<std::size_t>{1, 4, cfg.d_model}));
  EXPECT_EQ(std::memcmp(m1.states.data(), m1b.states.data(),
                        m1.states.numel() * sizeof(float)),
            0);
  for (std::size_t i = 0; i < m1.states.numel(); ++i)
    ASSERT_NEAR(m1.states.v[i], m2.states.v[i], 1e-6f) << i;
}

TEST(DecodeStep, LogProbsNormalized) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  IntMat src(1, 3);
  src.at(0, 0) = 4;
  src.at(0, 1) = 5;
  src.at(0, 2) = 6;
  const auto mem = tr::encode_source(cfg, params, src);
  const auto lp = tr::decode_step(cfg, params, mem, {tr::kBosId, 4, 7});
  double sum = 0.0;
  for (const float x : lp) sum += std::exp(static_cast<double>(x));
  EXPECT_NEAR(sum, 1.0, 1e-5);
}

TEST(DecodeStep, MatchesLastPositionOfForward) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  const std::vector<std::int32_t> src_ids = {4, 5, 6, 7};
  const std::vector<std::int32_t> prefix = {tr::kBosId, 4, 9, 11};

  IntMat src(1, src_ids.size());
  for (std::size_t i = 0; i < src_ids.size(); ++i)
    src.at(0, i) = src_ids[i];
  const auto mem = tr::encode_source(cfg, params, src);
  const auto lp = tr::decode_step(cfg, params, mem, prefix);

  // Oracle: a full teacher-forcing forward over the same prefix.
  tr::Batch batch;
  batch.src = src;
  batch.tgt_input = IntMat(1, prefix.size());
  for (std::size_t i = 0; i < prefix.size(); ++i)
    batch.tgt_input.at(0, i) = prefix[i];
  batch.tgt_output = IntMat(1, prefix.size(), tr::kPadId);
  const auto logits = tr::forward(cfg, params, batch);
  const std::size_t v = cfg.tgt_vocab_size;
  std::vector<float> oracle(v);
  minimt::nn::log_softmax_row(
      logits.data() + (prefix.size() - 1) * v, oracle.data(), v);
  for (std::size_t k = 0; k < v; ++k)
    EXPECT_NEAR(lp[k], oracle[k], 1e-6f) << k;
}

TEST(DecodeStep, UntrainedModelNearUniform) {
  // Measured on the seed-0 toy init: entropy stays close to log V.
  const auto cfg = toy_config(17, 23);
  const auto params = tr::init_params<float>(cfg, 0);
  IntMat src(1, 4);
  for (std::size_t i = 0; i < 4; ++i)
    src.at(0, i) = static_cast<std::int32_t>(4 + i);
  const auto mem = tr::encode_source(cfg, params, src);
  const auto lp = tr::decode_step(cfg, params, mem, {tr::kBosId});
  double entropy = 0.0;
  for (const float x : lp)
    entropy -= std::exp(static_cast<double>(x)) * static_cast<double>(x);
  const double max_entropy = std::log(static_cast<double>(cfg.tgt_vocab_size));
  EXPECT_GT(entropy, 0.80 * max_entropy);
  EXPECT_LE(entropy, max_entropy + 1e-9);
}

TEST(DecodeStep, RejectsBadPrefix) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  IntMat src(1, 2);
  src.at(0, 0) = 4;
  src.at(0, 1) = 5;
  const auto mem = tr::encode_source(cfg, params, src);
  EXPECT_THROW(tr::decode_step(cfg, params, mem, {}), minimt::Error);
  EXPECT_THROW(tr::decode_step(cfg, params, mem, {7}), minimt::Error);
  std::vector<std::int32_t> long_prefix(cfg.max_target_positions + 1,
                                        tr::kBosId);
  EXPECT_THROW(tr::decode_step(cfg, params, mem, long_prefix), minimt::Error);
}

TEST(Forward, LengthLimitEnforced) {
  auto cfg = toy_config();
  cfg.max_source_positions = 4;
  const auto params = tr::init_params<float>(cfg, 0);
  auto batch = tr::make_batch({{{4, 5, 6, 7, 8}, {4}}});
  try {
    tr::forward(cfg, params, batch);
    FAIL() << "expected length error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kLength);
  }
}

TEST(WeightSharing, SharedTableDrivesBothEnds) {
  auto cfg = toy_config();
  ASSERT_TRUE(cfg.share_decoder_io);
  auto params = tr::init_params<float>(cfg, 0);
  EXPECT_EQ(params.count("out_proj"), 0u);

  const auto batch = toy_batch();
  const auto base = tr::forward(cfg, params, batch);
  // Perturb one row of the decoder embedding: the logit column of that
  // token moves everywhere (it is also the output projection row).
  const std::int32_t token = 13;
  for (std::size_t j = 0; j < cfg.d_model; ++j)
    params.at("tgt_embed").v[static_cast<std::size_t>(token) * cfg.d_model + j] +=
        0.25f;
  const auto bumped = tr::forward(cfg, params, batch);
  const std::size_t v = cfg.tgt_vocab_size;
  bool column_moved = false;
  for (std::size_t r = 0; r < base.numel() / v; ++r)
    if (base.v[r * v + static_cast<std::size_t>(token)] !=
        bumped.v[r * v + static_cast<std::size_t>(token)])
      column_moved = true;
  EXPECT_TRUE(column_moved);
}

TEST(Grad, NoOutProjGradientWhenShared) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<float>(cfg, 0);
  const auto batch = toy_batch();
  auto gr = tr::grad(
      cfg, params, batch,
      [](const Tensor<float>& logits, const IntMat& tgt) {
        return minimt::training::label_smoothed_ce(logits, tgt, 0.1);
      },
      false, nullptr);
  EXPECT_EQ(gr.grads.count("out_proj"), 0u);
  EXPECT_GT(gr.tokens, 0u);

  auto unshared = cfg;
  unshared.share_decoder_io = false;
  const auto params2 = tr::init_params<float>(unshared, 0);
  auto gr2 = tr::grad(
      unshared, params2, batch,
      [](const Tensor<float>& logits, const IntMat& tgt) {
        return minimt::training::label_smoothed_ce(logits, tgt, 0.1);
      },
      false, nullptr);
  EXPECT_EQ(gr2.grads.count("out_proj"), 1u);
}

TEST(Grad, DuplicatedExampleDoublesSummedGradient) {
  const auto cfg = toy_config();
  const auto params = tr::init_params<double>(cfg, 0);
  const auto single = tr::make_batch({{{4, 5, 6}, {7, 8}}});
  const auto doubled = tr::make_batch({{{4, 5, 6}, {7, 8}},
                                       {{4, 5, 6}, {7, 8}}});
  const auto loss_fn = [](const Tensor<double>& logits, const IntMat& tgt) {
    return minimt::training::label_smoothed_ce(logits, tgt, 0.1);
  };
  const auto g1 = tr::grad(cfg, params, single, loss_fn, false, nullptr);
  const auto g2 = tr::grad(cfg, params, doubled, loss_fn, false, nullptr);
  EXPECT_NEAR(g2.loss, 2.0 * g1.loss, 1e-9);
  for (const auto& [name, t] : g1.grads) {
    const auto& u = g2.grads.at(name);
    for (std::size_t i = 0; i < t.numel(); ++i)
      ASSERT_NEAR(u.v[i], 2.0 * t.v[i], 1e-9) << name << "[" << i << "]";
  }
}

TEST(Dropout, TrainModeIsSeededAndEvalIgnoresRng) {
  auto cfg = toy_config();
  cfg.dropout = 0.3;
  const auto params = tr::init_params<float>(cfg, 0);
  const auto batch = toy_batch();
  Rng r1(42), r2(42), r3(7);
  const auto a = tr::forward(cfg, params, batch, true, &r1);
  const auto b = tr::forward(cfg, params, batch, true, &r2);
  const auto c = tr::forward(cfg, params, batch, true, &r3);
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.numel() * sizeof(float)), 0);
  EXPECT_NE(std::memcmp(a.data(), c.data(), a.numel() * sizeof(float)), 0);
  // Missing RNG in train mode with dropout is a config error.
  EXPECT_THROW(tr::forward(cfg, params, batch, true, nullptr), minimt::Error);
}
