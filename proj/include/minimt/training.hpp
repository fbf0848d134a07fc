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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "minimt/errors.hpp"
#include "minimt/rng.hpp"
#include "minimt/tensor.hpp"
#include "minimt/transformer.hpp"

// Training-side primitives: label-smoothed cross-entropy, the inverse-sqrt
// warmup schedule, Adam with coupled weight decay, and max-token batching
// with skip accounting.

namespace minimt::training {

struct TrainConfig {
  double peak_lr = 5e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.98;
  double adam_eps = 1e-8;
  double clip_norm = 0.0;  // 0 disables clipping
  std::size_t warmup_updates = 10000;
  double label_smoothing = 0.1;
  double weight_decay = 0.0001;
  bool decoupled_decay = false;  // default: decay added to the gradient
  std::size_t max_tokens = 4096;
  std::size_t update_freq = 2;
  double stop_ppl = 3.0;
  std::size_t max_epochs = 16;
  std::uint64_t seed = 0;

  void validate() const {
    if (peak_lr <= 0.0) fail(ErrorKind::kConfig, "peak_lr must be positive");
    if (!(label_smoothing >= 0.0 && label_smoothing < 1.0))
      fail(ErrorKind::kConfig, "label_smoothing must be in [0,1)");
    if (update_freq < 1) fail(ErrorKind::kConfig, "update_freq must be >= 1");
    if (warmup_updates < 1)
      fail(ErrorKind::kConfig, "warmup_updates must be >= 1");
    if (max_tokens < 1) fail(ErrorKind::kConfig, "max_tokens must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) ||
        !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      fail(ErrorKind::kConfig, "adam betas must be in [0,1)");
    if (clip_norm < 0.0) fail(ErrorKind::kConfig, "clip_norm must be >= 0");
    if (weight_decay < 0.0)
      fail(ErrorKind::kConfig, "weight_decay must be >= 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

struct TrainState {
  std::size_t epoch = 0;
  std::size_t updates = 0;
  double train_loss = 0.0;  // nats per token
  double valid_loss = 0.0;
  double valid_ppl = 0.0;

  bool operator==(const TrainState&) const = default;
};

template <typename R>
struct OptimizerState {
  ParamMap<R> m, v;
  std::size_t step = 0;
};

template <typename R>
OptimizerState<R> make_optimizer_state(const ParamMap<R>& params) {
  return {zeros_like(params), zeros_like(params), 0};
}

// ---- Label-smoothed cross-entropy -----------------------------------------
//
// Per non-pad token with smoothing eps and V classes:
//   loss = -(1-eps) log p(y) - eps/(V-1) * sum_{k != y} log p(k)
// Pad positions contribute nothing. Returned loss is the sum in nats.

template <typename R>
transformer::LossGrad<R> label_smoothed_ce(const Tensor<R>& logits,
                                           const IntMat& tgt_output,
                                           double eps,
                                           std::int32_t pad_id = transformer::kPadId,
                                           bool want_grad = true) {
  if (!(eps >= 0.0 && eps < 1.0))
    fail(ErrorKind::kConfig, "label smoothing must be in [0,1)");
  const std::size_t v = logits.shape.back();
  const std::size_t rows = logits.numel() / v;
  if (rows != tgt_output.rows * tgt_output.cols)
    fail(ErrorKind::kInput, "logits/target shape mismatch");

  transformer::LossGrad<R> out;
  if (want_grad) out.dlogits = Tensor<R>(logits.shape);
  double loss = 0.0;
  std::vector<R> logprobs(v);
  const double off_coeff = v > 1 ? eps / static_cast<double>(v - 1) : 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::int32_t y = tgt_output.v[r];
    if (y == pad_id) continue;
    ++out.tokens;
    const R* row = logits.data() + r * v;
    nn::log_softmax_row(row, logprobs.data(), v);
    double sum_lp = 0.0;
    for (std::size_t k = 0; k < v; ++k) sum_lp += logprobs[k];
    const double lp_y = logprobs[static_cast<std::size_t>(y)];
    loss += -(1.0 - eps) * lp_y - off_coeff * (sum_lp - lp_y);
    if (want_grad) {
      R* drow = out.dlogits.data() + r * v;
      for (std::size_t k = 0; k < v; ++k) {
        const R p = std::exp(logprobs[k]);
        const R coeff = (static_cast<std::int32_t>(k) == y)
                            ? static_cast<R>(1.0 - eps)
                            : static_cast<R>(off_coeff);
        drow[k] = p - coeff;
      }
    }
  }
  out.loss = static_cast<R>(loss);
  return out;
}

// ---- Inverse-sqrt schedule -------------------------------------------------
//
// Linear warmup from zero to peak_lr over warmup_updates, then decay
// proportional to 1/sqrt(step). Continuous at the warmup boundary.
inline double lr_at(std::size_t step, const TrainConfig& cfg) {
  if (step == 0) fail(ErrorKind::kInput, "lr_at: step must be >= 1");
  if (step <= cfg.warmup_updates)
    return cfg.peak_lr * static_cast<double>(step) /
           static_cast<double>(cfg.warmup_updates);
  return cfg.peak_lr * std::sqrt(static_cast<double>(cfg.warmup_updates) /
                                 static_cast<double>(step));
}

// ---- Adam -----------------------------------------------------------------

template <typename R>
void adam_step(ParamMap<R>& params, ParamMap<R>& grads,
               OptimizerState<R>& opt, const TrainConfig& cfg, double lr) {
  for (const auto& [name, g] : grads) {
    for (const R x : g.v)
      if (!std::isfinite(static_cast<double>(x)))
        fail(ErrorKind::kNumeric, "non-finite gradient in tensor " + name);
  }

  if (cfg.clip_norm > 0.0) {
    double sq = 0.0;
    for (const auto& [name, g] : grads)
      for (const R x : g.v) sq += static_cast<double>(x) * static_cast<double>(x);
    const double norm = std::sqrt(sq);
    if (norm > cfg.clip_norm) {
      const R scale = static_cast<R>(cfg.clip_norm / norm);
      for (auto& [name, g] : grads)
        for (R& x : g.v) x *= scale;
    }
  }

  ++opt.step;
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1,
                                    static_cast<double>(opt.step));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2,
                                    static_cast<double>(opt.step));
  const R b1 = static_cast<R>(cfg.adam_beta1), b2 = static_cast<R>(cfg.adam_beta2);
  for (auto& [name, w] : params) {
    const Tensor<R>& g = grads.at(name);
    Tensor<R>& m = opt.m.at(name);
    Tensor<R>& vv = opt.v.at(name);
    for (std::size_t i = 0; i < w.numel(); ++i) {
      R gi = g.v[i];
      if (cfg.weight_decay > 0.0 && !cfg.decoupled_decay)
        gi += static_cast<R>(cfg.weight_decay) * w.v[i];
      m.v[i] = b1 * m.v[i] + (R(1) - b1) * gi;
      vv.v[i] = b2 * vv.v[i] + (R(1) - b2) * gi * gi;
      const double mhat = static_cast<double>(m.v[i]) / bc1;
      const double vhat = static_cast<double>(vv.v[i]) / bc2;
      double delta = lr * mhat / (std::sqrt(vhat) + cfg.adam_eps);
      if (cfg.weight_decay > 0.0 && cfg.decoupled_decay)
        delta += lr * cfg.weight_decay * static_cast<double>(w.v[i]);
      w.v[i] -= static_cast<R>(delta);
    }
  }
}

// ---- Max-token batching -----------------------------------------------------

struct TokenPair {
  std::vector<std::int32_t> src;
  std::vector<std::int32_t> tgt;
};

struct BatchPlan {
  std::vector<std::vector<std::size_t>> batches;  // indices into the input
  std::size_t skipped = 0;                        // over-limit or empty pairs
};

// Length-bucketed batching: pairs sorted by padded cost, grouped so that
// rows x widest-side length stays within max_tokens, then the batch order
// is shuffled by seed. A lone pair over max_tokens still forms a singleton
// batch; only position-limit violations (and empty sides) are skipped.
inline BatchPlan make_batches(const std::vector<TokenPair>& pairs,
                              std::size_t max_tokens, std::uint64_t seed,
                              std::size_t max_src_positions,
                              std::size_t max_tgt_positions) {
  BatchPlan plan;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t s = pairs[i].src.size();
    const std::size_t t = pairs[i].tgt.size() + 1;  // bos/eos extend by one
    if (s == 0 || pairs[i].tgt.empty() || s > max_src_positions ||
        t > max_tgt_positions) {
      ++plan.skipped;
      continue;
    }
    idx.push_back(i);
  }
  const auto cost = [&](std::size_t i) {
    return std::max(pairs[i].src.size(), pairs[i].tgt.size() + 1);
  };
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::tuple(cost(a), pairs[a].src.size(), pairs[a].tgt.size(), a) <
           std::tuple(cost(b), pairs[b].src.size(), pairs[b].tgt.size(), b);
  });

  std::vector<std::size_t> current;
  std::size_t width = 0;
  for (const std::size_t i : idx) {
    const std::size_t w = std::max(width, cost(i));
    if (!current.empty() && (current.size() + 1) * w > max_tokens) {
      plan.batches.push_back(std::move(current));
      current.clear();
      width = 0;
    }
    width = std::max(width, cost(i));
    current.push_back(i);
  }
  if (!current.empty()) plan.batches.push_back(std::move(current));

  Rng rng(seed);
  rng.shuffle(plan.batches);
  return plan;
}

inline transformer::Batch build_batch(const std::vector<TokenPair>& pairs,
                                      const std::vector<std::size_t>& indices) {
  std::vector<std::pair<std::vector<std::int32_t>, std::vector<std::int32_t>>>
      rows;
  rows.reserve(indices.size());
  for (const std::size_t i : indices) rows.push_back({pairs[i].src, pairs[i].tgt});
  return transformer::make_batch(rows);
}

}  // namespace minimt::training
