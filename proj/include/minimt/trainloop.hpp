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

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "minimt/checkpoint.hpp"
#include "minimt/training.hpp"
#include "minimt/transformer.hpp"

// The training loop: accumulates update_freq micro-batch gradients into one
// Adam update (loss normalized by total accumulated non-pad tokens),
// validates and checkpoints per epoch, and stops once validation
// perplexity drops below stop_ppl.

namespace minimt::training {

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t updates = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double valid_ppl = 0.0;
};

struct TrainRun {
  TrainState state;
  std::size_t train_skipped = 0;
  std::size_t valid_skipped = 0;
  bool stopped_by_ppl = false;
  std::vector<EpochLog> history;

  nlohmann::json summary_json() const {
    nlohmann::json epochs = nlohmann::json::array();
    for (const auto& e : history)
      epochs.push_back({{"epoch", e.epoch},
                        {"updates", e.updates},
                        {"lr", e.lr},
                        {"train_loss", e.train_loss},
                        {"valid_loss", e.valid_loss},
                        {"valid_ppl", e.valid_ppl}});
    return {{"epochs", epochs},
            {"final", checkpoint::state_to_json(state)},
            {"train_skipped", train_skipped},
            {"valid_skipped", valid_skipped},
            {"stopped_by_ppl", stopped_by_ppl}};
  }
};

template <typename R>
double eval_loss_per_token(const transformer::ModelConfig& mcfg,
                           const ParamMap<R>& params,
                           const std::vector<TokenPair>& pairs,
                           const BatchPlan& plan, double smoothing_eps) {
  double loss = 0.0;
  std::size_t tokens = 0;
  for (const auto& indices : plan.batches) {
    const transformer::Batch batch = build_batch(pairs, indices);
    const Tensor<R> logits = transformer::forward(mcfg, params, batch);
    const auto lg = label_smoothed_ce(logits, batch.tgt_output, smoothing_eps,
                                      transformer::kPadId, /*want_grad=*/false);
    loss += static_cast<double>(lg.loss);
    tokens += lg.tokens;
  }
  return tokens > 0 ? loss / static_cast<double>(tokens) : 0.0;
}

template <typename R = float>
struct TrainLoopResult {
  TrainRun run;
  ParamMap<R> params;
};

// checkpoint_dir may be empty to skip checkpoint files (library callers).
template <typename R = float>
TrainLoopResult<R> train_loop(const std::vector<TokenPair>& train_pairs,
                              const std::vector<TokenPair>& valid_pairs,
                              const transformer::ModelConfig& mcfg,
                              const TrainConfig& tcfg,
                              const std::string& checkpoint_dir = "",
                              const nlohmann::json& checkpoint_extra =
                                  nlohmann::json::object(),
                              std::ostream* progress = nullptr) {
  mcfg.validate();
  tcfg.validate();

  TrainLoopResult<R> result;
  result.params = transformer::init_params<R>(mcfg, tcfg.seed);
  OptimizerState<R> opt = make_optimizer_state(result.params);
  Rng dropout_rng(tcfg.seed ^ 0x9e3779b97f4a7c15ULL);

  const BatchPlan valid_plan =
      make_batches(valid_pairs, tcfg.max_tokens, /*seed=*/0,
                   mcfg.max_source_positions, mcfg.max_target_positions);
  result.run.valid_skipped = valid_plan.skipped;

  TrainState& state = result.run.state;
  for (std::size_t epoch = 1; epoch <= tcfg.max_epochs; ++epoch) {
    state.epoch = epoch;
    const BatchPlan plan =
        make_batches(train_pairs, tcfg.max_tokens, tcfg.seed + epoch,
                     mcfg.max_source_positions, mcfg.max_target_positions);
    result.run.train_skipped = plan.skipped;
    if (plan.batches.empty())
      fail(ErrorKind::kInput, "no trainable batches (all pairs skipped)");

    ParamMap<R> accum = zeros_like(result.params);
    std::size_t accum_tokens = 0, micro = 0;
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    double last_lr = 0.0;

    const auto apply_update = [&]() {
      if (accum_tokens == 0) return;
      const R scale = static_cast<R>(1.0 / static_cast<double>(accum_tokens));
      for (auto& [name, g] : accum)
        for (R& x : g.v) x *= scale;
      ++state.updates;
      last_lr = lr_at(state.updates, tcfg);
      adam_step(result.params, accum, opt, tcfg, last_lr);
      accum = zeros_like(result.params);
      accum_tokens = 0;
      micro = 0;
    };

    for (std::size_t bi = 0; bi < plan.batches.size(); ++bi) {
      const transformer::Batch batch = build_batch(train_pairs, plan.batches[bi]);
      auto gr = transformer::grad(
          mcfg, result.params, batch,
          [&](const Tensor<R>& logits, const IntMat& tgt_output) {
            return label_smoothed_ce(logits, tgt_output,
                                     tcfg.label_smoothing);
          },
          /*train=*/true, &dropout_rng);
      if (!std::isfinite(static_cast<double>(gr.loss)))
        fail(ErrorKind::kNumeric,
             "non-finite loss at epoch " + std::to_string(epoch) +
                 ", batch " + std::to_string(bi));
      for (auto& [name, g] : gr.grads) {
        Tensor<R>& a = accum.at(name);
        for (std::size_t i = 0; i < g.numel(); ++i) a.v[i] += g.v[i];
      }
      accum_tokens += gr.tokens;
      epoch_loss += static_cast<double>(gr.loss);
      epoch_tokens += gr.tokens;
      if (++micro == tcfg.update_freq) apply_update();
    }
    apply_update();  // flush a trailing partial accumulation group

    state.train_loss =
        epoch_tokens > 0 ? epoch_loss / static_cast<double>(epoch_tokens) : 0.0;
    // Validation loss is the plain NLL: the stop rule's perplexity must not
    // carry the label-smoothing floor, which would bound it away from 1.
    state.valid_loss = eval_loss_per_token(mcfg, result.params, valid_pairs,
                                           valid_plan, /*smoothing_eps=*/0.0);
    state.valid_ppl = std::exp(state.valid_loss);

    result.run.history.push_back({epoch, state.updates, last_lr,
                                  state.train_loss, state.valid_loss,
                                  state.valid_ppl});
    if (progress) {
      char line[256];
      std::snprintf(line, sizeof(line),
                    "epoch %zu | updates %zu | lr %.3e | train_loss %.4f | "
                    "valid_loss %.4f | valid_ppl %.4f",
                    epoch, state.updates, last_lr, state.train_loss,
                    state.valid_loss, state.valid_ppl);
      *progress << line << std::endl;
    }

    if (!checkpoint_dir.empty()) {
      if constexpr (std::is_same_v<R, float>) {
        checkpoint::save_checkpoint(
            checkpoint_dir + "/checkpoint" + std::to_string(epoch) + ".pt",
            result.params, mcfg, tcfg, state, checkpoint_extra);
      }
    }

    if (state.valid_ppl < tcfg.stop_ppl) {
      result.run.stopped_by_ppl = true;
      break;
    }
  }
  return result;
}

}  // namespace minimt::training
