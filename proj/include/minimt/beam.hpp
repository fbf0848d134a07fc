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

#include "json.hpp"
#include "minimt/errors.hpp"
#include "minimt/transformer.hpp"
#include "minimt/wordpiece.hpp"

// Length-normalized beam search over any next-token scorer, plus the
// corpus translation driver (encode, search, strip specials, detokenize).

namespace minimt::beam {

struct BeamConfig {
  std::size_t beam_size = 5;
  // 0 means the per-sentence heuristic min(2 * src_len + 10, position limit).
  std::size_t max_len = 0;
  double length_penalty = 1.0;  // score divided by length^alpha
  std::size_t batch_size = 32;

  void validate() const {
    if (beam_size < 1) fail(ErrorKind::kConfig, "beam_size must be >= 1");
    if (batch_size < 1) fail(ErrorKind::kConfig, "batch_size must be >= 1");
    if (length_penalty < 0.0)
      fail(ErrorKind::kConfig, "length_penalty must be >= 0");
  }
};

struct Hypothesis {
  std::vector<std::int32_t> ids;  // bos ... eos
  double score = 0.0;             // cumulative log-probability
  double normalized_score = 0.0;  // score / (tokens after bos)^alpha
};

namespace detail {

inline double normalized(double score, std::size_t len_after_bos,
                         double alpha) {
  return score / std::pow(static_cast<double>(std::max<std::size_t>(
                              1, len_after_bos)),
                          alpha);
}

// Best normalized score any continuation of a live hypothesis could still
// reach: log-probabilities only lower the score, lengths only grow, so a
// non-positive score is maximized at the longest allowed length.
inline double best_possible(double score, std::size_t len_after_bos,
                            std::size_t max_len, double alpha) {
  const std::size_t len = score <= 0.0 ? max_len : len_after_bos + 1;
  return normalized(score, len, alpha);
}

}  // namespace detail

// Beam search over a next-token scorer. StepFn maps a prefix
// (bos-initial id sequence) to log-probabilities over the vocabulary.
// Returns finished hypotheses sorted best-first (at most beam_size),
// ties broken toward the lexicographically smaller id sequence.
template <typename StepFn>
std::vector<Hypothesis> beam_search_nbest(StepFn&& step,
                                          std::size_t vocab_size,
                                          std::size_t max_len,
                                          const BeamConfig& cfg) {
  cfg.validate();
  if (max_len < 1) fail(ErrorKind::kConfig, "max_len must be >= 1");
  const double alpha = cfg.length_penalty;

  const auto finalize = [&](Hypothesis h) {
    h.normalized_score = detail::normalized(h.score, h.ids.size() - 1, alpha);
    return h;
  };
  const auto better = [](const Hypothesis& a, const Hypothesis& b) {
    if (a.normalized_score != b.normalized_score)
      return a.normalized_score > b.normalized_score;
    return a.ids < b.ids;
  };

  std::vector<Hypothesis> live = {{{transformer::kBosId}, 0.0, 0.0}};
  std::vector<Hypothesis> finished;

  for (std::size_t t = 1; t <= max_len && !live.empty(); ++t) {
    std::vector<Hypothesis> candidates;
    candidates.reserve(live.size() * (t == max_len ? 1 : vocab_size));
    for (const Hypothesis& h : live) {
      const auto logprobs = step(h.ids);
      if (logprobs.size() != vocab_size)
        fail(ErrorKind::kInternal, "scorer returned wrong vocabulary size");
      if (t == max_len) {
        // Position budget exhausted: force-finish with eos.
        Hypothesis done = h;
        done.ids.push_back(transformer::kEosId);
        done.score += static_cast<double>(
            logprobs[static_cast<std::size_t>(transformer::kEosId)]);
        finished.push_back(finalize(std::move(done)));
        continue;
      }
      for (std::size_t v = 0; v < vocab_size; ++v) {
        const auto tok = static_cast<std::int32_t>(v);
        if (tok == transformer::kPadId || tok == transformer::kBosId)
          continue;
        Hypothesis next = h;
        next.ids.push_back(tok);
        next.score += static_cast<double>(logprobs[v]);
        candidates.push_back(std::move(next));
      }
    }
    if (t == max_len) break;

    const std::size_t keep = std::min(cfg.beam_size, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + keep,
                      candidates.end(),
                      [](const Hypothesis& a, const Hypothesis& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.ids < b.ids;
                      });
    candidates.resize(keep);

    live.clear();
    for (Hypothesis& c : candidates) {
      if (c.ids.back() == transformer::kEosId)
        finished.push_back(finalize(std::move(c)));
      else
        live.push_back(std::move(c));
    }

    // Stop once no live hypothesis can still beat the current top beam.
    if (finished.size() >= cfg.beam_size && !live.empty()) {
      std::sort(finished.begin(), finished.end(), better);
      const double kth = finished[cfg.beam_size - 1].normalized_score;
      double best_live = -1e300;
      for (const Hypothesis& h : live)
        best_live = std::max(best_live,
                             detail::best_possible(h.score, h.ids.size() - 1,
                                                   max_len, alpha));
      if (kth >= best_live) break;
    }
  }

  std::sort(finished.begin(), finished.end(), better);
  if (finished.size() > cfg.beam_size) finished.resize(cfg.beam_size);
  return finished;
}

template <typename StepFn>
Hypothesis beam_search(StepFn&& step, std::size_t vocab_size,
                       std::size_t max_len, const BeamConfig& cfg) {
  auto nbest = beam_search_nbest(std::forward<StepFn>(step), vocab_size,
                                 max_len, cfg);
  if (nbest.empty()) fail(ErrorKind::kInternal, "beam search found nothing");
  return std::move(nbest.front());
}

// ---- Corpus translation -----------------------------------------------------

struct SkipRecord {
  std::size_t index = 0;
  std::string reason;
};

struct TranslationResult {
  std::vector<std::string> outputs;  // one per input line, order preserved
  std::vector<SkipRecord> skips;

  nlohmann::json skips_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : skips)
      arr.push_back({{"index", s.index}, {"reason", s.reason}});
    return arr;
  }
};

inline std::size_t effective_max_len(const BeamConfig& cfg,
                                     std::size_t src_len,
                                     std::size_t max_target_positions) {
  // The longest prefix fed back to the decoder is bos + (max_len - 1)
  // generated tokens, so max_len itself may not exceed the position limit.
  const std::size_t cap = max_target_positions;
  if (cfg.max_len > 0) return std::min(cfg.max_len, cap);
  return std::min(2 * src_len + 10, cap);
}

template <typename R>
Hypothesis translate_ids(const transformer::ModelConfig& mcfg,
                         const ParamMap<R>& params,
                         const std::vector<std::int32_t>& src_ids,
                         const BeamConfig& cfg) {
  IntMat src(1, src_ids.size());
  for (std::size_t i = 0; i < src_ids.size(); ++i) src.at(0, i) = src_ids[i];
  const auto memory = transformer::encode_source(mcfg, params, src);
  const std::size_t max_len =
      effective_max_len(cfg, src_ids.size(), mcfg.max_target_positions);
  return beam_search(
      [&](const std::vector<std::int32_t>& prefix) {
        return transformer::decode_step(mcfg, params, memory, prefix);
      },
      mcfg.tgt_vocab_size, max_len, cfg);
}

// Full text-to-text pipeline per source line: tokenize, beam search, strip
// specials, detokenize. Inputs that cannot be translated (empty after
// normalization, or beyond the source position limit) produce an empty
// output line plus a skip record; order always matches the input.
template <typename R>
TranslationResult translate_corpus(const transformer::ModelConfig& mcfg,
                                   const ParamMap<R>& params,
                                   const std::vector<std::string>& sources,
                                   const wordpiece::Vocabulary& src_vocab,
                                   const wordpiece::TokenizerConfig& src_cfg,
                                   const wordpiece::Vocabulary& tgt_vocab,
                                   const BeamConfig& cfg) {
  cfg.validate();
  if (src_vocab.size() != mcfg.src_vocab_size ||
      tgt_vocab.size() != mcfg.tgt_vocab_size)
    fail(ErrorKind::kConfig,
         "vocabulary sizes do not match the model configuration");
  TranslationResult result;
  result.outputs.resize(sources.size());
  // batch_size groups inputs for decoding; outputs are reassembled by
  // index so the grouping never changes results.
  for (std::size_t begin = 0; begin < sources.size();
       begin += cfg.batch_size) {
    const std::size_t end =
        std::min(sources.size(), begin + cfg.batch_size);
    for (std::size_t i = begin; i < end; ++i) {
      const auto seq = wordpiece::encode(sources[i], src_vocab, src_cfg);
      if (seq.ids.empty()) {
        result.skips.push_back({i, "empty"});
        continue;
      }
      if (seq.ids.size() > mcfg.max_source_positions) {
        result.skips.push_back({i, "too_long"});
        continue;
      }
      const Hypothesis best = translate_ids(mcfg, params, seq.ids, cfg);
      std::vector<std::int32_t> body;
      for (const std::int32_t id : best.ids)
        if (id != transformer::kBosId && id != transformer::kEosId &&
            id != transformer::kPadId)
          body.push_back(id);
      result.outputs[i] =
          wordpiece::detokenize(wordpiece::decode(body, tgt_vocab));
    }
  }
  return result;
}

}  // namespace minimt::beam
