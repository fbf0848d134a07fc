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

// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// process exits non-zero if any check fails. The last check drives the
// CLI binary (path given as argv[1]) through the whole pipeline twice.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "minimt/beam.hpp"
#include "minimt/checkpoint.hpp"
#include "minimt/corpus.hpp"
#include "minimt/dictfilter.hpp"
#include "minimt/evaluation.hpp"
#include "minimt/rng.hpp"
#include "minimt/trainloop.hpp"
#include "minimt/training.hpp"
#include "minimt/transformer.hpp"
#include "minimt/wordpiece.hpp"

namespace fs = std::filesystem;
namespace tr = minimt::transformer;
namespace tn = minimt::training;
namespace wp = minimt::wordpiece;
namespace ev = minimt::evaluation;
namespace bm = minimt::beam;
namespace df = minimt::dictfilter;
using minimt::IntMat;
using minimt::Rng;
using minimt::Tensor;

namespace {

std::string g_cli_path;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() /
          ("minimt_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

// ---- 1. filter oracle --------------------------------------------------------

void check_filter_oracle() {
  Rng rng(101);
  const std::vector<std::string> mr_words = {
      "एक", "दोन", "तीन", "चार", "पाच", "सहा", "सात", "आठ", "नऊ", "दहा",
      "घर", "पाणी", "झाड", "सूर्य", "चंद्र", "क", "ख", "ग", "घ", "ङ"};
  std::vector<std::string> en_words;
  for (int i = 0; i < 40; ++i) en_words.push_back("w" + std::to_string(i));

  df::BilingualDictionary dict;
  std::map<std::string, std::vector<std::string>> dict_plain;
  std::size_t entries = 0;
  while (entries < 200) {
    const auto& s = mr_words[rng.next_below(mr_words.size())];
    const auto& t = en_words[rng.next_below(en_words.size())];
    dict.add(s, t);
    dict_plain[s].push_back(t);
    ++entries;
  }

  minimt::corpus::ParallelCorpus corpus;
  for (int i = 0; i < 490; ++i) {
    std::string src, tgt;
    for (std::size_t k = 0; k < 1 + rng.next_below(5); ++k)
      src += mr_words[rng.next_below(mr_words.size())] + " ";
    for (std::size_t k = 0; k < 1 + rng.next_below(12); ++k)
      tgt += en_words[rng.next_below(en_words.size())] + " ";
    corpus.pairs.push_back({src, tgt, static_cast<std::size_t>(i)});
  }
  // Planted boundary pairs: exactly 3 matched words out of 10.
  for (int i = 0; i < 10; ++i) {
    const std::string src = "एक";
    std::string tgt;
    std::size_t matched = 0;
    for (const auto& t : dict_plain.count("एक") ? dict_plain["एक"]
                                                : std::vector<std::string>{}) {
      if (matched == 3) break;
      tgt += t + " ";
      ++matched;
    }
    if (matched < 3) continue;  // dictionary lacked translations; unlikely
    for (std::size_t k = matched; k < 10; ++k) tgt += "zzz" + std::to_string(k) + " ";
    corpus.pairs.push_back({src, tgt, corpus.pairs.size()});
  }

  df::FilterConfig cfg;
  cfg.threshold = 0.30;
  const auto result = df::filter_corpus(corpus, dict, cfg);

  // Brute-force re-check of every pair, independently of filter_corpus.
  std::size_t kept_expected = 0;
  std::vector<bool> keep(corpus.pairs.size());
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& p = corpus.pairs[i];
    std::vector<std::string> candidates;
    {
      std::istringstream ss(p.source);
      std::string w;
      while (ss >> w) {
        const auto lw = minimt::unicode::lowercase(w);
        auto it = dict_plain.find(lw);
        if (it != dict_plain.end())
          for (const auto& t : it->second) candidates.push_back(t);
      }
    }
    std::size_t total = 0, matched = 0;
    {
      std::istringstream ss(p.target);
      std::string w;
      while (ss >> w) {
        const auto lw = minimt::unicode::strip_outer_punct(
            minimt::unicode::lowercase(w));
        if (lw.empty()) continue;
        ++total;
        for (const auto& c : candidates)
          if (c == lw) {
            ++matched;
            break;
          }
      }
    }
    const double ratio =
        total == 0 ? 0.0
                   : static_cast<double>(matched) / static_cast<double>(total);
    keep[i] = ratio >= 0.30;
    if (keep[i]) ++kept_expected;
  }
  require(result.report.kept_count == kept_expected,
          "kept count " + std::to_string(result.report.kept_count) +
              " != oracle " + std::to_string(kept_expected));
  // Exact set equality, in order.
  std::size_t ki = 0, ri = 0;
  for (std::size_t i = 0; i < corpus.pairs.size(); ++i) {
    const auto& expect = corpus.pairs[i];
    const auto& got = keep[i] ? result.kept.pairs.at(ki++)
                              : result.rejected.pairs.at(ri++);
    require(got.source == expect.source && got.target == expect.target,
            "pair mismatch at input index " + std::to_string(i));
  }
  // Boundary pairs at exactly 0.30 are kept.
  df::FilterConfig probe;
  probe.threshold = 0.30;
  bool boundary_seen = false;
  for (const auto& p : corpus.pairs) {
    const double ratio = df::match_ratio(p, dict, probe);
    if (std::abs(ratio - 0.30) < 1e-12) {
      boundary_seen = true;
      require(df::filter_corpus({{p}, ""}, dict, probe).report.kept_count == 1,
              "boundary pair at ratio 0.30 was rejected");
    }
  }
  require(boundary_seen, "no boundary pair at ratio 0.30 in the corpus");
}

// ---- 2. BLEU oracle ------------------------------------------------------------

struct OracleBleuResult {
  double bleu = 0.0;
};

OracleBleuResult oracle_bleu(const std::vector<std::vector<std::string>>& hyps,
                             const std::vector<std::vector<std::string>>& refs,
                             bool smoothed) {
  long long hyp_len = 0, ref_len = 0;
  std::array<long long, 4> match{}, total{};
  for (std::size_t i = 0; i < hyps.size(); ++i) {
    hyp_len += static_cast<long long>(hyps[i].size());
    ref_len += static_cast<long long>(refs[i].size());
    for (int n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, long long> h, r;
      for (int p = 0; p + n <= static_cast<int>(hyps[i].size()); ++p)
        ++h[{hyps[i].begin() + p, hyps[i].begin() + p + n}];
      for (int p = 0; p + n <= static_cast<int>(refs[i].size()); ++p)
        ++r[{refs[i].begin() + p, refs[i].begin() + p + n}];
      for (const auto& [g, c] : h) {
        total[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) match[n - 1] += std::min(c, it->second);
      }
    }
  }
  OracleBleuResult out;
  if (hyp_len == 0) return out;
  std::array<double, 4> prec{};
  double inv = 1.0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) {
      prec[n] = 0.0;
    } else if (match[n] == 0 && smoothed) {
      inv *= 2.0;
      prec[n] = 1.0 / (inv * static_cast<double>(total[n]));
    } else {
      prec[n] = static_cast<double>(match[n]) / static_cast<double>(total[n]);
    }
  }
  const double bp = hyp_len > ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) /
                                             static_cast<double>(hyp_len));
  double prod = 1.0;
  for (const double p : prec) prod *= p;
  out.bleu = prod == 0.0 ? 0.0 : 100.0 * bp * std::pow(prod, 0.25);
  return out;
}

void check_bleu_oracle() {
  Rng rng(202);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f"};
  for (int corpus_i = 0; corpus_i < 100; ++corpus_i) {
    std::vector<std::vector<std::string>> hyp_toks, ref_toks;
    std::vector<std::string> hyps, refs;
    const std::size_t pairs = 1 + rng.next_below(20);
    for (std::size_t p = 0; p < pairs; ++p) {
      std::vector<std::string> h, r;
      for (std::size_t k = 0; k < 1 + rng.next_below(12); ++k)
        h.push_back(vocab[rng.next_below(vocab.size())]);
      for (std::size_t k = 0; k < 1 + rng.next_below(12); ++k)
        r.push_back(vocab[rng.next_below(vocab.size())]);
      std::string hs, rs;
      for (const auto& w : h) hs += w + " ";
      for (const auto& w : r) rs += w + " ";
      hyps.push_back(hs);
      refs.push_back(rs);
      hyp_toks.push_back(std::move(h));
      ref_toks.push_back(std::move(r));
    }
    const double raw = ev::corpus_bleu(hyps, refs, false).bleu;
    const double smooth = ev::corpus_bleu(hyps, refs, true).bleu;
    const double raw_oracle = oracle_bleu(hyp_toks, ref_toks, false).bleu;
    const double smooth_oracle = oracle_bleu(hyp_toks, ref_toks, true).bleu;
    require(std::abs(raw - raw_oracle) < 1e-9,
            "raw BLEU disagrees with the oracle on corpus " +
                std::to_string(corpus_i));
    require(std::abs(smooth - smooth_oracle) < 1e-9,
            "smoothed BLEU disagrees with the oracle on corpus " +
                std::to_string(corpus_i));
    require(smooth >= raw - 1e-12, "smoothing lowered the score");
  }

  const std::vector<std::string> self = {"the cat sat on the mat",
                                         "birds fly south in winter"};
  require(ev::corpus_bleu(self, self, false).bleu == 100.0 &&
              ev::corpus_bleu(self, self, true).bleu == 100.0,
          "identical corpus is not exactly 100");

  const auto hand = ev::corpus_bleu({"the cat sat on mat"},
                                    {"the cat sat on the mat"}, false);
  require(hand.precisions[0] == 1.0 && hand.precisions[1] == 0.75 &&
              std::abs(hand.precisions[2] - 2.0 / 3.0) < 1e-15 &&
              hand.precisions[3] == 0.5,
          "hand example precisions wrong");
  require(std::abs(hand.brevity_penalty - std::exp(-0.2)) < 1e-15,
          "hand example brevity penalty wrong");
}

// ---- 3. tokenizer round trip ----------------------------------------------------

void check_tokenizer_roundtrip() {
  Rng rng(303);
  const std::vector<std::string> stems = {"ka", "ma", "ra", "ti", "su", "lo",
                                          "ne", "pa", "de", "vi"};
  std::vector<std::string> lines;
  for (int i = 0; i < 1000; ++i) {
    std::string line;
    const std::size_t words = 1 + rng.next_below(9);
    for (std::size_t w = 0; w < words; ++w) {
      std::string word;
      const std::size_t syllables = 1 + rng.next_below(4);
      for (std::size_t s = 0; s < syllables; ++s)
        word += stems[rng.next_below(stems.size())];
      line += word + " ";
    }
    lines.push_back(line);
  }
  wp::TokenizerConfig cfg;
  cfg.lowercase = true;
  cfg.vocab_size = 600;
  cfg.min_frequency = 1;
  const auto vocab = wp::train_vocab(lines, cfg);

  std::size_t checked_words = 0;
  for (const auto& line : lines) {
    const auto seq = wp::encode(line, vocab, cfg);
    for (const auto id : seq.ids)
      require(id != wp::Vocabulary::kUnk, "unk in a fully covered corpus");
    const std::string back = wp::detokenize(wp::decode(seq.ids, vocab));
    require(back == wp::normalize(line, cfg),
            "round trip broke on: " + line);

    // Greedy longest-match verified per word by brute force.
    const auto toks = wp::decode(seq.ids, vocab);
    std::size_t ti = 0;
    for (const auto& word : minimt::unicode::split_words(seq.surface)) {
      const std::u32string cps = minimt::unicode::decode(word);
      std::size_t pos = 0;
      while (pos < cps.size()) {
        std::string longest;
        for (std::size_t len = cps.size() - pos; len >= 1; --len) {
          std::string piece = pos == 0 ? "" : "##";
          piece +=
              minimt::unicode::encode(std::u32string_view(cps).substr(pos, len));
          if (vocab.find(piece) != -1) {
            longest = piece;
            break;
          }
        }
        require(!longest.empty() && toks.at(ti) == longest,
                "greedy longest-match violated in word " + word);
        pos += minimt::unicode::decode(longest).size() - (pos == 0 ? 0 : 2);
        ++ti;
      }
      ++checked_words;
    }
  }
  require(checked_words > 4000, "too few words checked");
}

// ---- 4. gradient check -----------------------------------------------------------

void check_gradients() {
  tr::ModelConfig cfg = tr::preset("toy");
  cfg.src_vocab_size = 17;
  cfg.tgt_vocab_size = 19;
  cfg.dropout = 0.0;
  auto params = tr::init_params<double>(cfg, 0);
  const auto batch = tr::make_batch({
      {{4, 5, 6, 7}, {4, 5, 6}},
      {{8, 9, 10}, {7, 8, 9, 10}},
  });
  const double eps = 0.1;

  const auto loss_at = [&]() {
    const Tensor<double> logits = tr::forward(cfg, params, batch);
    return static_cast<double>(
        tn::label_smoothed_ce(logits, batch.tgt_output, eps, tr::kPadId, false)
            .loss);
  };
  const auto analytic = tr::grad(
      cfg, params, batch,
      [&](const Tensor<double>& logits, const IntMat& tgt) {
        return tn::label_smoothed_ce(logits, tgt, eps);
      },
      false, nullptr);

  std::vector<std::pair<std::string, std::size_t>> layout;
  std::size_t total = 0;
  for (const auto& [name, t] : params) {
    layout.push_back({name, total});
    total += t.numel();
  }
  Rng rng(404);
  const double h = 1e-6;
  double max_rel = 0.0;
  std::size_t checked = 0;
  for (std::size_t k = 0; k < 1000; ++k) {
    const std::size_t flat = rng.next_below(total);
    std::size_t li = layout.size() - 1;
    while (layout[li].second > flat) --li;
    const std::string& name = layout[li].first;
    const std::size_t off = flat - layout[li].second;
    Tensor<double>& t = params.at(name);
    const double saved = t.v[off];
    t.v[off] = saved + h;
    const double up = loss_at();
    t.v[off] = saved - h;
    const double down = loss_at();
    t.v[off] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double exact = analytic.grads.at(name).v[off];
    // Denominator floored at the finite-difference resolution scale.
    const double rel = std::abs(numeric - exact) /
                       std::max(std::abs(numeric) + std::abs(exact), 1e-3);
    max_rel = std::max(max_rel, rel);
    ++checked;
  }
  require(checked == 1000, "fewer than 1000 coordinates sampled");
  require(max_rel < 1e-5,
          "max relative gradient error " + std::to_string(max_rel));
}

// ---- 5. schedule exactness ---------------------------------------------------------

void check_schedule() {
  tn::TrainConfig cfg;  // peak 5e-4, warmup 10000
  require(tn::lr_at(5000, cfg) == 2.5e-4, "lr at step 5000");
  require(tn::lr_at(10000, cfg) == 5e-4, "lr at step 10000");
  require(tn::lr_at(40000, cfg) == 2.5e-4, "lr at step 40000");
}

// ---- 6. accumulation equivalence ------------------------------------------------------

void check_accumulation() {
  tr::ModelConfig cfg = tr::preset("toy");
  cfg.src_vocab_size = 16;
  cfg.tgt_vocab_size = 16;
  cfg.dropout = 0.0;
  Rng rng(505);
  const auto loss_fn = [](const Tensor<double>& logits, const IntMat& tgt) {
    return tn::label_smoothed_ce(logits, tgt, 0.1);
  };
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<tn::TokenPair> a, b;
    for (int i = 0; i < 4; ++i) {
      tn::TokenPair p;
      for (std::size_t k = 0; k < 2 + rng.next_below(4); ++k)
        p.src.push_back(static_cast<std::int32_t>(4 + rng.next_below(10)));
      for (std::size_t k = 0; k < 2 + rng.next_below(4); ++k)
        p.tgt.push_back(static_cast<std::int32_t>(4 + rng.next_below(10)));
      (i % 2 == 0 ? a : b).push_back(std::move(p));
    }
    auto all = a;
    all.insert(all.end(), b.begin(), b.end());

    const auto params0 = tr::init_params<double>(cfg, 42 + trial);
    tn::TrainConfig tcfg;

    auto path1 = params0;
    auto opt1 = tn::make_optimizer_state(path1);
    const auto ga = tr::grad(cfg, path1, tn::build_batch(a, {0, 1}), loss_fn,
                             false, nullptr);
    const auto gb = tr::grad(cfg, path1, tn::build_batch(b, {0, 1}), loss_fn,
                             false, nullptr);
    auto summed = ga.grads;
    for (auto& [name, t] : summed) {
      const auto& u = gb.grads.at(name);
      const double scale = 1.0 / static_cast<double>(ga.tokens + gb.tokens);
      for (std::size_t i = 0; i < t.numel(); ++i)
        t.v[i] = (t.v[i] + u.v[i]) * scale;
    }
    tn::adam_step(path1, summed, opt1, tcfg, 1e-3);

    auto path2 = params0;
    auto opt2 = tn::make_optimizer_state(path2);
    auto gall = tr::grad(cfg, path2, tn::build_batch(all, {0, 1, 2, 3}),
                         loss_fn, false, nullptr);
    const double scale = 1.0 / static_cast<double>(gall.tokens);
    for (auto& [name, t] : gall.grads)
      for (auto& x : t.v) x *= scale;
    tn::adam_step(path2, gall.grads, opt2, tcfg, 1e-3);

    for (const auto& [name, t] : path1) {
      const auto& u = path2.at(name);
      const auto& w0 = params0.at(name);
      for (std::size_t i = 0; i < t.numel(); ++i) {
        const double da = t.v[i] - w0.v[i];
        const double db = u.v[i] - w0.v[i];
        const double rel = std::abs(da - db) /
                           std::max(std::abs(da) + std::abs(db), 1e-6);
        require(rel < 1e-6, "delta mismatch in " + name + " trial " +
                                std::to_string(trial));
      }
    }
  }
}

// ---- 7. end-to-end overfit run -----------------------------------------------------

struct DigitTask {
  std::vector<std::string> src_lines, tgt_lines;
  wp::Vocabulary src_vocab, tgt_vocab;
  wp::TokenizerConfig src_cfg, tgt_cfg;
  std::vector<tn::TokenPair> pairs;
};

DigitTask make_digit_task(std::size_t n_pairs, std::uint64_t seed) {
  const std::vector<std::string> mr = {"शून्य", "एक", "दोन", "तीन", "चार",
                                       "पाच",  "सहा", "सात", "आठ", "नऊ"};
  const std::vector<std::string> en = {"zero", "one", "two",   "three", "four",
                                       "five", "six", "seven", "eight", "nine"};
  Rng rng(seed);
  DigitTask task;
  std::set<std::vector<std::size_t>> seen;
  while (task.src_lines.size() < n_pairs) {
    std::vector<std::size_t> digits;
    for (std::size_t k = 0; k < 2 + rng.next_below(5); ++k)
      digits.push_back(rng.next_below(10));
    if (!seen.insert(digits).second) continue;
    std::string s, t;
    for (const auto d : digits) {
      s += mr[d] + " ";
      t += en[d] + " ";
    }
    task.src_lines.push_back(s);
    task.tgt_lines.push_back(t);
  }
  task.src_cfg.vocab_size = 128;
  task.src_cfg.min_frequency = 1;
  task.tgt_cfg = task.src_cfg;
  task.tgt_cfg.lowercase = true;
  task.src_vocab = wp::train_vocab(task.src_lines, task.src_cfg);
  task.tgt_vocab = wp::train_vocab(task.tgt_lines, task.tgt_cfg);
  for (std::size_t i = 0; i < task.src_lines.size(); ++i) {
    tn::TokenPair p;
    p.src = wp::encode(task.src_lines[i], task.src_vocab, task.src_cfg).ids;
    p.tgt = wp::encode(task.tgt_lines[i], task.tgt_vocab, task.tgt_cfg).ids;
    task.pairs.push_back(std::move(p));
  }
  return task;
}

void check_overfit() {
  const DigitTask task = make_digit_task(50, 606);
  tr::ModelConfig mcfg = tr::preset("toy");
  mcfg.src_vocab_size = task.src_vocab.size();
  mcfg.tgt_vocab_size = task.tgt_vocab.size();
  mcfg.dropout = 0.0;

  tn::TrainConfig tcfg;
  tcfg.peak_lr = 1e-3;
  tcfg.warmup_updates = 100;
  tcfg.max_tokens = 256;
  tcfg.update_freq = 1;
  // Label smoothing 0.1 floors the NLL perplexity near exp(-ln 0.9): 1.11.
  tcfg.stop_ppl = 1.2;
  tcfg.max_epochs = 600;
  tcfg.seed = 0;

  const auto result =
      tn::train_loop<float>(task.pairs, task.pairs, mcfg, tcfg);
  require(result.run.stopped_by_ppl,
          "stop-ppl rule did not trigger before max_epochs");
  require(result.run.state.epoch < tcfg.max_epochs,
          "ran to the epoch limit");
  require(result.run.state.updates <= 2000,
          "needed " + std::to_string(result.run.state.updates) +
              " updates (> 2000)");
  require(result.run.state.valid_ppl < 1.5,
          "perplexity " + std::to_string(result.run.state.valid_ppl));

  bm::BeamConfig bcfg;
  bcfg.beam_size = 5;
  const auto translations =
      bm::translate_corpus(mcfg, result.params, task.src_lines, task.src_vocab,
                           task.src_cfg, task.tgt_vocab, bcfg);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < task.src_lines.size(); ++i) {
    if (translations.outputs[i] ==
        wp::normalize(task.tgt_lines[i], task.tgt_cfg))
      ++exact;
  }
  require(exact * 10 >= task.src_lines.size() * 9,
          "only " + std::to_string(exact) + "/50 training targets reproduced");
}

// ---- 8. beam properties -------------------------------------------------------------

void check_beam_properties() {
  // beam 1 == greedy on 100 random toy models.
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    tr::ModelConfig cfg = tr::preset("toy");
    cfg.d_model = 32;
    cfg.ffn_dim = 48;
    cfg.n_heads = 2;
    cfg.n_encoder_layers = cfg.n_decoder_layers = 1;
    cfg.src_vocab_size = cfg.tgt_vocab_size = 12;
    cfg.dropout = 0.0;
    const auto params = tr::init_params<float>(cfg, seed);
    Rng rng(seed * 7 + 1);
    IntMat src(1, 3 + rng.next_below(3));
    for (std::size_t c = 0; c < src.cols; ++c)
      src.at(0, c) = static_cast<std::int32_t>(4 + rng.next_below(8));
    const auto memory = tr::encode_source(cfg, params, src);
    const auto step = [&](const std::vector<std::int32_t>& prefix) {
      return tr::decode_step(cfg, params, memory, prefix);
    };

    bm::BeamConfig one;
    one.beam_size = 1;
    const std::size_t max_len = 8;
    const auto beam = bm::beam_search(step, 12, max_len, one);

    std::vector<std::int32_t> greedy = {tr::kBosId};
    for (std::size_t t = 1; t <= max_len; ++t) {
      const auto lp = step(greedy);
      if (t == max_len) {
        greedy.push_back(tr::kEosId);
        break;
      }
      std::int32_t arg = -1;
      float best = -1e30f;
      for (std::size_t v = 0; v < lp.size(); ++v) {
        const auto tok = static_cast<std::int32_t>(v);
        if (tok == tr::kPadId || tok == tr::kBosId) continue;
        if (lp[v] > best) {
          best = lp[v];
          arg = tok;
        }
      }
      greedy.push_back(arg);
      if (arg == tr::kEosId) break;
    }
    require(beam.ids == greedy,
            "beam 1 != greedy at seed " + std::to_string(seed));
  }

  // beam 5 equals exhaustive enumeration on a hand-built 3-token scorer.
  const auto fixed = [](const std::vector<std::int32_t>&) {
    std::vector<double> lp(6, -1e30);
    lp[tr::kUnkId] = std::log(0.05);
    lp[tr::kEosId] = std::log(0.15);
    lp[4] = std::log(0.5);
    lp[5] = std::log(0.3);
    return lp;
  };
  bm::BeamConfig five;
  five.beam_size = 5;
  const std::size_t max_len = 4;
  const auto got = bm::beam_search(fixed, 6, max_len, five);

  bm::Hypothesis best;
  bool have = false;
  std::function<void(std::vector<std::int32_t>&, double)> walk =
      [&](std::vector<std::int32_t>& prefix, double score) {
        const auto lp = fixed(prefix);
        bm::Hypothesis h;
        h.ids = prefix;
        h.ids.push_back(tr::kEosId);
        h.score = score + lp[static_cast<std::size_t>(tr::kEosId)];
        h.normalized_score =
            h.score / static_cast<double>(h.ids.size() - 1);
        if (!have || h.normalized_score > best.normalized_score ||
            (h.normalized_score == best.normalized_score && h.ids < best.ids)) {
          best = h;
          have = true;
        }
        if (prefix.size() - 1 + 1 >= max_len) return;
        for (const std::int32_t tok : {1, 4, 5}) {
          prefix.push_back(tok);
          walk(prefix, score + lp[static_cast<std::size_t>(tok)]);
          prefix.pop_back();
        }
      };
  std::vector<std::int32_t> prefix = {tr::kBosId};
  walk(prefix, 0.0);
  require(got.ids == best.ids, "beam 5 != exhaustive enumeration");

  // batch size cannot change translations.
  const DigitTask task = make_digit_task(12, 707);
  tr::ModelConfig mcfg = tr::preset("toy");
  mcfg.d_model = 32;
  mcfg.ffn_dim = 48;
  mcfg.n_heads = 2;
  mcfg.n_encoder_layers = mcfg.n_decoder_layers = 1;
  mcfg.src_vocab_size = task.src_vocab.size();
  mcfg.tgt_vocab_size = task.tgt_vocab.size();
  mcfg.dropout = 0.0;
  const auto params = tr::init_params<float>(mcfg, 3);
  bm::BeamConfig b1;
  b1.beam_size = 3;
  b1.batch_size = 1;
  bm::BeamConfig b32 = b1;
  b32.batch_size = 32;
  const auto r1 = bm::translate_corpus(mcfg, params, task.src_lines,
                                       task.src_vocab, task.src_cfg,
                                       task.tgt_vocab, b1);
  const auto r32 = bm::translate_corpus(mcfg, params, task.src_lines,
                                        task.src_vocab, task.src_cfg,
                                        task.tgt_vocab, b32);
  require(r1.outputs == r32.outputs, "batch size changed translations");
}

// ---- 9. metrics arithmetic -----------------------------------------------------------

void check_metrics_arithmetic() {
  const std::vector<std::string> hyps = {"a a a a a", "b b b b b b b"};
  const std::vector<std::string> refs = {"x x x x x",
                                         "y y y y y y y y y y"};
  const auto e = ev::wordcount_error(hyps, refs);
  require(e.mae == 1.5, "MAE");
  require(e.rmse == std::sqrt(4.5), "RMSE");

  std::vector<std::string> sources, dummy_refs;
  for (const std::size_t wc : {14, 15, 16}) {
    std::string s;
    for (std::size_t k = 0; k < wc; ++k) s += "w ";
    sources.push_back(s);
    dummy_refs.push_back("r");
  }
  const auto split = ev::bucket_split(sources, dummy_refs, {});
  require(split.small == std::vector<std::size_t>{0}, "14 must be small");
  require((split.large == std::vector<std::size_t>{1, 2}),
          "15 and 16 must be large");
  require(split.small.size() + split.large.size() == sources.size(),
          "bucket partition not exact");
}

// ---- 10. checkpoint round trip ----------------------------------------------------------

void check_checkpoints(const Scratch& scratch) {
  for (const auto& name : tr::preset_names()) {
    auto cfg = tr::preset(name);
    cfg.d_model = std::min<std::size_t>(cfg.d_model, 64);
    cfg.ffn_dim = std::min<std::size_t>(cfg.ffn_dim, 128);
    cfg.n_heads = std::min<std::size_t>(cfg.n_heads, 4);
    cfg.n_encoder_layers = cfg.n_decoder_layers = 2;
    cfg.src_vocab_size = 31;
    cfg.tgt_vocab_size = 37;
    const auto params = tr::init_params<float>(cfg, 9);
    const std::string path = scratch.path("ck_" + name + ".pt");
    minimt::checkpoint::save_checkpoint(path, params, cfg, {}, {});
    const auto loaded = minimt::checkpoint::load_checkpoint(path);
    require(loaded.model == cfg, "config round trip failed for " + name);
    for (const auto& [pname, t] : params) {
      const auto& u = loaded.params.at(pname);
      require(t.shape == u.shape &&
                  std::memcmp(t.data(), u.data(),
                              t.numel() * sizeof(float)) == 0,
              "bitwise mismatch in " + name + "/" + pname);
    }
    // Corruption and truncation produce typed errors, not crashes.
    const std::string bytes = read_file(path);
    for (const std::size_t keep : {std::size_t{3}, bytes.size() / 3,
                                   bytes.size() - 7}) {
      const std::string cut_path = scratch.path("cut.pt");
      write_file(cut_path, bytes.substr(0, keep));
      bool threw = false;
      try {
        minimt::checkpoint::load_checkpoint(cut_path);
      } catch (const minimt::Error& e) {
        threw = e.kind() == minimt::ErrorKind::kFormat;
      }
      require(threw, "truncated checkpoint did not raise a format error");
    }
    std::string garbled = bytes;
    garbled[0] = 'X';
    write_file(scratch.path("bad.pt"), garbled);
    bool threw = false;
    try {
      minimt::checkpoint::load_checkpoint(scratch.path("bad.pt"));
    } catch (const minimt::Error& e) {
      threw = e.kind() == minimt::ErrorKind::kFormat;
    }
    require(threw, "bad magic did not raise a format error");
  }
}

// ---- 11. pipeline determinism -----------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void check_pipeline_determinism(const Scratch& scratch) {
  require(!g_cli_path.empty(), "CLI path not supplied (argv[1])");
  // Corpus: digit task plus junk pairs the filter must reject.
  const DigitTask task = make_digit_task(30, 808);
  std::string src_all, tgt_all, dict;
  for (std::size_t i = 0; i < task.src_lines.size(); ++i) {
    src_all += task.src_lines[i] + "\n";
    tgt_all += task.tgt_lines[i] + "\n";
  }
  src_all += "क ख ग\nघ ङ च\n";
  tgt_all += "junk alpha beta\nmore junk here\n";
  const std::vector<std::string> mr = {"शून्य", "एक", "दोन", "तीन", "चार",
                                       "पाच",  "सहा", "सात", "आठ", "नऊ"};
  const std::vector<std::string> en = {"zero", "one", "two",   "three", "four",
                                       "five", "six", "seven", "eight", "nine"};
  for (std::size_t i = 0; i < mr.size(); ++i)
    dict += mr[i] + "\t" + en[i] + "\n";
  write_file(scratch.path("all.mr"), src_all);
  write_file(scratch.path("all.en"), tgt_all);
  write_file(scratch.path("dict.tsv"), dict);

  const auto run_pipeline = [&](const std::string& tag) {
    const std::string d = scratch.path(tag);
    fs::create_directories(d);
    require(run_cli("filter --src " + scratch.path("all.mr") + " --tgt " +
                    scratch.path("all.en") + " --dict " +
                    scratch.path("dict.tsv") + " --threshold 0.3 "
                    "--out-prefix " + d + "/f") == 0,
            "filter failed");
    require(run_cli("build-vocab --input " + d + "/f.kept.src" +
                    " --vocab-size 128 --min-frequency 1 --out " + d +
                    "/v.mr") == 0,
            "src vocab failed");
    require(run_cli("build-vocab --input " + d + "/f.kept.tgt" +
                    " --vocab-size 128 --min-frequency 1 --lowercase --out " +
                    d + "/v.en") == 0,
            "tgt vocab failed");
    fs::copy_file(d + "/f.kept.src", d + "/data.train.src");
    fs::copy_file(d + "/f.kept.tgt", d + "/data.train.tgt");
    fs::copy_file(d + "/f.kept.src", d + "/data.valid.src");
    fs::copy_file(d + "/f.kept.tgt", d + "/data.valid.tgt");
    require(run_cli("train --data-prefix " + d + "/data --src-vocab " + d +
                    "/v.mr --tgt-vocab " + d + "/v.en --arch toy "
                    "--max-epochs 10 --stop-ppl 0.0 --seed 0 --max-tokens 128 "
                    "--warmup-updates 50 --lr 1e-3 --update-freq 2 "
                    "--checkpoint-dir " + d + "/ck") == 0,
            "train failed");
    require(run_cli("translate --checkpoint " + d + "/ck/checkpoint10.pt" +
                    " --input " + scratch.path("all.mr") + " --output " + d +
                    "/hyp.en --beam 5") == 0,
            "translate failed");
    require(run_cli("evaluate --refs " + scratch.path("all.en") + " --sys toy=" +
                    d + "/hyp.en --sources " + scratch.path("all.mr") +
                    " --bucket-threshold 4 --format json --out " + d +
                    "/report.json") == 0,
            "evaluate failed");
  };
  run_pipeline("run1");
  run_pipeline("run2");

  const std::vector<std::string> artifacts = {
      "f.kept.src",        "f.kept.tgt",  "f.rejected.src", "f.rejected.tgt",
      "f.report.json",     "v.mr",        "v.en",           "ck/checkpoint10.pt",
      "ck/training_summary.json",         "hyp.en",         "hyp.en.skips.json",
      "report.json"};
  for (const auto& name : artifacts) {
    const std::string a = read_file(scratch.path("run1/" + name));
    const std::string b = read_file(scratch.path("run2/" + name));
    require(!a.empty(), name + " is empty");
    require(a == b, name + " differs between runs");
  }
}

// ---- harness -----------------------------------------------------------------------------

struct Check {
  int id;
  std::string name;
  double time_limit_s;
  std::function<void()> body;
};

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];
  Scratch scratch;

  const std::vector<Check> checks = {
      {1, "dictionary filter matches the brute-force oracle", 1.0,
       check_filter_oracle},
      {2, "corpus BLEU matches the n-gram counting oracle", 5.0,
       check_bleu_oracle},
      {3, "tokenizer round trip and greedy longest match", 10.0,
       check_tokenizer_roundtrip},
      {4, "gradients match central finite differences", 120.0,
       check_gradients},
      {5, "inverse-sqrt schedule reproduces the pinned values", 1.0,
       check_schedule},
      {6, "gradient accumulation equals concatenated batches", 60.0,
       check_accumulation},
      {7, "toy model overfits 50 pairs and reproduces them", 600.0,
       check_overfit},
      {8, "beam search properties (greedy, enumeration, batching)", 120.0,
       check_beam_properties},
      {9, "word-count error and bucket arithmetic", 1.0,
       check_metrics_arithmetic},
      {10, "checkpoints round-trip bitwise and fail loudly", 30.0,
       [&] { check_checkpoints(scratch); }},
      {11, "seeded pipeline runs are byte-identical", 300.0,
       [&] { check_pipeline_determinism(scratch); }},
  };

  int failures = 0;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      check.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && elapsed > check.time_limit_s)
      error = "exceeded the " + std::to_string(check.time_limit_s) +
              "s budget (" + std::to_string(elapsed) + "s)";
    char line[256];
    std::snprintf(line, sizeof(line), "[%s] criterion %2d (%.2fs): %s",
                  error.empty() ? "PASS" : "FAIL", check.id, elapsed,
                  check.name.c_str());
    std::cout << line << "\n";
    if (!error.empty()) {
      std::cout << "       " << error << "\n";
      ++failures;
    }
  }
  if (failures > 0) {
    std::cout << failures << " acceptance criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
