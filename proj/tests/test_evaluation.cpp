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

#include "minimt/evaluation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "minimt/rng.hpp"

namespace ev = minimt::evaluation;
using minimt::Rng;

namespace {

// Independent BLEU oracle: per-pair n-gram maps keyed by token vectors,
// aggregated the straightforward way. Shares no code with corpus_bleu.
struct OracleBleu {
  double bleu;
  std::array<double, 4> precisions;
  double bp;
};

OracleBleu oracle_bleu(const std::vector<std::vector<std::string>>& hyps,
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
        ++h[std::vector<std::string>(hyps[i].begin() + p,
                                     hyps[i].begin() + p + n)];
      for (int p = 0; p + n <= static_cast<int>(refs[i].size()); ++p)
        ++r[std::vector<std::string>(refs[i].begin() + p,
                                     refs[i].begin() + p + n)];
      for (const auto& [g, c] : h) {
        total[n - 1] += c;
        auto it = r.find(g);
        if (it != r.end()) match[n - 1] += std::min(c, it->second);
      }
    }
  }
  OracleBleu out{};
  if (hyp_len == 0) return out;
  double inv = 1.0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] == 0) {
      out.precisions[n] = 0.0;
    } else if (match[n] == 0 && smoothed) {
      inv *= 2.0;
      out.precisions[n] = 1.0 / (inv * static_cast<double>(total[n]));
    } else {
      out.precisions[n] =
          static_cast<double>(match[n]) / static_cast<double>(total[n]);
    }
  }
  out.bp = hyp_len > ref_len
               ? 1.0
               : std::exp(1.0 - static_cast<double>(ref_len) /
                                    static_cast<double>(hyp_len));
  double prod = 1.0;
  for (const double p : out.precisions) prod *= p;
  out.bleu = prod == 0.0 ? 0.0 : 100.0 * out.bp * std::pow(prod, 0.25);
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

}  // namespace

TEST(Tokenize13a, PunctuationSeparation) {
  const std::vector<std::string> expected = {"hello", ",", "world", "!"};
  EXPECT_EQ(ev::tokenize_13a("hello, world!"), expected);
}

TEST(Tokenize13a, DigitsKeepDecimalPoints) {
  EXPECT_EQ(ev::tokenize_13a("3.5"), std::vector<std::string>{"3.5"});
  EXPECT_EQ(ev::tokenize_13a("1,000"), std::vector<std::string>{"1,000"});
  const std::vector<std::string> end_of_sentence = {"it", "is", "3.5", "."};
  EXPECT_EQ(ev::tokenize_13a("it is 3.5."), end_of_sentence);
}

TEST(Tokenize13a, PlainWordUntouched) {
  EXPECT_EQ(ev::tokenize_13a("abc"), std::vector<std::string>{"abc"});
}

TEST(Tokenize13a, SymbolClassAndDigitDash) {
  const std::vector<std::string> quoted = {"he", "said", "\"", "hi", "\""};
  EXPECT_EQ(ev::tokenize_13a("he said \"hi\""), quoted);
  const std::vector<std::string> dashed = {"1", "-", "2"};
  EXPECT_EQ(ev::tokenize_13a("1-2"), dashed);
  EXPECT_EQ(ev::tokenize_13a("a-b"), std::vector<std::string>{"a-b"});
  const std::vector<std::string> parens = {"(", "a", ")"};
  EXPECT_EQ(ev::tokenize_13a("(a)"), parens);
}

TEST(Tokenize13a, WhitespaceCollapse) {
  const std::vector<std::string> expected = {"a", "b"};
  EXPECT_EQ(ev::tokenize_13a("  a \t b "), expected);
  EXPECT_TRUE(ev::tokenize_13a("").empty());
}

TEST(CorpusBleu, IdenticalIsExactlyHundred) {
  const std::vector<std::string> lines = {"the cat sat", "on the mat today"};
  for (const bool smoothed : {false, true}) {
    const auto s = ev::corpus_bleu(lines, lines, smoothed);
    EXPECT_DOUBLE_EQ(s.bleu, 100.0);
    for (const double p : s.precisions) EXPECT_DOUBLE_EQ(p, 1.0);
    EXPECT_DOUBLE_EQ(s.brevity_penalty, 1.0);
  }
}

TEST(CorpusBleu, HandComputedSinglePair) {
  // hyp "the cat sat on mat" vs ref "the cat sat on the mat":
  // p = (5/5, 3/4, 2/3, 1/2), BP = exp(1 - 6/5).
  const auto s = ev::corpus_bleu({"the cat sat on mat"},
                                 {"the cat sat on the mat"}, false);
  EXPECT_DOUBLE_EQ(s.precisions[0], 1.0);
  EXPECT_DOUBLE_EQ(s.precisions[1], 0.75);
  EXPECT_NEAR(s.precisions[2], 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.precisions[3], 0.5);
  EXPECT_NEAR(s.brevity_penalty, std::exp(-0.2), 1e-12);
  EXPECT_EQ(s.hyp_len, 5u);
  EXPECT_EQ(s.ref_len, 6u);
  const double expected =
      100.0 * std::exp(-0.2) * std::pow(1.0 * 0.75 * (2.0 / 3.0) * 0.5, 0.25);
  EXPECT_NEAR(s.bleu, expected, 1e-9);
  EXPECT_NEAR(s.bleu, 57.89, 0.01);
}

TEST(CorpusBleu, ZeroPrecisionRawVsSmoothed) {
  // Shares unigrams with the reference but no 4-gram.
  const std::vector<std::string> hyp = {"a b c x"};
  const std::vector<std::string> ref = {"a b y c"};
  const auto raw = ev::corpus_bleu(hyp, ref, false);
  EXPECT_DOUBLE_EQ(raw.bleu, 0.0);
  const auto smooth = ev::corpus_bleu(hyp, ref, true);
  EXPECT_GT(smooth.bleu, 0.0);
}

TEST(CorpusBleu, SmoothingSubstitutionValues) {
  // hyp/ref share tokens but no bigram or higher: denominators 5,4,3,2.
  const auto s = ev::corpus_bleu({"a b c d e"}, {"a x c y e"}, true);
  EXPECT_DOUBLE_EQ(s.precisions[0], 0.6);
  EXPECT_DOUBLE_EQ(s.precisions[1], 1.0 / (2.0 * 4.0));
  EXPECT_DOUBLE_EQ(s.precisions[2], 1.0 / (4.0 * 3.0));
  EXPECT_DOUBLE_EQ(s.precisions[3], 1.0 / (8.0 * 2.0));
  const double expected =
      100.0 * std::pow(0.6 * 0.125 * (1.0 / 12.0) * (1.0 / 16.0), 0.25);
  EXPECT_NEAR(s.bleu, expected, 1e-9);
}

TEST(CorpusBleu, EmptyHypothesesWarn) {
  const auto s = ev::corpus_bleu({"", ""}, {"a b", "c"}, true);
  EXPECT_DOUBLE_EQ(s.bleu, 0.0);
  EXPECT_FALSE(s.warning.empty());
}

TEST(CorpusBleu, LengthMismatchIsInputError) {
  EXPECT_THROW(ev::corpus_bleu({"a"}, {"a", "b"}, false), minimt::Error);
  EXPECT_THROW(ev::corpus_bleu({}, {}, false), minimt::Error);
}

TEST(CorpusBleu, MatchesBruteForceOracleOnRandomCorpora) {
  Rng rng(17);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e",
                                          "f", "g", "h"};
  for (int corpus_i = 0; corpus_i < 100; ++corpus_i) {
    const std::size_t pairs = 1 + rng.next_below(20);
    std::vector<std::vector<std::string>> hyp_toks, ref_toks;
    std::vector<std::string> hyps, refs;
    for (std::size_t p = 0; p < pairs; ++p) {
      std::vector<std::string> h, r;
      const std::size_t hl = 1 + rng.next_below(12);
      const std::size_t rl = 1 + rng.next_below(12);
      for (std::size_t k = 0; k < hl; ++k)
        h.push_back(vocab[rng.next_below(vocab.size())]);
      for (std::size_t k = 0; k < rl; ++k)
        r.push_back(vocab[rng.next_below(vocab.size())]);
      hyps.push_back(join(h));
      refs.push_back(join(r));
      hyp_toks.push_back(std::move(h));
      ref_toks.push_back(std::move(r));
    }
    for (const bool smoothed : {false, true}) {
      const auto got = ev::corpus_bleu(hyps, refs, smoothed);
      const auto want = oracle_bleu(hyp_toks, ref_toks, smoothed);
      ASSERT_NEAR(got.bleu, want.bleu, 1e-9) << "corpus " << corpus_i;
      for (int n = 0; n < 4; ++n)
        ASSERT_NEAR(got.precisions[n], want.precisions[n], 1e-12);
    }
    // Smoothing only ever raises the score.
    EXPECT_GE(ev::corpus_bleu(hyps, refs, true).bleu,
              ev::corpus_bleu(hyps, refs, false).bleu - 1e-12);
  }
}

TEST(CorpusBleu, PairOrderInvariant) {
  const std::vector<std::string> hyps = {"a b c", "d e", "f g h a"};
  const std::vector<std::string> refs = {"a b x", "d e", "f h g a"};
  const auto fwd = ev::corpus_bleu(hyps, refs, true);
  const std::vector<std::string> hyps_r(hyps.rbegin(), hyps.rend());
  const std::vector<std::string> refs_r(refs.rbegin(), refs.rend());
  const auto rev = ev::corpus_bleu(hyps_r, refs_r, true);
  EXPECT_DOUBLE_EQ(fwd.bleu, rev.bleu);
}

TEST(CorpusBleu, InvariantFormulaHolds) {
  Rng rng(5);
  const std::vector<std::string> vocab = {"x", "y", "z", "w"};
  for (int i = 0; i < 20; ++i) {
    std::vector<std::string> hyps, refs;
    const std::size_t pairs = 1 + rng.next_below(6);
    for (std::size_t p = 0; p < pairs; ++p) {
      std::vector<std::string> h, r;
      for (std::size_t k = 0; k < 1 + rng.next_below(9); ++k)
        h.push_back(vocab[rng.next_below(vocab.size())]);
      for (std::size_t k = 0; k < 1 + rng.next_below(9); ++k)
        r.push_back(vocab[rng.next_below(vocab.size())]);
      hyps.push_back(join(h));
      refs.push_back(join(r));
    }
    for (const bool smoothed : {false, true}) {
      const auto s = ev::corpus_bleu(hyps, refs, smoothed);
      double prod = 1.0;
      for (const double p : s.precisions) prod *= p;
      const double expect =
          prod == 0.0 ? 0.0
                      : 100.0 * s.brevity_penalty * std::pow(prod, 0.25);
      EXPECT_NEAR(s.bleu, expect, 1e-9);
      EXPECT_GE(s.bleu, 0.0);
      EXPECT_LE(s.bleu, 100.0);
    }
  }
}

TEST(WordCountError, DirectArithmetic) {
  // counts (5, 7) vs (5, 10): d = (0, 3) -> MAE 1.5, RMSE sqrt(4.5).
  const std::vector<std::string> hyps = {"a a a a a", "b b b b b b b"};
  const std::vector<std::string> refs = {"x x x x x", "y y y y y y y y y y"};
  const auto e = ev::wordcount_error(hyps, refs);
  EXPECT_DOUBLE_EQ(e.mae, 1.5);
  EXPECT_DOUBLE_EQ(e.rmse, std::sqrt(4.5));
}

TEST(WordCountError, IdenticalIsZero) {
  const std::vector<std::string> lines = {"a b c", "d"};
  const auto e = ev::wordcount_error(lines, lines);
  EXPECT_DOUBLE_EQ(e.mae, 0.0);
  EXPECT_DOUBLE_EQ(e.rmse, 0.0);
}

TEST(WordCountError, RmseAtLeastMae) {
  Rng rng(23);
  for (int i = 0; i < 30; ++i) {
    std::vector<std::string> hyps, refs;
    for (std::size_t p = 0; p < 1 + rng.next_below(15); ++p) {
      hyps.push_back(join(std::vector<std::string>(1 + rng.next_below(10), "w")));
      refs.push_back(join(std::vector<std::string>(1 + rng.next_below(10), "v")));
    }
    const auto e = ev::wordcount_error(hyps, refs);
    EXPECT_GE(e.rmse, e.mae - 1e-12);
  }
}

TEST(BucketSplit, BoundaryAtFifteen) {
  std::vector<std::string> sources;
  std::vector<std::string> refs;
  for (const std::size_t wc : {14, 15, 16, 1}) {
    sources.push_back(join(std::vector<std::string>(wc, "s")));
    refs.push_back("r");
  }
  ev::EvalConfig cfg;  // threshold 15, source side
  const auto split = ev::bucket_split(sources, refs, cfg);
  EXPECT_EQ(split.small, (std::vector<std::size_t>{0, 3}));
  EXPECT_EQ(split.large, (std::vector<std::size_t>{1, 2}));
}

TEST(BucketSplit, AllSmallLeavesLargeEmpty) {
  std::vector<std::string> sources = {"a b", "c"};
  std::vector<std::string> refs = {"x", "y"};
  const auto split = ev::bucket_split(sources, refs, {});
  EXPECT_EQ(split.small.size(), 2u);
  EXPECT_TRUE(split.large.empty());
}

TEST(BucketSplit, ReferenceSideToggle) {
  ev::EvalConfig cfg;
  cfg.bucket_side = "reference";
  cfg.bucket_threshold = 3;
  std::vector<std::string> sources = {"s", "s"};
  std::vector<std::string> refs = {"a b c", "a b"};
  const auto split = ev::bucket_split(sources, refs, cfg);
  EXPECT_EQ(split.large, (std::vector<std::size_t>{0}));
  EXPECT_EQ(split.small, (std::vector<std::size_t>{1}));
}

namespace {

struct ReportFixture {
  std::vector<std::string> sources, refs;
  std::map<std::string, std::vector<std::string>> systems;

  ReportFixture() {
    Rng rng(41);
    const std::vector<std::string> vocab = {"one", "two",  "three",
                                            "four", "five", "six"};
    for (int i = 0; i < 50; ++i) {
      const std::size_t src_wc = 1 + rng.next_below(25);
      sources.push_back(join(std::vector<std::string>(src_wc, "mr")));
      std::vector<std::string> r;
      for (std::size_t k = 0; k < 2 + rng.next_below(8); ++k)
        r.push_back(vocab[rng.next_below(vocab.size())]);
      refs.push_back(join(r));
      // A noisy system: occasionally drop the last word.
      auto h = r;
      if (i % 3 == 0 && h.size() > 1) h.pop_back();
      systems["noisy"].push_back(join(h));
      systems["exact"].push_back(join(r));
    }
  }
};

}  // namespace

TEST(BuildReport, PerfectSystemScoresHundred) {
  ReportFixture fx;
  const auto report = ev::build_report(fx.systems, fx.refs, fx.sources, {});
  const auto& exact = report.systems.at("exact");
  for (const auto& [bucket, scores] : exact.buckets) {
    if (report.counts.at(bucket) == 0) continue;
    EXPECT_DOUBLE_EQ(scores.bleu, 100.0) << bucket;
    EXPECT_DOUBLE_EQ(scores.raw_bleu, 100.0) << bucket;
  }
  EXPECT_DOUBLE_EQ(exact.mae, 0.0);
  EXPECT_DOUBLE_EQ(exact.rmse, 0.0);
}

TEST(BuildReport, MatchesStandaloneOperations) {
  ReportFixture fx;
  ev::EvalConfig cfg;
  const auto report = ev::build_report(fx.systems, fx.refs, fx.sources, cfg);
  const auto split = ev::bucket_split(fx.sources, fx.refs, cfg);
  EXPECT_EQ(report.counts.at("small"), split.small.size());
  EXPECT_EQ(report.counts.at("large"), split.large.size());
  EXPECT_EQ(report.counts.at("small") + report.counts.at("large"),
            report.counts.at("all"));

  const auto& noisy = fx.systems.at("noisy");
  const auto sub = [&](const std::vector<std::string>& v,
                       const std::vector<std::size_t>& idx) {
    std::vector<std::string> out;
    for (const auto i : idx) out.push_back(v[i]);
    return out;
  };
  EXPECT_DOUBLE_EQ(report.systems.at("noisy").buckets.at("all").bleu,
                   ev::corpus_bleu(noisy, fx.refs, true).bleu);
  EXPECT_DOUBLE_EQ(
      report.systems.at("noisy").buckets.at("small").raw_bleu,
      ev::corpus_bleu(sub(noisy, split.small), sub(fx.refs, split.small),
                      false)
          .bleu);
  EXPECT_DOUBLE_EQ(
      report.systems.at("noisy").buckets.at("large").bleu,
      ev::corpus_bleu(sub(noisy, split.large), sub(fx.refs, split.large),
                      true)
          .bleu);
  const auto wce = ev::wordcount_error(noisy, fx.refs);
  EXPECT_DOUBLE_EQ(report.systems.at("noisy").mae, wce.mae);
  EXPECT_DOUBLE_EQ(report.systems.at("noisy").rmse, wce.rmse);
}

TEST(BuildReport, IdenticalSystemsGiveIdenticalRows) {
  ReportFixture fx;
  std::map<std::string, std::vector<std::string>> systems = {
      {"sys1", fx.systems.at("noisy")}, {"sys2", fx.systems.at("noisy")}};
  const auto report = ev::build_report(systems, fx.refs, fx.sources, {});
  EXPECT_TRUE(report.systems.at("sys1") == report.systems.at("sys2"));
}

TEST(BuildReport, MisalignedSystemNamesTheSystem) {
  ReportFixture fx;
  auto systems = fx.systems;
  systems.at("noisy").pop_back();
  try {
    ev::build_report(systems, fx.refs, fx.sources, {});
    FAIL() << "expected input error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kInput);
    EXPECT_NE(std::string(e.what()).find("noisy"), std::string::npos);
  }
}

TEST(BuildReport, RejectsTokenizedInput) {
  ReportFixture fx;
  auto systems = fx.systems;
  systems.at("noisy")[4] = "un ##aff ##able text";
  EXPECT_THROW(ev::build_report(systems, fx.refs, fx.sources, {}),
               minimt::Error);
}

TEST(RenderReport, JsonRoundTripIsByteIdentical) {
  ReportFixture fx;
  const auto report = ev::build_report(fx.systems, fx.refs, fx.sources, {});
  const std::string doc = ev::render_report(report, "json");
  const auto parsed = ev::report_from_json(nlohmann::json::parse(doc));
  EXPECT_TRUE(parsed == report);
  EXPECT_EQ(ev::render_report(parsed, "json"), doc);
}

TEST(RenderReport, EmptySystemsIsValid) {
  ev::EvalReport empty;
  empty.counts = {{"all", 0u}, {"small", 0u}, {"large", 0u}};
  const auto doc = ev::render_report(empty, "json");
  const auto parsed = ev::report_from_json(nlohmann::json::parse(doc));
  EXPECT_TRUE(parsed == empty);
  EXPECT_FALSE(ev::render_report(empty, "text").empty());
}

TEST(RenderReport, TwoSystemsRenderTwoRows) {
  ReportFixture fx;
  const auto report = ev::build_report(fx.systems, fx.refs, fx.sources, {});
  const std::string text = ev::render_report(report, "text");
  std::size_t exact_rows = 0, pos = 0;
  while ((pos = text.find("exact", pos)) != std::string::npos) {
    ++exact_rows;
    pos += 5;
  }
  EXPECT_EQ(exact_rows, 4u);  // three BLEU sections + word-count table
  EXPECT_THROW(ev::render_report(report, "xml"), minimt::Error);
}
