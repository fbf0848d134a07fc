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

#include "minimt/wordpiece.hpp"

#include <gtest/gtest.h>

#include "minimt/rng.hpp"
#include "test_util.hpp"

namespace wp = minimt::wordpiece;
using minimt::testutil::TempDir;
using wp::Vocabulary;

namespace {

Vocabulary vocab_from(std::initializer_list<const char*> pieces) {
  Vocabulary v;
  for (const char* p : pieces) v.add(p);
  return v;
}

wp::TokenizerConfig lc_cfg() {
  wp::TokenizerConfig cfg;
  cfg.lowercase = true;
  return cfg;
}

}  // namespace

TEST(Normalize, LowercaseAndWhitespace) {
  EXPECT_EQ(wp::normalize("The  CAT", lc_cfg()), "the cat");
  EXPECT_EQ(wp::normalize("  a  ", lc_cfg()), "a");
  EXPECT_EQ(wp::normalize("", lc_cfg()), "");
}

TEST(Normalize, MarathiUntouchedWithoutLowercase) {
  wp::TokenizerConfig cfg;  // lowercase=false for the Marathi side
  EXPECT_EQ(wp::normalize("मी  घरी जातो", cfg), "मी घरी जातो");
  EXPECT_EQ(wp::normalize("Mixed CASE", cfg), "Mixed CASE");
}

TEST(Normalize, AppliesNfc) {
  // e + combining acute composes to é.
  EXPECT_EQ(wp::normalize("caf\x65\xcc\x81", lc_cfg()), "caf\xc3\xa9");
}

TEST(TrainVocab, HandTracedMerges) {
  // One word "aaab" with frequency 3. Symbols: a(3), ##a(6), ##b(3).
  // Pair scores: (a,##a) 3/18, (##a,##a) 3/36, (##a,##b) 3/18.
  // Tie between merged names "aa" and "##ab": "##ab" wins ('#' < 'a').
  // Then (##a,##ab) and (a,##a) tie at 1/3: "##aab" < "aa".
  // Then (a,##aab) -> "aaab". Vocabulary must contain the full word.
  wp::TokenizerConfig cfg;
  cfg.vocab_size = 32;
  cfg.min_frequency = 2;
  const auto v = wp::train_vocab({"aaab", "aaab", "aaab"}, cfg);
  EXPECT_NE(v.find("##ab"), -1);
  EXPECT_NE(v.find("##aab"), -1);
  EXPECT_NE(v.find("aaab"), -1);
  // Merge order is pinned: alphabet (##a, ##b, a) then merges.
  EXPECT_EQ(v.token(4), "##a");
  EXPECT_EQ(v.token(5), "##b");
  EXPECT_EQ(v.token(6), "a");
  EXPECT_EQ(v.token(7), "##ab");
  EXPECT_EQ(v.token(8), "##aab");
  EXPECT_EQ(v.token(9), "aaab");
}

TEST(TrainVocab, SingleCharacterCorpus) {
  wp::TokenizerConfig cfg;
  cfg.vocab_size = 16;
  const auto v = wp::train_vocab({"a"}, cfg);
  EXPECT_EQ(v.size(), 5u);  // 4 specials + "a"
  EXPECT_EQ(v.token(4), "a");
}

TEST(TrainVocab, TooSmallVocabSizeIsConfigError) {
  wp::TokenizerConfig cfg;
  cfg.vocab_size = 3;
  try {
    wp::train_vocab({"a"}, cfg);
    FAIL() << "expected config error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kConfig);
  }
}

TEST(TrainVocab, DeterministicAcrossRuns) {
  std::vector<std::string> lines;
  minimt::Rng rng(3);
  const std::vector<std::string> words = {"apple",  "banana", "cherry",
                                          "applet", "banner", "cheer"};
  for (int i = 0; i < 200; ++i) {
    std::string line;
    for (int k = 0; k < 5; ++k) line += words[rng.next_below(words.size())] + " ";
    lines.push_back(line);
  }
  wp::TokenizerConfig cfg = lc_cfg();
  cfg.vocab_size = 64;
  const auto v1 = wp::train_vocab(lines, cfg);
  const auto v2 = wp::train_vocab(lines, cfg);
  ASSERT_EQ(v1.size(), v2.size());
  EXPECT_EQ(v1.tokens(), v2.tokens());
}

TEST(Encode, GreedyLongestMatch) {
  const auto v = vocab_from({"un", "##aff", "##able", "u", "##n", "##a",
                             "##f", "##b", "##l", "##e", "a"});
  const auto seq = wp::encode("unaffable", v, {});
  const auto toks = wp::decode(seq.ids, v);
  ASSERT_EQ(toks.size(), 3u);
  EXPECT_EQ(toks[0], "un");
  EXPECT_EQ(toks[1], "##aff");
  EXPECT_EQ(toks[2], "##able");
}

TEST(Encode, UnknownFirstCharacterGivesUnk) {
  const auto v = vocab_from({"ab", "a", "##b"});
  const auto seq = wp::encode("xb", v, {});
  ASSERT_EQ(seq.ids.size(), 1u);
  EXPECT_EQ(seq.ids[0], Vocabulary::kUnk);
}

TEST(Encode, UnsegmentableTailGivesWholeWordUnk) {
  // "ab" has pieces for "a" but no continuation for "b".
  const auto v = vocab_from({"a", "b"});
  const auto seq = wp::encode("ab", v, {});
  ASSERT_EQ(seq.ids.size(), 1u);
  EXPECT_EQ(seq.ids[0], Vocabulary::kUnk);
}

TEST(Encode, EmptyTextGivesEmptySequence) {
  const auto v = vocab_from({"a"});
  EXPECT_TRUE(wp::encode("", v, {}).ids.empty());
  EXPECT_TRUE(wp::encode("   ", v, {}).ids.empty());
}

TEST(Encode, OverlongWordBecomesUnk) {
  Vocabulary v;
  v.add("a");
  v.add("##a");
  wp::TokenizerConfig cfg;
  cfg.max_word_chars = 4;
  const auto seq = wp::encode("aaaaa", v, cfg);
  ASSERT_EQ(seq.ids.size(), 1u);
  EXPECT_EQ(seq.ids[0], Vocabulary::kUnk);
}

TEST(Encode, NeverEmitsContinuationAtWordStart) {
  const auto v = vocab_from({"##ab", "a", "##b", "b"});
  const auto seq = wp::encode("ab ab", v, {});
  const auto toks = wp::decode(seq.ids, v);
  ASSERT_FALSE(toks.empty());
  bool word_start = true;
  for (const auto& t : toks) {
    if (word_start)
      EXPECT_NE(t.rfind("##", 0), 0u) << "word-initial continuation piece";
    word_start = false;
  }
}

// Greedy property: each emitted piece is the longest vocabulary match at
// its position, checked against a per-word brute force.
TEST(Encode, GreedyPropertyBruteForce) {
  minimt::Rng rng(11);
  std::vector<std::string> lines;
  for (int i = 0; i < 60; ++i) {
    std::string line;
    for (int k = 0; k < 4; ++k) {
      const int len = 1 + static_cast<int>(rng.next_below(8));
      for (int c = 0; c < len; ++c)
        line += static_cast<char>('a' + rng.next_below(4));
      line += ' ';
    }
    lines.push_back(line);
  }
  wp::TokenizerConfig cfg;
  cfg.vocab_size = 48;
  cfg.min_frequency = 1;
  const auto v = wp::train_vocab(lines, cfg);

  for (const auto& line : lines) {
    const auto seq = wp::encode(line, v, cfg);
    const auto toks = wp::decode(seq.ids, v);
    // Walk the tokens word by word and verify longest-match greediness.
    std::size_t ti = 0;
    for (const auto& word : minimt::unicode::split_words(seq.surface)) {
      std::u32string cps = minimt::unicode::decode(word);
      if (toks[ti] == "[UNK]") {
        ++ti;
        continue;
      }
      std::size_t pos = 0;
      while (pos < cps.size()) {
        ASSERT_LT(ti, toks.size());
        const std::string& emitted = toks[ti];
        // Brute force: longest match at pos.
        std::string best;
        for (std::size_t len = cps.size() - pos; len >= 1; --len) {
          std::string piece = pos == 0 ? "" : "##";
          piece += minimt::unicode::encode(
              std::u32string_view(cps).substr(pos, len));
          if (v.find(piece) != -1) {
            best = piece;
            break;
          }
        }
        EXPECT_EQ(emitted, best);
        const std::size_t body = minimt::unicode::decode(emitted).size() -
                                 (pos == 0 ? 0 : 2);
        pos += body;
        ++ti;
      }
    }
    EXPECT_EQ(ti, toks.size());
  }
}

TEST(Decode, InverseLookupAndRangeError) {
  const auto v = vocab_from({"un", "##aff"});
  EXPECT_TRUE(wp::decode({}, v).empty());
  const auto toks = wp::decode({4, 5}, v);
  ASSERT_EQ(toks.size(), 2u);
  EXPECT_EQ(toks[0], "un");
  EXPECT_EQ(toks[1], "##aff");
  EXPECT_THROW(wp::decode({static_cast<std::int32_t>(v.size())}, v),
               minimt::Error);
}

TEST(Detokenize, FusesContinuations) {
  EXPECT_EQ(wp::detokenize({"un", "##aff", "##able"}), "unaffable");
  EXPECT_EQ(wp::detokenize({}), "");
}

TEST(Detokenize, AttachesClosingPunctuation) {
  EXPECT_EQ(wp::detokenize({"today", "is", "june", "18th", "!"}),
            "today is june 18th!");
  EXPECT_EQ(wp::detokenize({"a", ",", "b", "."}), "a, b.");
  // Multi-char punctuation tokens stay separate.
  EXPECT_EQ(wp::detokenize({"a", "..."}), "a ...");
}

TEST(Detokenize, DropsSpecials) {
  EXPECT_EQ(wp::detokenize({"[BOS]", "hi", "[PAD]", "there", "[EOS]"}),
            "hi there");
  EXPECT_EQ(wp::detokenize({"[BOS]", "un", "[PAD]", "##til", "[EOS]"}),
            "until");
}

TEST(RoundTrip, DetokenizeDecodeEncodeIsNormalize) {
  std::vector<std::string> lines;
  minimt::Rng rng(5);
  const std::vector<std::string> words = {"the",   "cat",  "sat",   "mat",
                                          "house", "bird", "water", "sky"};
  for (int i = 0; i < 100; ++i) {
    std::string line;
    const int n = 1 + static_cast<int>(rng.next_below(7));
    for (int k = 0; k < n; ++k) line += words[rng.next_below(words.size())] + " ";
    lines.push_back(line);
  }
  wp::TokenizerConfig cfg = lc_cfg();
  cfg.vocab_size = 128;
  cfg.min_frequency = 1;
  const auto v = wp::train_vocab(lines, cfg);
  for (const auto& line : lines) {
    const auto seq = wp::encode(line, v, cfg);
    for (std::int32_t id : seq.ids) ASSERT_NE(id, Vocabulary::kUnk);
    EXPECT_EQ(wp::detokenize(wp::decode(seq.ids, v)),
              wp::normalize(line, cfg));
  }
}

TEST(VocabFile, SaveLoadRoundTrip) {
  TempDir tmp;
  const auto v = vocab_from({"un", "##aff", "मांजर", "##र"});
  const auto path = tmp.path("vocab.txt");
  v.save(path);
  const auto loaded = Vocabulary::load(path);
  EXPECT_EQ(loaded.tokens(), v.tokens());
}

TEST(VocabFile, RejectsBadSpecialHeader) {
  TempDir tmp;
  const auto p = tmp.write("v.txt", "[PAD]\n[UNK]\n[BOS]\nwrong\nx\n");
  EXPECT_THROW(Vocabulary::load(p), minimt::Error);
}

TEST(VocabFile, RejectsDuplicates) {
  TempDir tmp;
  const auto p = tmp.write("v.txt", "[PAD]\n[UNK]\n[BOS]\n[EOS]\nx\nx\n");
  EXPECT_THROW(Vocabulary::load(p), minimt::Error);
}

TEST(VocabFile, SpecialsOccupyFixedIds) {
  Vocabulary v;
  EXPECT_EQ(v.find("[PAD]"), Vocabulary::kPad);
  EXPECT_EQ(v.find("[UNK]"), Vocabulary::kUnk);
  EXPECT_EQ(v.find("[BOS]"), Vocabulary::kBos);
  EXPECT_EQ(v.find("[EOS]"), Vocabulary::kEos);
}
