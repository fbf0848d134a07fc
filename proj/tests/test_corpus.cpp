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

#include "minimt/corpus.hpp"

#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

namespace corpus = minimt::corpus;
using minimt::testutil::TempDir;

namespace {

corpus::ParallelCorpus make_corpus(
    std::initializer_list<std::pair<const char*, const char*>> pairs) {
  corpus::ParallelCorpus c;
  for (const auto& [s, t] : pairs)
    c.pairs.push_back({s, t, c.pairs.size()});
  return c;
}

}  // namespace

TEST(LoadMoses, AlignsLineByLine) {
  TempDir tmp;
  const auto src = tmp.write("a.mr", "एक\nदोन\nतीन\n");
  const auto tgt = tmp.write("a.en", "one\ntwo\nthree\n");
  const auto r = corpus::load_moses(src, tgt);
  ASSERT_EQ(r.corpus.size(), 3u);
  EXPECT_EQ(r.dropped_blank, 0u);
  EXPECT_EQ(r.corpus.pairs[0].source, "एक");
  EXPECT_EQ(r.corpus.pairs[2].target, "three");
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.corpus.pairs[i].id, i);
}

TEST(LoadMoses, DropsBlankPairs) {
  TempDir tmp;
  const auto src = tmp.write("a.mr", "एक\nदोन\nतीन\n");
  const auto tgt = tmp.write("a.en", "one\n   \nthree\n");
  const auto r = corpus::load_moses(src, tgt);
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.dropped_blank, 1u);
  EXPECT_EQ(r.corpus.pairs[1].source, "तीन");
  EXPECT_EQ(r.corpus.pairs[1].id, 1u);
}

TEST(LoadMoses, LineCountMismatchIsAnError) {
  TempDir tmp;
  const auto src = tmp.write("a.mr", "1\n2\n3\n4\n5\n");
  const auto tgt = tmp.write("a.en", "1\n2\n3\n4\n");
  try {
    corpus::load_moses(src, tgt);
    FAIL() << "expected alignment error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kAlignment);
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("4"), std::string::npos);
  }
}

TEST(LoadMoses, MissingFileIsIoError) {
  TempDir tmp;
  const auto tgt = tmp.write("a.en", "x\n");
  try {
    corpus::load_moses(tmp.path("absent.mr"), tgt);
    FAIL() << "expected I/O error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kIo);
  }
}

TEST(LoadMoses, InvalidUtf8IsAHardError) {
  TempDir tmp;
  const auto src = tmp.write("a.mr", "ok\n\xC3\x28\n");
  const auto tgt = tmp.write("a.en", "ok\nbad\n");
  EXPECT_THROW(corpus::load_moses(src, tgt), minimt::Error);
}

TEST(LoadMoses, AcceptsCrlf) {
  TempDir tmp;
  const auto src = tmp.write("a.mr", "एक\r\nदोन\r\n");
  const auto tgt = tmp.write("a.en", "one\r\ntwo\r\n");
  const auto r = corpus::load_moses(src, tgt);
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.pairs[0].source, "एक");
}

TEST(LoadTsv, ParsesTabSeparatedPairs) {
  TempDir tmp;
  const auto p = tmp.write("c.tsv", "अ\tA\nब\tB\n");
  const auto r = corpus::load_tsv(p);
  ASSERT_EQ(r.corpus.size(), 2u);
  EXPECT_EQ(r.corpus.pairs[0].source, "अ");
  EXPECT_EQ(r.corpus.pairs[1].target, "B");
}

TEST(LoadTsv, MissingTabIsFormatErrorWithLineNumber) {
  TempDir tmp;
  const auto p = tmp.write("c.tsv", "अ A\n");
  try {
    corpus::load_tsv(p);
    FAIL() << "expected format error";
  } catch (const minimt::Error& e) {
    EXPECT_EQ(e.kind(), minimt::ErrorKind::kFormat);
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(LoadTsv, EmptyFileGivesEmptyCorpus) {
  TempDir tmp;
  const auto p = tmp.write("c.tsv", "");
  EXPECT_TRUE(corpus::load_tsv(p).corpus.empty());
}

TEST(MosesRoundTrip, LoadWriteLoadIsIdentity) {
  TempDir tmp;
  const auto c = make_corpus({{"एक घर", "a house"}, {"दोन", "two"}});
  corpus::write_moses(c, tmp.path("w.mr"), tmp.path("w.en"));
  const auto r1 = corpus::load_moses(tmp.path("w.mr"), tmp.path("w.en"));
  corpus::write_moses(r1.corpus, tmp.path("w2.mr"), tmp.path("w2.en"));
  const auto r2 = corpus::load_moses(tmp.path("w2.mr"), tmp.path("w2.en"));
  ASSERT_EQ(r1.corpus.size(), r2.corpus.size());
  for (std::size_t i = 0; i < r1.corpus.size(); ++i)
    EXPECT_TRUE(r1.corpus.pairs[i] == r2.corpus.pairs[i]);
}

TEST(Dedup, KeepsFirstOccurrence) {
  const auto c = make_corpus({{"a", "b"}, {"a", "b"}, {"c", "d"}});
  const auto d = corpus::dedup(c);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.pairs[0].source, "a");
  EXPECT_EQ(d.pairs[1].source, "c");
  EXPECT_EQ(d.pairs[1].id, 1u);
}

TEST(Dedup, PairIdentityNotSourceIdentity) {
  const auto c = make_corpus({{"a", "b"}, {"a", "c"}});
  EXPECT_EQ(corpus::dedup(c).size(), 2u);
}

TEST(Dedup, Idempotent) {
  const auto c = make_corpus({{"a", "b"}, {"a", "b"}, {"c", "d"}, {"a", "c"}});
  const auto once = corpus::dedup(c);
  const auto twice = corpus::dedup(once);
  ASSERT_EQ(once.size(), twice.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    EXPECT_TRUE(once.pairs[i] == twice.pairs[i]);
}

TEST(Split, DeterministicAndExact) {
  corpus::ParallelCorpus c;
  for (int i = 0; i < 10; ++i)
    c.pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i),
                       static_cast<std::size_t>(i)});
  const auto r1 = corpus::split(c, 0.2, 7);
  const auto r2 = corpus::split(c, 0.2, 7);
  EXPECT_EQ(r1.train.size(), 8u);
  EXPECT_EQ(r1.valid.size(), 2u);
  ASSERT_EQ(r1.valid.size(), r2.valid.size());
  for (std::size_t i = 0; i < r1.valid.size(); ++i)
    EXPECT_TRUE(r1.valid.pairs[i] == r2.valid.pairs[i]);
}

TEST(Split, PartitionHoldsForManySeeds) {
  corpus::ParallelCorpus c;
  for (int i = 0; i < 23; ++i)
    c.pairs.push_back({"s" + std::to_string(i), "t" + std::to_string(i),
                       static_cast<std::size_t>(i)});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = corpus::split(c, 0.3, seed);
    EXPECT_EQ(r.train.size() + r.valid.size(), c.size());
    std::set<std::string> seen;
    for (const auto& p : r.train.pairs) seen.insert(p.source);
    for (const auto& p : r.valid.pairs) {
      EXPECT_EQ(seen.count(p.source), 0u) << "pair in both splits";
      seen.insert(p.source);
    }
    EXPECT_EQ(seen.size(), c.size());
  }
}

TEST(Split, MinimumOneValidPair) {
  const auto c = make_corpus({{"a", "x"}, {"b", "y"}});
  const auto r = corpus::split(c, 0.4, 0);
  EXPECT_EQ(r.train.size(), 1u);
  EXPECT_EQ(r.valid.size(), 1u);
}

TEST(Split, BadFractionIsConfigError) {
  const auto c = make_corpus({{"a", "x"}, {"b", "y"}});
  EXPECT_THROW(corpus::split(c, 1.5, 0), minimt::Error);
  EXPECT_THROW(corpus::split(c, 0.0, 0), minimt::Error);
}

TEST(Stats, CountsWhitespaceWords) {
  const auto c = make_corpus({{"एक दोन तीन", "one two three"}, {"a  b", "c"}});
  const auto s = corpus::stats(c);
  EXPECT_EQ(s.pair_count, 2u);
  EXPECT_EQ(s.source_word_histogram.at(3), 1u);
  EXPECT_EQ(s.source_word_histogram.at(2), 1u);  // double space counts 2
  EXPECT_EQ(s.target_word_histogram.at(1), 1u);
  EXPECT_EQ(s.source_max_words, 3u);
  EXPECT_DOUBLE_EQ(s.source_mean_words, 2.5);
}

TEST(Stats, HistogramsSumToPairCount) {
  corpus::ParallelCorpus c;
  for (int i = 0; i < 17; ++i) {
    std::string s, t;
    for (int k = 0; k <= i % 5; ++k) s += "w ";
    for (int k = 0; k <= i % 3; ++k) t += "v ";
    c.pairs.push_back({s, t, static_cast<std::size_t>(i)});
  }
  const auto st = corpus::stats(c);
  std::size_t src_sum = 0, tgt_sum = 0;
  for (const auto& [wc, f] : st.source_word_histogram) src_sum += f;
  for (const auto& [wc, f] : st.target_word_histogram) tgt_sum += f;
  EXPECT_EQ(src_sum, st.pair_count);
  EXPECT_EQ(tgt_sum, st.pair_count);
}

TEST(Stats, EmptyCorpusIsZeroed) {
  const auto s = corpus::stats({});
  EXPECT_EQ(s.pair_count, 0u);
  EXPECT_TRUE(s.source_word_histogram.empty());
  EXPECT_DOUBLE_EQ(s.source_mean_words, 0.0);
}
