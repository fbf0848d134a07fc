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

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "minimt/errors.hpp"
#include "minimt/rng.hpp"
#include "minimt/unicode.hpp"

// Parallel-corpus ingestion and hygiene: Moses-style pair files and TSV,
// deduplication, random train/valid splits, and word-count statistics.

namespace minimt::corpus {

struct SentencePair {
  std::string source;  // Marathi side
  std::string target;  // English side
  std::size_t id = 0;  // ordinal within its corpus

  bool operator==(const SentencePair& o) const {
    return source == o.source && target == o.target;
  }
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  std::string name;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

struct CorpusStats {
  std::size_t pair_count = 0;
  std::map<std::size_t, std::size_t> source_word_histogram;
  std::map<std::size_t, std::size_t> target_word_histogram;
  double source_mean_words = 0.0, target_mean_words = 0.0;
  std::size_t source_max_words = 0, target_max_words = 0;
};

struct LoadResult {
  ParallelCorpus corpus;
  std::size_t dropped_blank = 0;  // pairs removed because a side was blank
};

namespace detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorKind::kIo, "cannot read " + path);
  return buf.str();
}

// Splits on LF, tolerating CRLF. A trailing newline does not create an
// extra empty record.
inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '\n') {
      if (i == text.size() && i == start) break;
      std::size_t end = i;
      if (end > start && text[end - 1] == '\r') --end;
      lines.emplace_back(text.substr(start, end - start));
      start = i + 1;
    }
  }
  return lines;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::string text = read_file(path);
  unicode::validate_utf8(text, path);
  return split_lines(text);
}

inline void renumber(ParallelCorpus& c) {
  for (std::size_t i = 0; i < c.pairs.size(); ++i) c.pairs[i].id = i;
}

}  // namespace detail

inline LoadResult load_moses(const std::string& source_path,
                             const std::string& target_path) {
  const auto src = detail::read_lines(source_path);
  const auto tgt = detail::read_lines(target_path);
  if (src.size() != tgt.size())
    fail(ErrorKind::kAlignment,
         "line-count mismatch: " + source_path + " has " +
             std::to_string(src.size()) + " lines, " + target_path + " has " +
             std::to_string(tgt.size()));
  LoadResult r;
  r.corpus.name = source_path;
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::string s = unicode::trim(src[i]);
    std::string t = unicode::trim(tgt[i]);
    if (s.empty() || t.empty()) {
      ++r.dropped_blank;
      continue;
    }
    r.corpus.pairs.push_back({std::move(s), std::move(t), 0});
  }
  detail::renumber(r.corpus);
  return r;
}

inline LoadResult load_tsv(const std::string& path) {
  const auto lines = detail::read_lines(path);
  LoadResult r;
  r.corpus.name = path;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (unicode::trim(line).empty()) {
      ++r.dropped_blank;
      continue;
    }
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      fail(ErrorKind::kFormat, path + ": line " + std::to_string(i + 1) +
                                   " does not contain exactly one tab");
    std::string s = unicode::trim(line.substr(0, tab));
    std::string t = unicode::trim(line.substr(tab + 1));
    if (s.empty() || t.empty()) {
      ++r.dropped_blank;
      continue;
    }
    r.corpus.pairs.push_back({std::move(s), std::move(t), 0});
  }
  detail::renumber(r.corpus);
  return r;
}

inline void write_moses(const ParallelCorpus& c, const std::string& source_path,
                        const std::string& target_path) {
  std::ofstream src(source_path, std::ios::binary);
  std::ofstream tgt(target_path, std::ios::binary);
  if (!src) fail(ErrorKind::kIo, "cannot write " + source_path);
  if (!tgt) fail(ErrorKind::kIo, "cannot write " + target_path);
  for (const auto& p : c.pairs) {
    src << p.source << '\n';
    tgt << p.target << '\n';
  }
  if (!src || !tgt) fail(ErrorKind::kIo, "write failed");
}

inline void write_tsv(const ParallelCorpus& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  for (const auto& p : c.pairs) {
    if (p.source.find('\t') != std::string::npos ||
        p.target.find('\t') != std::string::npos)
      fail(ErrorKind::kFormat,
           "pair " + std::to_string(p.id) + " contains a tab; not TSV-safe");
    out << p.source << '\t' << p.target << '\n';
  }
  if (!out) fail(ErrorKind::kIo, "write failed");
}

// Keeps the first occurrence of each exact (source, target) pair.
inline ParallelCorpus dedup(const ParallelCorpus& c) {
  ParallelCorpus out;
  out.name = c.name;
  std::unordered_set<std::string> seen;
  seen.reserve(c.pairs.size());
  for (const auto& p : c.pairs) {
    std::string key = p.source + '\t' + p.target;
    if (seen.insert(std::move(key)).second) out.pairs.push_back(p);
  }
  detail::renumber(out);
  return out;
}

struct SplitResult {
  ParallelCorpus train;
  ParallelCorpus valid;
};

inline SplitResult split(const ParallelCorpus& c, double valid_fraction,
                         std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0))
    fail(ErrorKind::kConfig, "valid_fraction must be in (0,1), got " +
                                 std::to_string(valid_fraction));
  if (c.pairs.size() < 2)
    fail(ErrorKind::kConfig, "split needs at least 2 pairs");
  const std::size_t n = c.pairs.size();
  std::size_t n_valid = static_cast<std::size_t>(
      valid_fraction * static_cast<double>(n) + 0.5);
  n_valid = std::max<std::size_t>(1, std::min(n_valid, n - 1));

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);

  std::vector<bool> in_valid(n, false);
  for (std::size_t i = 0; i < n_valid; ++i) in_valid[idx[i]] = true;

  SplitResult r;
  r.train.name = c.name + ".train";
  r.valid.name = c.name + ".valid";
  for (std::size_t i = 0; i < n; ++i)
    (in_valid[i] ? r.valid : r.train).pairs.push_back(c.pairs[i]);
  detail::renumber(r.train);
  detail::renumber(r.valid);
  return r;
}

inline CorpusStats stats(const ParallelCorpus& c) {
  CorpusStats s;
  s.pair_count = c.pairs.size();
  std::size_t src_total = 0, tgt_total = 0;
  for (const auto& p : c.pairs) {
    const std::size_t sw = unicode::word_count(p.source);
    const std::size_t tw = unicode::word_count(p.target);
    ++s.source_word_histogram[sw];
    ++s.target_word_histogram[tw];
    src_total += sw;
    tgt_total += tw;
    s.source_max_words = std::max(s.source_max_words, sw);
    s.target_max_words = std::max(s.target_max_words, tw);
  }
  if (s.pair_count > 0) {
    s.source_mean_words =
        static_cast<double>(src_total) / static_cast<double>(s.pair_count);
    s.target_mean_words =
        static_cast<double>(tgt_total) / static_cast<double>(s.pair_count);
  }
  return s;
}

}  // namespace minimt::corpus
