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

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "minimt/corpus.hpp"
#include "minimt/errors.hpp"
#include "minimt/unicode.hpp"

// Dictionary-based pair quality filter: a pair survives when at least a
// configurable fraction of its translated (target-side) words appears among
// the dictionary translations of its source words.

namespace minimt::dictfilter {

class BilingualDictionary {
 public:
  using TranslationSet = std::unordered_set<std::string>;

  // Words are stored lowercased and must be whitespace-free.
  void add(const std::string& source_word, const std::string& target_word) {
    entries_[unicode::lowercase(source_word)].insert(
        unicode::lowercase(target_word));
  }

  const TranslationSet* find(const std::string& normalized_source) const {
    auto it = entries_.find(normalized_source);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return entries_.size(); }

  // Swapped-direction view (target word -> source words lookup).
  BilingualDictionary inverted() const {
    BilingualDictionary inv;
    for (const auto& [src, tgts] : entries_) {
      for (const auto& tgt : tgts) inv.entries_[tgt].insert(src);
    }
    return inv;
  }

 private:
  std::unordered_map<std::string, TranslationSet> entries_;
};

struct FilterConfig {
  double threshold = 0.30;
  bool strip_punctuation = true;
  // When set, the roles flip: candidate set from target words, ratio over
  // source words. Kept for experimentation; the default matches the filter
  // on the translated (English) side.
  bool reverse = false;
};

struct FilterReport {
  std::size_t kept_count = 0;
  std::size_t rejected_count = 0;
  // Frequencies per match-ratio decile: bin k covers [k/10, (k+1)/10),
  // with ratio 1.0 counted in the last bin.
  std::array<std::size_t, 10> ratio_histogram{};

  nlohmann::json to_json() const {
    return {{"kept_count", kept_count},
            {"rejected_count", rejected_count},
            {"ratio_histogram", ratio_histogram}};
  }
};

inline BilingualDictionary load_dictionary(const std::string& path) {
  const auto lines = corpus::detail::read_lines(path);
  BilingualDictionary dict;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& line = lines[i];
    if (unicode::trim(line).empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos ||
        line.find('\t', tab + 1) != std::string::npos)
      fail(ErrorKind::kFormat, path + ": line " + std::to_string(i + 1) +
                                   " is not source<TAB>target");
    const std::string src = unicode::trim(line.substr(0, tab));
    const std::string tgt = unicode::trim(line.substr(tab + 1));
    if (src.empty() || tgt.empty() ||
        unicode::split_words(src).size() != 1 ||
        unicode::split_words(tgt).size() != 1)
      fail(ErrorKind::kFormat, path + ": line " + std::to_string(i + 1) +
                                   " must hold exactly one word per side");
    dict.add(src, tgt);
  }
  return dict;
}

namespace detail {

inline std::string normalize_word(const std::string& word,
                                  const FilterConfig& cfg) {
  std::string w = unicode::lowercase(word);
  if (cfg.strip_punctuation) w = unicode::strip_outer_punct(w);
  return w;
}

// Normalized words of a sentence; words that normalize away (pure
// punctuation) are dropped.
inline std::vector<std::string> normalized_words(const std::string& text,
                                                 const FilterConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& w : unicode::split_words(text)) {
    std::string n = normalize_word(w, cfg);
    if (!n.empty()) out.push_back(std::move(n));
  }
  return out;
}

inline double ratio_impl(const std::string& from_text,
                         const std::string& to_text,
                         const BilingualDictionary& dict,
                         const FilterConfig& cfg) {
  std::unordered_set<std::string> candidates;
  for (const auto& w : normalized_words(from_text, cfg)) {
    if (const auto* t = dict.find(w))
      candidates.insert(t->begin(), t->end());
  }
  const auto words = normalized_words(to_text, cfg);
  if (words.empty()) return 0.0;
  std::size_t matched = 0;
  for (const auto& w : words)
    if (candidates.count(w)) ++matched;
  return static_cast<double>(matched) / static_cast<double>(words.size());
}

}  // namespace detail

// Fraction of the pair's target words (multiset) found among the dictionary
// translations of its source words.
inline double match_ratio(const corpus::SentencePair& pair,
                          const BilingualDictionary& dict,
                          const FilterConfig& cfg = {}) {
  if (cfg.reverse)
    return detail::ratio_impl(pair.target, pair.source, dict.inverted(), cfg);
  return detail::ratio_impl(pair.source, pair.target, dict, cfg);
}

struct FilterResult {
  corpus::ParallelCorpus kept;
  corpus::ParallelCorpus rejected;
  FilterReport report;
};

inline FilterResult filter_corpus(const corpus::ParallelCorpus& c,
                                  const BilingualDictionary& dict,
                                  const FilterConfig& cfg = {}) {
  if (!(cfg.threshold >= 0.0 && cfg.threshold <= 1.0))
    fail(ErrorKind::kConfig,
         "threshold must be in [0,1], got " + std::to_string(cfg.threshold));
  // The reverse direction inverts the dictionary once up front.
  const BilingualDictionary inv =
      cfg.reverse ? dict.inverted() : BilingualDictionary{};
  FilterResult r;
  r.kept.name = c.name + ".kept";
  r.rejected.name = c.name + ".rejected";
  for (const auto& p : c.pairs) {
    const double ratio =
        cfg.reverse ? detail::ratio_impl(p.target, p.source, inv, cfg)
                    : detail::ratio_impl(p.source, p.target, dict, cfg);
    const std::size_t bin =
        std::min<std::size_t>(9, static_cast<std::size_t>(ratio * 10.0));
    ++r.report.ratio_histogram[bin];
    // "at-least" threshold: the boundary ratio is kept.
    if (ratio >= cfg.threshold) {
      r.kept.pairs.push_back(p);
      ++r.report.kept_count;
    } else {
      r.rejected.pairs.push_back(p);
      ++r.report.rejected_count;
    }
  }
  corpus::detail::renumber(r.kept);
  corpus::detail::renumber(r.rejected);
  return r;
}

}  // namespace minimt::dictfilter
