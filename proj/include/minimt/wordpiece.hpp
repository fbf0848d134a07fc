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
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "minimt/errors.hpp"
#include "minimt/unicode.hpp"

// WordPiece subword tokenizer: vocabulary training with the likelihood
// score freq(ab) / (freq(a) * freq(b)), greedy longest-match encoding with
// the "##" continuation prefix, and the detokenizer used before scoring.

namespace minimt::wordpiece {

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;
  static constexpr std::int32_t kBos = 2;
  static constexpr std::int32_t kEos = 3;
  static constexpr const char* kContinuation = "##";

  static const std::vector<std::string>& special_tokens() {
    static const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]",
                                                       "[BOS]", "[EOS]"};
    return kSpecials;
  }

  Vocabulary() {
    for (const auto& s : special_tokens()) add(s);
  }

  // Appends a token if absent; returns its id either way.
  std::int32_t add(const std::string& token) {
    auto [it, inserted] =
        index_.emplace(token, static_cast<std::int32_t>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  // -1 when the piece is not in the vocabulary.
  std::int32_t find(const std::string& piece) const {
    auto it = index_.find(piece);
    return it == index_.end() ? -1 : it->second;
  }

  const std::string& token(std::int32_t id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size())
      fail(ErrorKind::kInput, "token id " + std::to_string(id) +
                                  " out of range (vocab size " +
                                  std::to_string(tokens_.size()) + ")");
    return tokens_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  static bool is_special(const std::string& token) {
    const auto& s = special_tokens();
    return std::find(s.begin(), s.end(), token) != s.end();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write " + path);
    for (const auto& t : tokens_) out << t << '\n';
    if (!out) fail(ErrorKind::kIo, "write failed: " + path);
  }

  // One token per line, id = 0-based line number, specials first.
  static Vocabulary load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::kIo, "cannot open " + path);
    Vocabulary v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      unicode::validate_utf8(line, path);
      ++lineno;
      if (lineno <= special_tokens().size()) {
        if (line != special_tokens()[lineno - 1])
          fail(ErrorKind::kFormat,
               path + ": line " + std::to_string(lineno) + " must be " +
                   special_tokens()[lineno - 1] + ", got '" + line + "'");
        continue;
      }
      if (line.empty())
        fail(ErrorKind::kFormat,
             path + ": empty token at line " + std::to_string(lineno));
      if (line.rfind(kContinuation, 0) == 0 && line.size() == 2)
        fail(ErrorKind::kFormat,
             path + ": bare continuation prefix at line " +
                 std::to_string(lineno));
      if (v.find(line) != -1)
        fail(ErrorKind::kFormat, path + ": duplicate token '" + line +
                                     "' at line " + std::to_string(lineno));
      v.add(line);
    }
    if (lineno < special_tokens().size())
      fail(ErrorKind::kFormat, path + ": vocabulary must start with the " +
                                   std::to_string(special_tokens().size()) +
                                   " special tokens");
    return v;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

struct TokenizerConfig {
  bool lowercase = false;       // true for the English side
  std::size_t vocab_size = 4000;
  std::size_t min_frequency = 2;
  std::size_t max_word_chars = 100;
};

struct TokenSequence {
  std::vector<std::int32_t> ids;
  std::string surface;  // the normalized text the ids encode
};

// NFC, optional lowercasing, whitespace-run collapse, outer trim.
inline std::string normalize(const std::string& text,
                             const TokenizerConfig& cfg) {
  std::string s = unicode::nfc(text);
  if (cfg.lowercase) s = unicode::lowercase(s);
  return unicode::collapse_whitespace(s);
}

namespace detail {

// Word as a sequence of interned symbol ids. Symbol 0..k map to piece
// strings ("x" word-initial, "##x" continuation).
struct TrainWord {
  std::vector<std::uint32_t> syms;
  std::int64_t freq = 0;
};

inline std::string merge_name(const std::string& a, const std::string& b) {
  // b is always a continuation piece inside a word.
  return a + b.substr(2);
}

}  // namespace detail

inline Vocabulary train_vocab(const std::vector<std::string>& lines,
                              const TokenizerConfig& cfg) {
  // Word frequencies over normalized text. std::map keeps the alphabet
  // and word iteration deterministic.
  std::map<std::string, std::int64_t> word_freq;
  for (const auto& line : lines)
    for (const auto& w : unicode::split_words(normalize(line, cfg)))
      ++word_freq[w];

  std::vector<std::string> sym_names;
  std::unordered_map<std::string, std::uint32_t> sym_ids;
  const auto intern = [&](const std::string& name) {
    auto [it, inserted] =
        sym_ids.emplace(name, static_cast<std::uint32_t>(sym_names.size()));
    if (inserted) sym_names.push_back(name);
    return it->second;
  };

  std::vector<detail::TrainWord> words;
  words.reserve(word_freq.size());
  for (const auto& [word, freq] : word_freq) {
    const std::u32string cps = unicode::decode(word);
    detail::TrainWord tw;
    tw.freq = freq;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      std::string piece = i == 0 ? "" : Vocabulary::kContinuation;
      unicode::encode_one(cps[i], piece);
      tw.syms.push_back(intern(piece));
    }
    words.push_back(std::move(tw));
  }

  // Alphabet: every observed character form, sorted. Rare characters stay
  // in so that single-character words remain encodable.
  std::vector<std::string> alphabet = sym_names;
  std::sort(alphabet.begin(), alphabet.end());

  if (cfg.vocab_size < Vocabulary::special_tokens().size() + alphabet.size())
    fail(ErrorKind::kConfig,
         "vocab_size " + std::to_string(cfg.vocab_size) +
             " cannot hold " +
             std::to_string(Vocabulary::special_tokens().size()) +
             " specials + " + std::to_string(alphabet.size()) +
             " alphabet characters");

  Vocabulary vocab;
  for (const auto& a : alphabet) vocab.add(a);

  // Greedy merges by WordPiece score freq(ab) / (freq(a) * freq(b)).
  while (vocab.size() < cfg.vocab_size) {
    std::vector<std::int64_t> sym_freq(sym_names.size(), 0);
    std::unordered_map<std::uint64_t, std::int64_t> pair_freq;
    for (const auto& w : words) {
      for (std::size_t i = 0; i < w.syms.size(); ++i) {
        sym_freq[w.syms[i]] += w.freq;
        if (i + 1 < w.syms.size()) {
          const std::uint64_t key =
              (static_cast<std::uint64_t>(w.syms[i]) << 32) | w.syms[i + 1];
          pair_freq[key] += w.freq;
        }
      }
    }

    bool found = false;
    double best_score = 0.0;
    std::uint64_t best_key = 0;
    std::string best_name;
    for (const auto& [key, freq] : pair_freq) {
      if (static_cast<std::size_t>(freq) < cfg.min_frequency) continue;
      const std::uint32_t a = static_cast<std::uint32_t>(key >> 32);
      const std::uint32_t b = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
      const double score =
          static_cast<double>(freq) /
          (static_cast<double>(sym_freq[a]) * static_cast<double>(sym_freq[b]));
      std::string name = detail::merge_name(sym_names[a], sym_names[b]);
      // Ties resolved toward the lexicographically smaller merged token.
      if (!found || score > best_score ||
          (score == best_score && name < best_name)) {
        found = true;
        best_score = score;
        best_key = key;
        best_name = std::move(name);
      }
    }
    if (!found) break;

    const std::uint32_t a = static_cast<std::uint32_t>(best_key >> 32);
    const std::uint32_t b = static_cast<std::uint32_t>(best_key & 0xFFFFFFFFu);
    const std::uint32_t merged = intern(best_name);
    if (sym_freq.size() < sym_names.size()) sym_freq.resize(sym_names.size());
    vocab.add(best_name);

    for (auto& w : words) {
      std::vector<std::uint32_t> out;
      out.reserve(w.syms.size());
      for (std::size_t i = 0; i < w.syms.size();) {
        if (i + 1 < w.syms.size() && w.syms[i] == a && w.syms[i + 1] == b) {
          out.push_back(merged);
          i += 2;
        } else {
          out.push_back(w.syms[i]);
          ++i;
        }
      }
      w.syms = std::move(out);
    }
  }
  return vocab;
}

// Greedy longest-match-first segmentation of a single normalized word.
// Returns false when no complete segmentation exists.
inline bool segment_word(const std::string& word, const Vocabulary& vocab,
                         std::vector<std::int32_t>& out) {
  const std::u32string cps = unicode::decode(word);
  std::size_t start = 0;
  const std::size_t begin_size = out.size();
  while (start < cps.size()) {
    std::int32_t match = -1;
    std::size_t match_len = 0;
    for (std::size_t len = cps.size() - start; len >= 1; --len) {
      std::string piece = start == 0 ? "" : Vocabulary::kContinuation;
      piece += unicode::encode(
          std::u32string_view(cps).substr(start, len));
      const std::int32_t id = vocab.find(piece);
      if (id != -1) {
        match = id;
        match_len = len;
        break;
      }
    }
    if (match == -1) {
      out.resize(begin_size);
      return false;
    }
    out.push_back(match);
    start += match_len;
  }
  return true;
}

inline TokenSequence encode(const std::string& text, const Vocabulary& vocab,
                            const TokenizerConfig& cfg) {
  TokenSequence seq;
  seq.surface = normalize(text, cfg);
  for (const auto& word : unicode::split_words(seq.surface)) {
    const std::size_t chars = unicode::decode(word).size();
    if (chars > cfg.max_word_chars || !segment_word(word, vocab, seq.ids))
      seq.ids.push_back(Vocabulary::kUnk);
  }
  return seq;
}

inline std::vector<std::string> decode(const std::vector<std::int32_t>& ids,
                                       const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (std::int32_t id : ids) out.push_back(vocab.token(id));
  return out;
}

// Inverts subword segmentation: "##" pieces fuse onto the previous token,
// specials drop, and pure closing punctuation attaches without a space.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  static const std::string kClosing = ".,!?;:";
  std::vector<std::string> parts;
  for (const auto& tok : tokens) {
    if (Vocabulary::is_special(tok)) continue;
    if (tok.rfind(Vocabulary::kContinuation, 0) == 0) {
      std::string tail = tok.substr(2);
      if (parts.empty())
        parts.push_back(std::move(tail));
      else
        parts.back() += tail;
    } else {
      parts.push_back(tok);
    }
  }
  std::string out;
  for (const auto& p : parts) {
    const bool closing = p.size() == 1 && kClosing.find(p[0]) != std::string::npos;
    if (!out.empty() && !closing) out += ' ';
    out += p;
  }
  return out;
}

}  // namespace minimt::wordpiece
