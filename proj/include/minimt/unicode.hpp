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
#include <string>
#include <string_view>
#include <vector>

#include "minimt/errors.hpp"
#include "minimt/unicode_data.hpp"

// UTF-8 handling plus the small slice of Unicode this toolkit needs:
// NFC normalization, simple lowercasing, punctuation / whitespace classes.
// All tables live in unicode_data.hpp (generated from the UCD).

namespace minimt::unicode {

inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes one code point starting at s[i]. Advances i past the sequence.
// Throws on malformed input (overlong forms, surrogates, truncation);
// corrupted corpora must fail loudly instead of being silently patched.
inline char32_t decode_one(std::string_view s, std::size_t& i) {
  const auto byte = [&](std::size_t k) -> std::uint32_t {
    return static_cast<unsigned char>(s[k]);
  };
  const std::uint32_t b0 = byte(i);
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len;
  std::uint32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    fail(ErrorKind::kFormat, "invalid UTF-8 lead byte at offset " +
                                 std::to_string(i));
  }
  if (i + len > s.size())
    fail(ErrorKind::kFormat, "truncated UTF-8 sequence at offset " +
                                 std::to_string(i));
  for (int k = 1; k < len; ++k) {
    const std::uint32_t b = byte(i + k);
    if ((b & 0xC0) != 0x80)
      fail(ErrorKind::kFormat, "invalid UTF-8 continuation at offset " +
                                   std::to_string(i + k));
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr std::uint32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
  if (cp < kMinByLen[len] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
    fail(ErrorKind::kFormat,
         "invalid UTF-8 code point at offset " + std::to_string(i));
  i += len;
  return cp;
}

inline std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) out.push_back(decode_one(s, i));
  return out;
}

inline void encode_one(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size() * 2);
  for (char32_t cp : cps) encode_one(cp, out);
  return out;
}

// Validates without building the decoded string.
inline void validate_utf8(std::string_view s, const std::string& context) {
  std::size_t i = 0;
  try {
    while (i < s.size()) decode_one(s, i);
  } catch (const Error& e) {
    fail(ErrorKind::kFormat, context + ": " + e.what());
  }
}

namespace detail {

template <typename Entry, std::size_t N>
inline const Entry* find_cp(const Entry (&table)[N], char32_t cp) {
  auto it = std::lower_bound(
      std::begin(table), std::end(table), cp,
      [](const Entry& e, char32_t c) { return e.cp < c; });
  return (it != std::end(table) && it->cp == cp) ? it : nullptr;
}

}  // namespace detail

inline char32_t to_lower(char32_t cp) {
  const auto* e = detail::find_cp(unicode_data::kLowercase, cp);
  return e ? e->value : cp;
}

inline bool is_punct(char32_t cp) {
  auto it = std::upper_bound(
      std::begin(unicode_data::kPunct), std::end(unicode_data::kPunct), cp,
      [](char32_t c, const unicode_data::CpRange& r) { return c < r.lo; });
  if (it == std::begin(unicode_data::kPunct)) return false;
  --it;
  return cp >= it->lo && cp <= it->hi;
}

inline bool is_whitespace(char32_t cp) {
  return std::binary_search(std::begin(unicode_data::kWhitespace),
                            std::end(unicode_data::kWhitespace), cp);
}

inline std::uint8_t combining_class(char32_t cp) {
  const auto* e = detail::find_cp(unicode_data::kCcc, cp);
  return e ? e->ccc : 0;
}

// ---- NFC (UAX #15) ----------------------------------------------------

namespace detail {

constexpr char32_t kHangulSBase = 0xAC00;
constexpr char32_t kHangulLBase = 0x1100;
constexpr char32_t kHangulVBase = 0x1161;
constexpr char32_t kHangulTBase = 0x11A7;
constexpr int kHangulLCount = 19, kHangulVCount = 21, kHangulTCount = 28;
constexpr int kHangulNCount = kHangulVCount * kHangulTCount;
constexpr int kHangulSCount = kHangulLCount * kHangulNCount;

inline void decompose_cp(char32_t cp, std::u32string& out) {
  if (cp >= kHangulSBase && cp < kHangulSBase + kHangulSCount) {
    const int s = static_cast<int>(cp - kHangulSBase);
    out.push_back(kHangulLBase + s / kHangulNCount);
    out.push_back(kHangulVBase + (s % kHangulNCount) / kHangulTCount);
    const int t = s % kHangulTCount;
    if (t > 0) out.push_back(kHangulTBase + t);
    return;
  }
  if (const auto* e = find_cp(unicode_data::kDecomp, cp)) {
    for (std::uint32_t k = 0; k < e->len; ++k)
      out.push_back(unicode_data::kDecompPool[e->offset + k]);
    return;
  }
  out.push_back(cp);
}

inline bool compose_pair(char32_t a, char32_t b, char32_t& out) {
  // Hangul: L+V and LV+T compose algorithmically.
  if (a >= kHangulLBase && a < kHangulLBase + kHangulLCount &&
      b >= kHangulVBase && b < kHangulVBase + kHangulVCount) {
    out = kHangulSBase + ((a - kHangulLBase) * kHangulVCount +
                          (b - kHangulVBase)) *
                             kHangulTCount;
    return true;
  }
  if (a >= kHangulSBase && a < kHangulSBase + kHangulSCount &&
      (a - kHangulSBase) % kHangulTCount == 0 && b > kHangulTBase &&
      b < kHangulTBase + kHangulTCount) {
    out = a + (b - kHangulTBase);
    return true;
  }
  const std::uint64_t key =
      (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
  auto it = std::lower_bound(
      std::begin(unicode_data::kComp), std::end(unicode_data::kComp), key,
      [](const unicode_data::CompEntry& e, std::uint64_t k) {
        return e.key < k;
      });
  if (it != std::end(unicode_data::kComp) && it->key == key) {
    out = it->composite;
    return true;
  }
  return false;
}

}  // namespace detail

inline std::u32string nfc(std::u32string_view in) {
  // 1. Full canonical decomposition (the table is already fully expanded).
  std::u32string d;
  d.reserve(in.size());
  for (char32_t cp : in) detail::decompose_cp(cp, d);

  // 2. Canonical ordering: stable sort of nonzero-ccc runs.
  for (std::size_t i = 1; i < d.size(); ++i) {
    const std::uint8_t ccc = combining_class(d[i]);
    if (ccc == 0) continue;
    std::size_t j = i;
    while (j > 0 && combining_class(d[j - 1]) > ccc) {
      std::swap(d[j - 1], d[j]);
      --j;
    }
  }

  // 3. Canonical composition.
  std::u32string out;
  out.reserve(d.size());
  std::ptrdiff_t starter = -1;
  for (char32_t cp : d) {
    const std::uint8_t ccc = combining_class(cp);
    if (starter >= 0) {
      const bool blocked =
          static_cast<std::size_t>(starter) + 1 != out.size() &&
          combining_class(out.back()) >= ccc;
      char32_t composite;
      if (!blocked &&
          detail::compose_pair(out[static_cast<std::size_t>(starter)], cp,
                               composite)) {
        out[static_cast<std::size_t>(starter)] = composite;
        continue;
      }
    }
    if (ccc == 0) starter = static_cast<std::ptrdiff_t>(out.size());
    out.push_back(cp);
  }
  return out;
}

inline std::string nfc(std::string_view utf8) { return encode(nfc(decode(utf8))); }

// ---- Word-level helpers ------------------------------------------------

inline std::string lowercase(std::string_view utf8) {
  std::u32string cps = decode(utf8);
  for (char32_t& cp : cps) cp = to_lower(cp);
  return encode(cps);
}

inline std::string trim(std::string_view s) {
  std::u32string cps = decode(s);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_whitespace(cps[b])) ++b;
  while (e > b && is_whitespace(cps[e - 1])) --e;
  return encode(std::u32string_view(cps).substr(b, e - b));
}

// Maximal whitespace-separated tokens.
inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::u32string cps = decode(s);
  std::u32string cur;
  for (char32_t cp : cps) {
    if (is_whitespace(cp)) {
      if (!cur.empty()) {
        words.push_back(encode(cur));
        cur.clear();
      }
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) words.push_back(encode(cur));
  return words;
}

inline std::size_t word_count(std::string_view s) {
  return split_words(s).size();
}

// Collapses whitespace runs to single spaces and trims the ends.
inline std::string collapse_whitespace(std::string_view s) {
  std::u32string cps = decode(s);
  std::u32string out;
  bool pending_space = false;
  for (char32_t cp : cps) {
    if (is_whitespace(cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(U' ');
      pending_space = false;
      out.push_back(cp);
    }
  }
  return encode(out);
}

// Strips leading/trailing punctuation code points; internal ones stay.
inline std::string strip_outer_punct(std::string_view word) {
  std::u32string cps = decode(word);
  std::size_t b = 0, e = cps.size();
  while (b < e && is_punct(cps[b])) ++b;
  while (e > b && is_punct(cps[e - 1])) --e;
  return encode(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace minimt::unicode
