#!/usr/bin/env python3
"""Regenerates include/minimt/unicode_data.hpp from the Python unicodedata module.

Emits the tables needed by unicode.hpp: simple lowercase mappings, punctuation
ranges (general category P*), whitespace code points, non-zero canonical
combining classes, full canonical decompositions (NFD, Hangul excluded) and
primary composition pairs (composition exclusions filtered out).
"""

import sys
import unicodedata

MAX_CP = 0x110000
HANGUL_BASE, HANGUL_END = 0xAC00, 0xD7A4


def is_hangul_syllable(cp):
    return HANGUL_BASE <= cp < HANGUL_END


def gen_lowercase():
    out = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        low = chr(cp).lower()
        if len(low) == 1 and ord(low) != cp:
            out.append((cp, ord(low)))
    return out


def gen_ranges(pred):
    ranges = []
    start = None
    for cp in range(MAX_CP + 1):
        ok = cp < MAX_CP and pred(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            ranges.append((start, cp - 1))
            start = None
    return ranges


def is_punct(cp):
    if 0xD800 <= cp <= 0xDFFF:
        return False
    return unicodedata.category(chr(cp)).startswith("P")


def gen_whitespace():
    ws = {0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x85}
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        if unicodedata.category(chr(cp)) in ("Zs", "Zl", "Zp"):
            ws.add(cp)
    return sorted(ws)


def gen_ccc():
    out = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        c = unicodedata.combining(chr(cp))
        if c:
            out.append((cp, c))
    return out


def gen_decomp():
    entries = []
    pool = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or is_hangul_syllable(cp):
            continue
        nfd = unicodedata.normalize("NFD", chr(cp))
        if nfd != chr(cp):
            entries.append((cp, len(pool), len(nfd)))
            pool.extend(ord(c) for c in nfd)
    return entries, pool


def gen_comp():
    pairs = []
    for cp in range(MAX_CP):
        if 0xD800 <= cp <= 0xDFFF or is_hangul_syllable(cp):
            continue
        d = unicodedata.decomposition(chr(cp))
        if not d or d.startswith("<"):
            continue
        parts = d.split()
        if len(parts) != 2:
            continue
        a, b = int(parts[0], 16), int(parts[1], 16)
        if unicodedata.normalize("NFC", chr(a) + chr(b)) == chr(cp):
            pairs.append(((a << 32) | b, cp))
    pairs.sort()
    return pairs


def fmt_rows(items, per_row, fmt):
    lines = []
    for i in range(0, len(items), per_row):
        lines.append("    " + " ".join(fmt(x) for x in items[i:i + per_row]))
    return "\n".join(lines)


def main(path):
    lowercase = gen_lowercase()
    punct = gen_ranges(is_punct)
    ws = gen_whitespace()
    ccc = gen_ccc()
    decomp, pool = gen_decomp()
    comp = gen_comp()

    with open(path, "w", encoding="utf-8") as f:
        w = f.write
        w("/* minimt - a compact Marathi-English neural machine translation toolkit.\n")
        w(" * Copyright (C) 2026 minimt contributors. All rights reserved.\n")
        w(" *\n")
        w(" * Licensed under the Apache License, Version 2.0 (the \"License\");\n")
        w(" * you may not use this file except in compliance with the License.\n")
        w(" * You may obtain a copy of the License at\n")
        w(" *\n")
        w(" *   http://www.apache.org/licenses/LICENSE-2.0\n")
        w(" *\n")
        w(" * Unless required by applicable law or agreed to in writing, software\n")
        w(" * distributed under the License is distributed on an \"AS IS\" BASIS,\n")
        w(" * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.\n")
        w(" * See the License for the specific language governing permissions and\n")
        w(" * limitations under the License.\n")
        w(" */\n\n")
        w("// Generated by tools/gen_unicode_tables.py from Unicode %s data.\n"
          % unicodedata.unidata_version)
        w("// Do not edit by hand.\n\n")
        w("#pragma once\n\n#include <cstdint>\n#include <cstddef>\n\n")
        w("namespace minimt::unicode_data {\n\n")

        w("struct CpPair { char32_t cp; char32_t value; };\n")
        w("struct CpRange { char32_t lo; char32_t hi; };\n")
        w("struct CccEntry { char32_t cp; std::uint8_t ccc; };\n")
        w("struct DecompEntry { char32_t cp; std::uint32_t offset; std::uint32_t len; };\n")
        w("struct CompEntry { std::uint64_t key; char32_t composite; };\n\n")

        w("inline constexpr CpPair kLowercase[] = {\n")
        w(fmt_rows(lowercase, 6, lambda p: "{0x%X, 0x%X}," % p))
        w("\n};\n\n")

        w("inline constexpr CpRange kPunct[] = {\n")
        w(fmt_rows(punct, 6, lambda p: "{0x%X, 0x%X}," % p))
        w("\n};\n\n")

        w("inline constexpr char32_t kWhitespace[] = {\n")
        w(fmt_rows(ws, 10, lambda c: "0x%X," % c))
        w("\n};\n\n")

        w("inline constexpr CccEntry kCcc[] = {\n")
        w(fmt_rows(ccc, 6, lambda p: "{0x%X, %d}," % p))
        w("\n};\n\n")

        w("inline constexpr DecompEntry kDecomp[] = {\n")
        w(fmt_rows(decomp, 4, lambda e: "{0x%X, %d, %d}," % e))
        w("\n};\n\n")

        w("inline constexpr char32_t kDecompPool[] = {\n")
        w(fmt_rows(pool, 10, lambda c: "0x%X," % c))
        w("\n};\n\n")

        w("inline constexpr CompEntry kComp[] = {\n")
        w(fmt_rows(comp, 4, lambda p: "{0x%XULL, 0x%X}," % p))
        w("\n};\n\n")

        w("}  // namespace minimt::unicode_data\n")

    sys.stderr.write(
        "lowercase=%d punct_ranges=%d ws=%d ccc=%d decomp=%d pool=%d comp=%d\n"
        % (len(lowercase), len(punct), len(ws), len(ccc), len(decomp),
           len(pool), len(comp)))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/minimt/unicode_data.hpp")
