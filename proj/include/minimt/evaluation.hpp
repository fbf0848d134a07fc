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
#include <cmath>
#include <cstdint>
#include <map>
#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "minimt/errors.hpp"
#include "minimt/unicode.hpp"

// Corpus BLEU (raw and exponentially smoothed) on 13a-tokenized text,
// word-count error metrics, length buckets, and the comparison report.

namespace minimt::evaluation {

// ---- 13a tokenization --------------------------------------------------------
//
// The language-independent mteval-13a scheme: isolate a fixed ASCII symbol
// class, split periods/commas unless flanked by digits, split a dash after
// a digit, collapse whitespace. Operating on bytes is safe: every rule
// touches ASCII only, and UTF-8 continuation bytes stay untouched.

namespace detail {

inline bool in_13a_symbol_class(unsigned char c) {
  return (c >= 0x7B && c <= 0x7E) ||  // { | } ~
         (c >= 0x5B && c <= 0x60) ||  // [ \ ] ^ _ `
         (c >= 0x20 && c <= 0x26) ||  // space ! " # $ % &
         (c >= 0x28 && c <= 0x2B) ||  // ( ) * +
         (c >= 0x3A && c <= 0x40) ||  // : ; < = > ? @
         c == '/';
}

inline std::string replace_all(std::string s, const std::string& from,
                               const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace detail

inline std::vector<std::string> tokenize_13a(const std::string& text) {
  std::string s = detail::replace_all(text, "<skipped>", "");
  s = detail::replace_all(s, "-\n", "");
  std::replace(s.begin(), s.end(), '\n', ' ');
  if (s.find('&') != std::string::npos) {
    s = detail::replace_all(s, "&quot;", "\"");
    s = detail::replace_all(s, "&amp;", "&");
    s = detail::replace_all(s, "&lt;", "<");
    s = detail::replace_all(s, "&gt;", ">");
  }

  // The reference scheme pads the line with spaces first, which lets the
  // period/comma rules fire at the line ends too.
  std::string spaced = " ";
  spaced.reserve(s.size() * 2);
  for (const char c : s) {
    if (detail::in_13a_symbol_class(static_cast<unsigned char>(c))) {
      spaced += ' ';
      spaced += c;
      spaced += ' ';
    } else {
      spaced += c;
    }
  }
  spaced += ' ';

  static const std::regex kDotCommaAfter("([^0-9])([\\.,])");
  static const std::regex kDotCommaBefore("([\\.,])([^0-9])");
  static const std::regex kDigitDash("([0-9])(-)");
  spaced = std::regex_replace(spaced, kDotCommaAfter, "$1 $2 ");
  spaced = std::regex_replace(spaced, kDotCommaBefore, " $1 $2");
  spaced = std::regex_replace(spaced, kDigitDash, "$1 $2 ");

  const auto is_ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  };
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < spaced.size()) {
    while (i < spaced.size() && is_ws(spaced[i])) ++i;
    std::size_t j = i;
    while (j < spaced.size() && !is_ws(spaced[j])) ++j;
    if (j > i) tokens.push_back(spaced.substr(i, j - i));
    i = j;
  }
  return tokens;
}

// ---- Corpus BLEU ------------------------------------------------------------

struct BleuScore {
  double bleu = 0.0;                     // percentage 0..100
  std::array<double, 4> precisions{};    // after smoothing substitutions
  double brevity_penalty = 1.0;
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  bool smoothed = false;
  std::string warning;
};

inline BleuScore corpus_bleu(const std::vector<std::string>& hypotheses,
                             const std::vector<std::string>& references,
                             bool smoothed) {
  if (hypotheses.size() != references.size() || hypotheses.empty())
    fail(ErrorKind::kInput,
         "corpus_bleu needs equally many hypotheses and references (>= 1), "
         "got " +
             std::to_string(hypotheses.size()) + " vs " +
             std::to_string(references.size()));

  std::array<std::size_t, 4> matched{}, total{};
  BleuScore score;
  score.smoothed = smoothed;

  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = tokenize_13a(hypotheses[i]);
    const auto ref = tokenize_13a(references[i]);
    score.hyp_len += hyp.size();
    score.ref_len += ref.size();
    for (std::size_t n = 1; n <= 4; ++n) {
      if (hyp.size() < n) continue;
      std::unordered_map<std::string, std::size_t> hyp_ngrams, ref_ngrams;
      const auto key = [](const std::vector<std::string>& toks,
                          std::size_t at, std::size_t n) {
        std::string k;
        for (std::size_t x = 0; x < n; ++x) {
          if (x) k += '\x1f';
          k += toks[at + x];
        }
        return k;
      };
      for (std::size_t p = 0; p + n <= hyp.size(); ++p)
        ++hyp_ngrams[key(hyp, p, n)];
      for (std::size_t p = 0; p + n <= ref.size(); ++p)
        ++ref_ngrams[key(ref, p, n)];
      for (const auto& [g, c] : hyp_ngrams) {
        total[n - 1] += c;
        auto it = ref_ngrams.find(g);
        if (it != ref_ngrams.end()) matched[n - 1] += std::min(c, it->second);
      }
    }
  }

  if (score.hyp_len == 0) {
    score.warning = "all hypotheses are empty; BLEU is 0";
    return score;
  }

  // Modified n-gram precisions; the smoothed variant substitutes successive
  // zero numerators with 1 / (2^k * denominator).
  double smooth_scale = 1.0;
  for (std::size_t n = 0; n < 4; ++n) {
    if (total[n] == 0) {
      score.precisions[n] = 0.0;  // nothing to smooth over
    } else if (matched[n] == 0 && smoothed) {
      smooth_scale *= 2.0;
      score.precisions[n] =
          1.0 / (smooth_scale * static_cast<double>(total[n]));
    } else {
      score.precisions[n] = static_cast<double>(matched[n]) /
                            static_cast<double>(total[n]);
    }
  }

  score.brevity_penalty =
      score.hyp_len > score.ref_len
          ? 1.0
          : std::exp(1.0 - static_cast<double>(score.ref_len) /
                               static_cast<double>(score.hyp_len));

  bool zero_precision = false;
  for (const double p : score.precisions) zero_precision |= p == 0.0;
  if (zero_precision) {
    score.bleu = 0.0;
    return score;
  }
  double log_sum = 0.0;
  for (const double p : score.precisions) log_sum += std::log(p);
  score.bleu = 100.0 * score.brevity_penalty * std::exp(log_sum / 4.0);
  return score;
}

// ---- Word-count error ---------------------------------------------------------

struct WordCountError {
  double mae = 0.0;
  double rmse = 0.0;
};

inline WordCountError wordcount_error(
    const std::vector<std::string>& hypotheses,
    const std::vector<std::string>& references) {
  if (hypotheses.size() != references.size() || hypotheses.empty())
    fail(ErrorKind::kInput, "wordcount_error needs aligned non-empty lists");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const double d = std::abs(
        static_cast<double>(unicode::word_count(hypotheses[i])) -
        static_cast<double>(unicode::word_count(references[i])));
    abs_sum += d;
    sq_sum += d * d;
  }
  const double n = static_cast<double>(hypotheses.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

// ---- Length buckets ------------------------------------------------------------

struct EvalConfig {
  std::size_t bucket_threshold = 15;
  // "source" buckets on the input side (available before translation);
  // "reference" is the alternative reading of the tables.
  std::string bucket_side = "source";

  void validate() const {
    if (bucket_threshold < 1)
      fail(ErrorKind::kConfig, "bucket_threshold must be >= 1");
    if (bucket_side != "source" && bucket_side != "reference")
      fail(ErrorKind::kConfig, "bucket_side must be source or reference");
  }
};

struct BucketSplit {
  std::vector<std::size_t> small;  // word count < threshold
  std::vector<std::size_t> large;  // word count >= threshold
};

inline BucketSplit bucket_split(const std::vector<std::string>& sources,
                                const std::vector<std::string>& references,
                                const EvalConfig& cfg) {
  cfg.validate();
  const auto& side = cfg.bucket_side == "source" ? sources : references;
  if (cfg.bucket_side == "source" && sources.size() != references.size())
    fail(ErrorKind::kInput, "sources and references must be aligned");
  BucketSplit split;
  for (std::size_t i = 0; i < side.size(); ++i) {
    // The boundary count (exactly threshold words) goes to the large set.
    if (unicode::word_count(side[i]) < cfg.bucket_threshold)
      split.small.push_back(i);
    else
      split.large.push_back(i);
  }
  return split;
}

// ---- Report ---------------------------------------------------------------------

struct BucketScores {
  double bleu = 0.0;
  double raw_bleu = 0.0;
  bool operator==(const BucketScores&) const = default;
};

struct SystemReport {
  std::map<std::string, BucketScores> buckets;  // keys: all, small, large
  double mae = 0.0;
  double rmse = 0.0;
  bool operator==(const SystemReport&) const = default;
};

struct EvalReport {
  std::size_t bucket_threshold = 15;
  std::string bucket_side = "source";
  std::map<std::string, std::size_t> counts;  // all / small / large
  std::map<std::string, SystemReport> systems;
  bool operator==(const EvalReport&) const = default;
};

namespace detail {

inline void reject_tokenized(const std::vector<std::string>& lines,
                             const std::string& what) {
  for (std::size_t i = 0; i < lines.size(); ++i)
    if (lines[i].find("##") != std::string::npos)
      fail(ErrorKind::kInput,
           what + " line " + std::to_string(i + 1) +
               " contains the subword continuation prefix '##'; evaluation "
               "takes detokenized text only");
}

inline std::vector<std::string> subset(const std::vector<std::string>& v,
                                       const std::vector<std::size_t>& idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (const std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace detail

// Scores every system over the whole corpus and both length buckets.
// Hypotheses and references must be detokenized; anything still carrying
// the "##" prefix is rejected.
inline EvalReport build_report(
    const std::map<std::string, std::vector<std::string>>& systems,
    const std::vector<std::string>& references,
    const std::vector<std::string>& sources, const EvalConfig& cfg) {
  cfg.validate();
  if (references.empty()) fail(ErrorKind::kInput, "no references");
  detail::reject_tokenized(references, "reference");
  for (const auto& [label, hyps] : systems) {
    if (hyps.size() != references.size())
      fail(ErrorKind::kInput, "system '" + label + "' has " +
                                  std::to_string(hyps.size()) +
                                  " hypotheses for " +
                                  std::to_string(references.size()) +
                                  " references");
    detail::reject_tokenized(hyps, "system '" + label + "'");
  }

  const BucketSplit split = bucket_split(sources, references, cfg);
  EvalReport report;
  report.bucket_threshold = cfg.bucket_threshold;
  report.bucket_side = cfg.bucket_side;
  report.counts["all"] = references.size();
  report.counts["small"] = split.small.size();
  report.counts["large"] = split.large.size();

  for (const auto& [label, hyps] : systems) {
    SystemReport sys;
    const auto score_bucket = [&](const std::vector<std::string>& h,
                                  const std::vector<std::string>& r) {
      BucketScores b;
      if (!h.empty()) {
        b.bleu = corpus_bleu(h, r, /*smoothed=*/true).bleu;
        b.raw_bleu = corpus_bleu(h, r, /*smoothed=*/false).bleu;
      }
      return b;
    };
    sys.buckets["all"] = score_bucket(hyps, references);
    sys.buckets["small"] = score_bucket(detail::subset(hyps, split.small),
                                        detail::subset(references, split.small));
    sys.buckets["large"] = score_bucket(detail::subset(hyps, split.large),
                                        detail::subset(references, split.large));
    const auto wce = wordcount_error(hyps, references);
    sys.mae = wce.mae;
    sys.rmse = wce.rmse;
    report.systems[label] = std::move(sys);
  }
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json systems = nlohmann::json::object();
  for (const auto& [label, sys] : r.systems) {
    nlohmann::json buckets = nlohmann::json::object();
    for (const auto& [bucket, s] : sys.buckets)
      buckets[bucket] = {{"bleu", s.bleu}, {"raw_bleu", s.raw_bleu}};
    systems[label] = {{"buckets", buckets}, {"mae", sys.mae},
                      {"rmse", sys.rmse}};
  }
  return {{"bucket_threshold", r.bucket_threshold},
          {"bucket_side", r.bucket_side},
          {"counts", r.counts},
          {"systems", systems}};
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  j.at("bucket_threshold").get_to(r.bucket_threshold);
  j.at("bucket_side").get_to(r.bucket_side);
  r.counts = j.at("counts").get<std::map<std::string, std::size_t>>();
  for (const auto& [label, sysj] : j.at("systems").items()) {
    SystemReport sys;
    for (const auto& [bucket, bj] : sysj.at("buckets").items())
      sys.buckets[bucket] = {bj.at("bleu").get<double>(),
                             bj.at("raw_bleu").get<double>()};
    sys.mae = sysj.at("mae").get<double>();
    sys.rmse = sysj.at("rmse").get<double>();
    r.systems[label] = std::move(sys);
  }
  return r;
}

// Text tables mirroring the usual bleu / raw-bleu and MAE / RMSE layout.
inline std::string render_text(const EvalReport& r) {
  std::string out;
  char buf[160];
  std::size_t label_w = 6;
  for (const auto& [label, sys] : r.systems)
    label_w = std::max(label_w, label.size());

  const auto section = [&](const std::string& bucket,
                           const std::string& title) {
    std::snprintf(buf, sizeof(buf), "%s (%zu pairs)\n", title.c_str(),
                  r.counts.at(bucket));
    out += buf;
    std::snprintf(buf, sizeof(buf), "%-*s  %8s  %8s\n",
                  static_cast<int>(label_w), "Models", "bleu", "raw-bleu");
    out += buf;
    for (const auto& [label, sys] : r.systems) {
      const auto& b = sys.buckets.at(bucket);
      std::snprintf(buf, sizeof(buf), "%-*s  %8.2f  %8.2f\n",
                    static_cast<int>(label_w), label.c_str(), b.bleu,
                    b.raw_bleu);
      out += buf;
    }
    out += '\n';
  };
  std::snprintf(buf, sizeof(buf),
                "BLEU by %s word count, boundary %zu\n\n",
                r.bucket_side.c_str(), r.bucket_threshold);
  out += buf;
  section("small", "Word count < " + std::to_string(r.bucket_threshold));
  section("large", "Word count >= " + std::to_string(r.bucket_threshold));
  section("all", "All sentences");

  out += "Word-count error\n";
  std::snprintf(buf, sizeof(buf), "%-*s  %8s  %8s\n",
                static_cast<int>(label_w), "Models", "MAE", "RMSE");
  out += buf;
  for (const auto& [label, sys] : r.systems) {
    std::snprintf(buf, sizeof(buf), "%-*s  %8.3f  %8.3f\n",
                  static_cast<int>(label_w), label.c_str(), sys.mae,
                  sys.rmse);
    out += buf;
  }
  return out;
}

inline std::string render_report(const EvalReport& r,
                                 const std::string& format) {
  if (format == "json") return report_to_json(r).dump(2) + "\n";
  if (format == "text") return render_text(r);
  fail(ErrorKind::kConfig, "unknown report format '" + format +
                               "' (expected json or text)");
}

}  // namespace minimt::evaluation
