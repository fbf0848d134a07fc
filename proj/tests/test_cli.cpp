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

// Drives the installed binary through every subcommand, checking exit
// codes, file outputs and error messages.

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "json.hpp"
#include "test_util.hpp"

#ifndef MINIMT_CLI_PATH
#error "MINIMT_CLI_PATH must point at the CLI binary"
#endif

using minimt::testutil::TempDir;
using minimt::testutil::read_file;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

RunResult run_cli(const TempDir& tmp, const std::string& args) {
  const std::string out_path = tmp.path("stdout.txt");
  const std::string err_path = tmp.path("stderr.txt");
  const std::string cmd = std::string(MINIMT_CLI_PATH) + " " + args + " > " +
                          out_path + " 2> " + err_path;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_file(out_path);
  r.err = read_file(err_path);
  return r;
}

// Small parallel corpus plus a dictionary covering most of it.
void write_corpus(TempDir& tmp) {
  tmp.write("c.mr", "एक दोन\nतीन चार पाच\nएक पाच\nक ख ग घ\n");
  tmp.write("c.en", "one two\nthree four five\none five\njunk words only here\n");
  tmp.write("d.tsv",
            "एक\tone\nदोन\ttwo\nतीन\tthree\nचार\tfour\nपाच\tfive\n");
}

}  // namespace

TEST(CliFilter, DefaultThresholdAndReport) {
  TempDir tmp("cli");
  write_corpus(tmp);
  const auto r = run_cli(tmp, "filter --src " + tmp.path("c.mr") + " --tgt " +
                                  tmp.path("c.en") + " --dict " +
                                  tmp.path("d.tsv") + " --out-prefix " +
                                  tmp.path("f"));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  // Default threshold 0.3; the junk pair has ratio 0 and is rejected.
  const auto report = nlohmann::json::parse(read_file(tmp.path("f.report.json")));
  EXPECT_EQ(report.at("kept_count").get<int>(), 3);
  EXPECT_EQ(report.at("rejected_count").get<int>(), 1);
  EXPECT_EQ(read_file(tmp.path("f.rejected.tgt")), "junk words only here\n");
}

TEST(CliFilter, MissingDictionaryNamesPath) {
  TempDir tmp("cli");
  write_corpus(tmp);
  const auto r = run_cli(tmp, "filter --src " + tmp.path("c.mr") + " --tgt " +
                                  tmp.path("c.en") + " --dict " +
                                  tmp.path("absent.tsv") + " --out-prefix " +
                                  tmp.path("f"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("absent.tsv"), std::string::npos);
}

TEST(CliFilter, EmptyCorpusSucceedsWithZeroCounts) {
  TempDir tmp("cli");
  tmp.write("e.mr", "");
  tmp.write("e.en", "");
  tmp.write("d.tsv", "एक\tone\n");
  const auto r = run_cli(tmp, "filter --src " + tmp.path("e.mr") + " --tgt " +
                                  tmp.path("e.en") + " --dict " +
                                  tmp.path("d.tsv") + " --out-prefix " +
                                  tmp.path("f"));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(read_file(tmp.path("f.report.json")));
  EXPECT_EQ(report.at("kept_count").get<int>(), 0);
  EXPECT_EQ(report.at("rejected_count").get<int>(), 0);
  EXPECT_EQ(read_file(tmp.path("f.kept.src")), "");
}

TEST(CliBuildVocab, RerunsAreByteIdentical) {
  TempDir tmp("cli");
  tmp.write("text.txt", "the cat sat\nthe dog sat\nthe bird flew\n");
  const std::string args = "build-vocab --input " + tmp.path("text.txt") +
                           " --vocab-size 64 --min-frequency 1 --lowercase";
  ASSERT_EQ(run_cli(tmp, args + " --out " + tmp.path("v1.txt")).exit_code, 0);
  ASSERT_EQ(run_cli(tmp, args + " --out " + tmp.path("v2.txt")).exit_code, 0);
  const std::string v1 = read_file(tmp.path("v1.txt"));
  EXPECT_EQ(v1, read_file(tmp.path("v2.txt")));
  EXPECT_EQ(v1.rfind("[PAD]\n[UNK]\n[BOS]\n[EOS]\n", 0), 0u);
}

TEST(CliBuildVocab, TooSmallVocabSizeFails) {
  TempDir tmp("cli");
  tmp.write("text.txt", "abc def\n");
  const auto r = run_cli(tmp, "build-vocab --input " + tmp.path("text.txt") +
                                  " --vocab-size 3 --out " + tmp.path("v"));
  EXPECT_EQ(r.exit_code, 1);
}

TEST(CliTrain, UnknownArchListsPresets) {
  TempDir tmp("cli");
  tmp.write("t.train.src", "एक\n");
  tmp.write("t.train.tgt", "one\n");
  const auto r = run_cli(tmp, "train --data-prefix " + tmp.path("t") +
                                  " --src-vocab x --tgt-vocab y --arch bogus "
                                  "--checkpoint-dir " +
                                  tmp.path("ck"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("iwslt-de-en"), std::string::npos);
  EXPECT_NE(r.err.find("toy"), std::string::npos);
}

TEST(CliHelp, EverySubcommandListsDefaults) {
  TempDir tmp("cli");
  for (const std::string sub :
       {"filter", "build-vocab", "train", "translate", "evaluate"}) {
    const auto r = run_cli(tmp, sub + " --help");
    EXPECT_EQ(r.exit_code, 0) << sub;
  }
  const auto train_help = run_cli(tmp, "train --help");
  EXPECT_NE(train_help.out.find("0.0005"), std::string::npos);  // lr
  EXPECT_NE(train_help.out.find("10000"), std::string::npos);   // warmup
  EXPECT_NE(train_help.out.find("0.1"), std::string::npos);     // smoothing
  EXPECT_NE(train_help.out.find("4096"), std::string::npos);    // max-tokens
  const auto translate_help = run_cli(tmp, "translate --help");
  EXPECT_NE(translate_help.out.find("--beam"), std::string::npos);
  const auto eval_help = run_cli(tmp, "evaluate --help");
  EXPECT_NE(eval_help.out.find("15"), std::string::npos);  // bucket threshold
}

namespace {

// One tiny trained model shared by the translate tests.
struct TrainedFixture {
  TempDir tmp{"cli_train"};
  std::string checkpoint;

  TrainedFixture() {
    tmp.write("t.train.src", "एक दोन\nतीन चार\nपाच एक\nदोन तीन\nचार पाच\n");
    tmp.write("t.train.tgt", "one two\nthree four\nfive one\ntwo three\nfour five\n");
    tmp.write("t.valid.src", "एक दोन\nतीन चार\n");
    tmp.write("t.valid.tgt", "one two\nthree four\n");
    TempDir scratch("cli_train_run");
    auto r = run_cli(scratch, "build-vocab --input " + tmp.path("t.train.src") +
                                  " --vocab-size 64 --min-frequency 1 --out " +
                                  tmp.path("v.mr"));
    if (r.exit_code != 0) throw std::runtime_error("vocab failed: " + r.err);
    r = run_cli(scratch, "build-vocab --input " + tmp.path("t.train.tgt") +
                             " --vocab-size 64 --min-frequency 1 --lowercase "
                             "--out " +
                             tmp.path("v.en"));
    if (r.exit_code != 0) throw std::runtime_error("vocab failed: " + r.err);
    r = run_cli(scratch,
                "train --data-prefix " + tmp.path("t") + " --src-vocab " +
                    tmp.path("v.mr") + " --tgt-vocab " + tmp.path("v.en") +
                    " --arch toy --d-model 32 --ffn-dim 48 --n-heads 2 "
                    "--n-layers 1 --max-epochs 2 --stop-ppl 0.0 --seed 0 "
                    "--max-tokens 64 --warmup-updates 10 --checkpoint-dir " +
                    tmp.path("ck"));
    if (r.exit_code != 0) throw std::runtime_error("train failed: " + r.err);
    checkpoint = tmp.path("ck/checkpoint2.pt");
  }
};

TrainedFixture& trained() {
  static TrainedFixture fx;
  return fx;
}

}  // namespace

TEST(CliTrain, WritesCheckpointsAndSummary) {
  auto& fx = trained();
  EXPECT_TRUE(std::filesystem::exists(fx.tmp.path("ck/checkpoint1.pt")));
  EXPECT_TRUE(std::filesystem::exists(fx.tmp.path("ck/checkpoint2.pt")));
  const auto summary = nlohmann::json::parse(
      read_file(fx.tmp.path("ck/training_summary.json")));
  EXPECT_EQ(summary.at("final").at("epoch").get<int>(), 2);
  EXPECT_EQ(summary.at("epochs").size(), 2u);
}

TEST(CliTranslate, LineCountsMatch) {
  auto& fx = trained();
  TempDir tmp("cli");
  tmp.write("in.mr", "एक दोन\nतीन\nपाच चार\n");
  const auto r = run_cli(tmp, "translate --checkpoint " + fx.checkpoint +
                                  " --input " + tmp.path("in.mr") +
                                  " --output " + tmp.path("out.en"));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const std::string out = read_file(tmp.path("out.en"));
  EXPECT_EQ(std::count(out.begin(), out.end(), '\n'), 3);
  EXPECT_TRUE(std::filesystem::exists(tmp.path("out.en.skips.json")));
}

TEST(CliTranslate, CorruptCheckpointFails) {
  auto& fx = trained();
  TempDir tmp("cli");
  const std::string bytes = read_file(fx.checkpoint);
  tmp.write("broken.pt", bytes.substr(0, bytes.size() / 2));
  tmp.write("in.mr", "एक\n");
  const auto r = run_cli(tmp, "translate --checkpoint " + tmp.path("broken.pt") +
                                  " --input " + tmp.path("in.mr") +
                                  " --output " + tmp.path("o"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("truncated"), std::string::npos);
}

TEST(CliEvaluate, SelfEvaluationScoresHundred) {
  TempDir tmp("cli");
  tmp.write("refs.txt", "the cat sat on the mat\nbirds fly south in winter\n");
  tmp.write("src.txt", "एक दोन तीन\nचार पाच\n");
  const auto r = run_cli(tmp, "evaluate --refs " + tmp.path("refs.txt") +
                                  " --sys self=" + tmp.path("refs.txt") +
                                  " --sources " + tmp.path("src.txt") +
                                  " --format json");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(report.at("systems").at("self").at("buckets").at("all")
                       .at("bleu").get<double>(),
                   100.0);
  EXPECT_DOUBLE_EQ(report.at("systems").at("self").at("mae").get<double>(),
                   0.0);
}

TEST(CliEvaluate, MisalignedSystemNamesLabel) {
  TempDir tmp("cli");
  tmp.write("refs.txt", "a b\nc d\n");
  tmp.write("short.txt", "a b\n");
  tmp.write("src.txt", "x\ny\n");
  const auto r = run_cli(tmp, "evaluate --refs " + tmp.path("refs.txt") +
                                  " --sys broken=" + tmp.path("short.txt") +
                                  " --sources " + tmp.path("src.txt"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.err.find("broken"), std::string::npos);
}

TEST(CliEvaluate, ConfigFileLayering) {
  TempDir tmp("cli");
  tmp.write("refs.txt", "one two three\n");
  tmp.write("hyp.txt", "one two three\n");
  tmp.write("cfg.json", "{\"eval\": {\"bucket_side\": \"reference\"}}");
  // Config switches the bucket side, so --sources is not needed.
  const auto r = run_cli(tmp, "evaluate --refs " + tmp.path("refs.txt") +
                                  " --sys s=" + tmp.path("hyp.txt") +
                                  " --config " + tmp.path("cfg.json") +
                                  " --format json");
  EXPECT_EQ(r.exit_code, 0) << r.err;
  const auto report = nlohmann::json::parse(r.out);
  EXPECT_EQ(report.at("bucket_side").get<std::string>(), "reference");
}

TEST(CliExitCodes, NoSubcommandIsUserError) {
  TempDir tmp("cli");
  EXPECT_EQ(run_cli(tmp, "").exit_code, 1);
  EXPECT_EQ(run_cli(tmp, "bogus-subcommand").exit_code, 1);
}
