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

// Pipeline driver: filter -> build-vocab -> train -> translate -> evaluate,
// with file-based interchange between stages. Flag names follow the
// training/inference commands the presets are named after.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "minimt/beam.hpp"
#include "minimt/checkpoint.hpp"
#include "minimt/corpus.hpp"
#include "minimt/dictfilter.hpp"
#include "minimt/evaluation.hpp"
#include "minimt/trainloop.hpp"
#include "minimt/training.hpp"
#include "minimt/transformer.hpp"
#include "minimt/wordpiece.hpp"

namespace {

using nlohmann::json;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) minimt::fail(minimt::ErrorKind::kIo, "cannot write " + path);
  out << content;
  if (!out) minimt::fail(minimt::ErrorKind::kIo, "write failed: " + path);
}

void write_lines(const std::string& path,
                 const std::vector<std::string>& lines) {
  std::string content;
  for (const auto& l : lines) {
    content += l;
    content += '\n';
  }
  write_file(path, content);
}

// Layering: hard-coded defaults < --config JSON < explicit flags.
struct ConfigOverlay {
  json root = json::object();

  void load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) minimt::fail(minimt::ErrorKind::kIo, "cannot open " + path);
    try {
      in >> root;
    } catch (const json::exception& e) {
      minimt::fail(minimt::ErrorKind::kFormat,
                   path + ": invalid JSON: " + std::string(e.what()));
    }
  }

  template <typename T>
  void apply(const CLI::Option* flag, const char* section, const char* key,
             T& var) const {
    if (flag != nullptr && flag->count() > 0) return;  // flag wins
    if (!root.contains(section)) return;
    const json& sec = root.at(section);
    if (!sec.contains(key)) return;
    try {
      var = sec.at(key).get<T>();
    } catch (const json::exception& e) {
      minimt::fail(minimt::ErrorKind::kConfig,
                   std::string("config key ") + section + "." + key + ": " +
                       e.what());
    }
  }
};

std::pair<double, double> parse_adam_betas(const std::string& text) {
  std::string s;
  for (const char c : text)
    if (c != '(' && c != ')' && c != ' ' && c != '\'') s += c;
  const std::size_t comma = s.find(',');
  if (comma == std::string::npos)
    minimt::fail(minimt::ErrorKind::kConfig,
                 "--adam-betas expects two comma-separated values, got '" +
                     text + "'");
  try {
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
  } catch (const std::exception&) {
    minimt::fail(minimt::ErrorKind::kConfig,
                 "--adam-betas expects numbers, got '" + text + "'");
  }
}

// ---- filter -------------------------------------------------------------

struct FilterArgs {
  std::string src, tgt, tsv, dict, out_prefix, config;
  double threshold = 0.30;
  bool keep_punctuation = false;
  bool reverse = false;
};

void run_filter(const FilterArgs& a, const CLI::App& cmd) {
  ConfigOverlay overlay;
  if (!a.config.empty()) overlay.load(a.config);
  minimt::dictfilter::FilterConfig cfg;
  cfg.threshold = a.threshold;
  cfg.strip_punctuation = !a.keep_punctuation;
  cfg.reverse = a.reverse;
  overlay.apply(cmd.get_option("--threshold"), "filter", "threshold",
                cfg.threshold);
  overlay.apply(cmd.get_option("--reverse"), "filter", "reverse", cfg.reverse);
  overlay.apply(nullptr, "filter", "strip_punctuation", cfg.strip_punctuation);

  const bool use_tsv = !a.tsv.empty();
  if (use_tsv == (!a.src.empty() || !a.tgt.empty()))
    minimt::fail(minimt::ErrorKind::kConfig,
                 "give either --src/--tgt or --tsv, not both");
  if (!use_tsv && (a.src.empty() || a.tgt.empty()))
    minimt::fail(minimt::ErrorKind::kConfig,
                 "--src and --tgt are both required for pair files");

  const auto loaded = use_tsv ? minimt::corpus::load_tsv(a.tsv)
                              : minimt::corpus::load_moses(a.src, a.tgt);
  const auto dict = minimt::dictfilter::load_dictionary(a.dict);
  const auto result =
      minimt::dictfilter::filter_corpus(loaded.corpus, dict, cfg);

  if (use_tsv) {
    minimt::corpus::write_tsv(result.kept, a.out_prefix + ".kept.tsv");
    minimt::corpus::write_tsv(result.rejected, a.out_prefix + ".rejected.tsv");
  } else {
    minimt::corpus::write_moses(result.kept, a.out_prefix + ".kept.src",
                                a.out_prefix + ".kept.tgt");
    minimt::corpus::write_moses(result.rejected,
                                a.out_prefix + ".rejected.src",
                                a.out_prefix + ".rejected.tgt");
  }
  write_file(a.out_prefix + ".report.json",
             result.report.to_json().dump(2) + "\n");
  std::cerr << "filter: kept " << result.report.kept_count << ", rejected "
            << result.report.rejected_count << " (threshold " << cfg.threshold
            << "), dropped blank " << loaded.dropped_blank << "\n";
}

// ---- build-vocab ----------------------------------------------------------

struct BuildVocabArgs {
  std::vector<std::string> inputs;
  std::string out, config;
  std::size_t vocab_size = 4000;
  std::size_t min_frequency = 2;
  std::size_t max_word_chars = 100;
  bool lowercase = false;
};

void run_build_vocab(const BuildVocabArgs& a, const CLI::App& cmd) {
  ConfigOverlay overlay;
  if (!a.config.empty()) overlay.load(a.config);
  minimt::wordpiece::TokenizerConfig cfg;
  cfg.vocab_size = a.vocab_size;
  cfg.min_frequency = a.min_frequency;
  cfg.max_word_chars = a.max_word_chars;
  cfg.lowercase = a.lowercase;
  overlay.apply(cmd.get_option("--vocab-size"), "tokenizer", "vocab_size",
                cfg.vocab_size);
  overlay.apply(cmd.get_option("--min-frequency"), "tokenizer",
                "min_frequency", cfg.min_frequency);
  overlay.apply(cmd.get_option("--lowercase"), "tokenizer", "lowercase",
                cfg.lowercase);

  std::vector<std::string> lines;
  for (const auto& path : a.inputs) {
    auto file_lines = minimt::corpus::detail::read_lines(path);
    lines.insert(lines.end(), file_lines.begin(), file_lines.end());
  }
  const auto vocab = minimt::wordpiece::train_vocab(lines, cfg);
  vocab.save(a.out);
  std::cerr << "build-vocab: " << vocab.size() << " tokens from "
            << lines.size() << " lines -> " << a.out << "\n";
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  std::string data_prefix, src_vocab, tgt_vocab, checkpoint_dir, config;
  std::string arch = "vaswani-wmt-en-de-big";
  std::string adam_betas = "(0.9,0.98)";
  double lr = 5e-4;
  double clip_norm = 0.0;
  double dropout = 0.3;
  double weight_decay = 0.0001;
  double label_smoothing = 0.1;
  double stop_ppl = 3.0;
  std::size_t warmup_updates = 10000;
  std::size_t max_tokens = 4096;
  std::size_t update_freq = 2;
  std::size_t max_epochs = 16;
  std::size_t max_source_positions = 512;
  std::size_t max_target_positions = 512;
  std::uint64_t seed = 1;
  bool share_embed = true;
  bool src_lowercase = false;
  bool tgt_lowercase = true;
  // 0 keeps the preset value.
  std::size_t d_model = 0, ffn_dim = 0, n_heads = 0, n_layers = 0;
};

std::vector<minimt::training::TokenPair> tokenize_corpus(
    const std::string& src_path, const std::string& tgt_path,
    const minimt::wordpiece::Vocabulary& src_vocab,
    const minimt::wordpiece::TokenizerConfig& src_cfg,
    const minimt::wordpiece::Vocabulary& tgt_vocab,
    const minimt::wordpiece::TokenizerConfig& tgt_cfg) {
  const auto loaded = minimt::corpus::load_moses(src_path, tgt_path);
  std::vector<minimt::training::TokenPair> pairs;
  pairs.reserve(loaded.corpus.size());
  for (const auto& p : loaded.corpus.pairs) {
    minimt::training::TokenPair tp;
    tp.src = minimt::wordpiece::encode(p.source, src_vocab, src_cfg).ids;
    tp.tgt = minimt::wordpiece::encode(p.target, tgt_vocab, tgt_cfg).ids;
    pairs.push_back(std::move(tp));
  }
  return pairs;
}

void run_train(const TrainArgs& a, const CLI::App& cmd) {
  ConfigOverlay overlay;
  if (!a.config.empty()) overlay.load(a.config);

  auto mcfg = minimt::transformer::preset(a.arch);
  if (a.d_model > 0) mcfg.d_model = a.d_model;
  if (a.ffn_dim > 0) mcfg.ffn_dim = a.ffn_dim;
  if (a.n_heads > 0) mcfg.n_heads = a.n_heads;
  if (a.n_layers > 0) mcfg.n_encoder_layers = mcfg.n_decoder_layers = a.n_layers;
  mcfg.dropout = a.dropout;
  mcfg.share_decoder_io = a.share_embed;
  mcfg.max_source_positions = a.max_source_positions;
  mcfg.max_target_positions = a.max_target_positions;
  overlay.apply(cmd.get_option("--dropout"), "model", "dropout", mcfg.dropout);
  overlay.apply(nullptr, "model", "pre_layernorm", mcfg.pre_layernorm);

  minimt::training::TrainConfig tcfg;
  tcfg.peak_lr = a.lr;
  const auto betas = parse_adam_betas(a.adam_betas);
  tcfg.adam_beta1 = betas.first;
  tcfg.adam_beta2 = betas.second;
  tcfg.clip_norm = a.clip_norm;
  tcfg.warmup_updates = a.warmup_updates;
  tcfg.label_smoothing = a.label_smoothing;
  tcfg.weight_decay = a.weight_decay;
  tcfg.max_tokens = a.max_tokens;
  tcfg.update_freq = a.update_freq;
  tcfg.stop_ppl = a.stop_ppl;
  tcfg.max_epochs = a.max_epochs;
  tcfg.seed = a.seed;
  overlay.apply(cmd.get_option("--lr"), "train", "peak_lr", tcfg.peak_lr);
  overlay.apply(cmd.get_option("--warmup-updates"), "train", "warmup_updates",
                tcfg.warmup_updates);
  overlay.apply(cmd.get_option("--label-smoothing"), "train",
                "label_smoothing", tcfg.label_smoothing);
  overlay.apply(cmd.get_option("--max-tokens"), "train", "max_tokens",
                tcfg.max_tokens);
  overlay.apply(cmd.get_option("--update-freq"), "train", "update_freq",
                tcfg.update_freq);
  overlay.apply(cmd.get_option("--stop-ppl"), "train", "stop_ppl",
                tcfg.stop_ppl);
  overlay.apply(cmd.get_option("--max-epochs"), "train", "max_epochs",
                tcfg.max_epochs);
  overlay.apply(cmd.get_option("--seed"), "train", "seed", tcfg.seed);

  const auto src_vocab = minimt::wordpiece::Vocabulary::load(a.src_vocab);
  const auto tgt_vocab = minimt::wordpiece::Vocabulary::load(a.tgt_vocab);
  mcfg.src_vocab_size = src_vocab.size();
  mcfg.tgt_vocab_size = tgt_vocab.size();

  minimt::wordpiece::TokenizerConfig src_tok, tgt_tok;
  src_tok.lowercase = a.src_lowercase;
  tgt_tok.lowercase = a.tgt_lowercase;

  const auto train_pairs =
      tokenize_corpus(a.data_prefix + ".train.src", a.data_prefix + ".train.tgt",
                      src_vocab, src_tok, tgt_vocab, tgt_tok);
  const auto valid_pairs =
      tokenize_corpus(a.data_prefix + ".valid.src", a.data_prefix + ".valid.tgt",
                      src_vocab, src_tok, tgt_vocab, tgt_tok);

  std::filesystem::create_directories(a.checkpoint_dir);
  json extra = {{"src_vocab", src_vocab.tokens()},
                {"tgt_vocab", tgt_vocab.tokens()},
                {"src_lowercase", src_tok.lowercase},
                {"tgt_lowercase", tgt_tok.lowercase}};
  const auto result = minimt::training::train_loop<float>(
      train_pairs, valid_pairs, mcfg, tcfg, a.checkpoint_dir, extra,
      &std::cerr);
  write_file(a.checkpoint_dir + "/training_summary.json",
             result.run.summary_json().dump(2) + "\n");
  std::cerr << "train: done after " << result.run.state.epoch << " epochs, "
            << result.run.state.updates << " updates, valid ppl "
            << result.run.state.valid_ppl << "\n";
}

// ---- translate -------------------------------------------------------------

struct TranslateArgs {
  std::string checkpoint, input, output, config;
  std::size_t beam = 5;
  std::size_t batch_size = 32;
  std::size_t max_len = 0;
  double length_penalty = 1.0;
};

void run_translate(const TranslateArgs& a, const CLI::App& cmd) {
  ConfigOverlay overlay;
  if (!a.config.empty()) overlay.load(a.config);
  minimt::beam::BeamConfig cfg;
  cfg.beam_size = a.beam;
  cfg.batch_size = a.batch_size;
  cfg.max_len = a.max_len;
  cfg.length_penalty = a.length_penalty;
  overlay.apply(cmd.get_option("--beam"), "beam", "beam_size", cfg.beam_size);
  overlay.apply(cmd.get_option("--batch-size"), "beam", "batch_size",
                cfg.batch_size);
  overlay.apply(cmd.get_option("--length-penalty"), "beam", "length_penalty",
                cfg.length_penalty);

  const auto ck = minimt::checkpoint::load_checkpoint(a.checkpoint);
  if (!ck.extra.contains("src_vocab") || !ck.extra.contains("tgt_vocab"))
    minimt::fail(minimt::ErrorKind::kFormat,
                 a.checkpoint + " lacks embedded vocabularies");
  minimt::wordpiece::Vocabulary src_vocab, tgt_vocab;
  for (const auto& tok :
       ck.extra.at("src_vocab").get<std::vector<std::string>>())
    src_vocab.add(tok);
  for (const auto& tok :
       ck.extra.at("tgt_vocab").get<std::vector<std::string>>())
    tgt_vocab.add(tok);
  minimt::wordpiece::TokenizerConfig src_tok;
  src_tok.lowercase = ck.extra.value("src_lowercase", false);

  const auto sources = minimt::corpus::detail::read_lines(a.input);
  const auto result = minimt::beam::translate_corpus(
      ck.model, ck.params, sources, src_vocab, src_tok, tgt_vocab, cfg);
  write_lines(a.output, result.outputs);
  write_file(a.output + ".skips.json", result.skips_json().dump(2) + "\n");
  std::cerr << "translate: " << result.outputs.size() << " lines, "
            << result.skips.size() << " skipped -> " << a.output << "\n";
}

// ---- evaluate -------------------------------------------------------------

struct EvaluateArgs {
  std::string refs, sources, format = "text", out, config;
  std::vector<std::string> systems;
  std::size_t bucket_threshold = 15;
  std::string bucket_side = "source";
};

void run_evaluate(const EvaluateArgs& a, const CLI::App& cmd) {
  ConfigOverlay overlay;
  if (!a.config.empty()) overlay.load(a.config);
  minimt::evaluation::EvalConfig cfg;
  cfg.bucket_threshold = a.bucket_threshold;
  cfg.bucket_side = a.bucket_side;
  overlay.apply(cmd.get_option("--bucket-threshold"), "eval",
                "bucket_threshold", cfg.bucket_threshold);
  overlay.apply(cmd.get_option("--bucket-side"), "eval", "bucket_side",
                cfg.bucket_side);

  const auto refs = minimt::corpus::detail::read_lines(a.refs);
  std::map<std::string, std::vector<std::string>> systems;
  for (const auto& spec : a.systems) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      minimt::fail(minimt::ErrorKind::kConfig,
                   "--sys expects label=path, got '" + spec + "'");
    systems[spec.substr(0, eq)] =
        minimt::corpus::detail::read_lines(spec.substr(eq + 1));
  }
  std::vector<std::string> sources;
  if (!a.sources.empty())
    sources = minimt::corpus::detail::read_lines(a.sources);
  else if (cfg.bucket_side == "source")
    minimt::fail(minimt::ErrorKind::kConfig,
                 "--sources is required when bucketing on the source side");

  const auto report =
      minimt::evaluation::build_report(systems, refs, sources, cfg);
  const std::string doc = minimt::evaluation::render_report(report, a.format);
  if (a.out.empty())
    std::cout << doc;
  else
    write_file(a.out, doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"minimt: dictionary-filtered corpus curation, WordPiece "
               "tokenization, transformer training, beam-search translation "
               "and BLEU evaluation"};
  app.require_subcommand(1);

  FilterArgs fa;
  CLI::App* filter = app.add_subcommand(
      "filter", "Keep sentence pairs whose translated words match a "
                "bilingual dictionary at a minimum ratio");
  filter->add_option("--src", fa.src, "Source-side pair file (one sentence per line)");
  filter->add_option("--tgt", fa.tgt, "Target-side pair file");
  filter->add_option("--tsv", fa.tsv, "Tab-separated pair file (instead of --src/--tgt)");
  filter->add_option("--dict", fa.dict, "Bilingual dictionary TSV")->required();
  filter->add_option("--threshold", fa.threshold,
                     "Minimum matched fraction of target words")
      ->capture_default_str();
  filter->add_flag("--keep-punctuation", fa.keep_punctuation,
                   "Do not strip outer punctuation before matching");
  filter->add_flag("--reverse", fa.reverse,
                   "Match source words against inverted dictionary instead");
  filter->add_option("--out-prefix", fa.out_prefix, "Output path prefix")
      ->required();
  filter->add_option("--config", fa.config, "JSON config file");
  filter->callback([&] { run_filter(fa, *filter); });

  BuildVocabArgs ba;
  CLI::App* bv = app.add_subcommand("build-vocab",
                                    "Train a WordPiece vocabulary from text");
  bv->add_option("--input", ba.inputs, "Input text file (repeatable)")
      ->required();
  bv->add_option("--vocab-size", ba.vocab_size, "Target vocabulary size")
      ->capture_default_str();
  bv->add_option("--min-frequency", ba.min_frequency,
                 "Minimum pair frequency for merges")
      ->capture_default_str();
  bv->add_flag("--lowercase", ba.lowercase,
               "Lowercase text before training (English side)");
  bv->add_option("--out", ba.out, "Output vocabulary file")->required();
  bv->add_option("--config", ba.config, "JSON config file");
  bv->callback([&] { run_build_vocab(ba, *bv); });

  TrainArgs ta;
  CLI::App* train = app.add_subcommand("train",
                                       "Train a transformer translation model");
  train->add_option("--data-prefix", ta.data_prefix,
                    "Prefix for <p>.train.src/.train.tgt/.valid.src/.valid.tgt")
      ->required();
  train->add_option("--src-vocab", ta.src_vocab, "Source vocabulary file")
      ->required();
  train->add_option("--tgt-vocab", ta.tgt_vocab, "Target vocabulary file")
      ->required();
  train->add_option("--arch", ta.arch, "Architecture preset")
      ->capture_default_str();
  train->add_option("--lr", ta.lr, "Peak learning rate")->capture_default_str();
  train->add_option("--adam-betas", ta.adam_betas, "Adam betas")
      ->capture_default_str();
  train->add_option("--clip-norm", ta.clip_norm,
                    "Gradient norm clip (0 disables)")
      ->capture_default_str();
  train->add_option("--lr-scheduler", [](const std::vector<std::string>& v) {
    if (!v.empty() && v.front() != "inverse_sqrt")
      minimt::fail(minimt::ErrorKind::kConfig,
                   "only the inverse_sqrt scheduler is available");
    return true;
  }, "Learning-rate scheduler (inverse_sqrt)");
  train->add_option("--warmup-updates", ta.warmup_updates,
                    "Linear warmup length in updates")
      ->capture_default_str();
  train->add_option("--dropout", ta.dropout, "Dropout probability")
      ->capture_default_str();
  train->add_option("--weight-decay", ta.weight_decay, "Weight decay")
      ->capture_default_str();
  train->add_option("--label-smoothing", ta.label_smoothing,
                    "Label smoothing epsilon")
      ->capture_default_str();
  train->add_option("--max-tokens", ta.max_tokens,
                    "Padded token budget per batch")
      ->capture_default_str();
  train->add_option("--update-freq", ta.update_freq,
                    "Micro-batches accumulated per optimizer update")
      ->capture_default_str();
  train->add_option("--stop-ppl", ta.stop_ppl,
                    "Stop once validation perplexity drops below this")
      ->capture_default_str();
  train->add_option("--max-epochs", ta.max_epochs, "Epoch budget")
      ->capture_default_str();
  train->add_option("--max-source-positions", ta.max_source_positions,
                    "Longest admissible source sequence")
      ->capture_default_str();
  train->add_option("--max-target-positions", ta.max_target_positions,
                    "Longest admissible target sequence")
      ->capture_default_str();
  train->add_option("--seed", ta.seed, "Seed for all randomness")
      ->capture_default_str();
  train->add_flag("--share-decoder-input-output-embed,!--no-share-decoder-input-output-embed",
                  ta.share_embed,
                  "Tie decoder embedding and output projection")
      ->capture_default_str();
  train->add_flag("--src-lowercase", ta.src_lowercase,
                  "Lowercase source text when tokenizing");
  train->add_flag("--tgt-lowercase,!--no-tgt-lowercase", ta.tgt_lowercase,
                  "Lowercase target text when tokenizing")
      ->capture_default_str();
  train->add_option("--d-model", ta.d_model, "Override preset model width");
  train->add_option("--ffn-dim", ta.ffn_dim, "Override preset FFN width");
  train->add_option("--n-heads", ta.n_heads, "Override preset head count");
  train->add_option("--n-layers", ta.n_layers, "Override preset layer count");
  train->add_option("--checkpoint-dir", ta.checkpoint_dir,
                    "Directory for checkpointN.pt files")
      ->required();
  train->add_option("--config", ta.config, "JSON config file");
  train->callback([&] { run_train(ta, *train); });

  TranslateArgs tra;
  CLI::App* translate = app.add_subcommand(
      "translate", "Beam-search translate a file of source sentences");
  translate->add_option("--checkpoint", tra.checkpoint, "Model checkpoint")
      ->required();
  translate->add_option("--input", tra.input, "Source sentences, one per line")
      ->required();
  translate->add_option("--output", tra.output, "Translations file")
      ->required();
  translate->add_option("--beam", tra.beam, "Beam size")->capture_default_str();
  translate->add_option("--batch-size", tra.batch_size, "Decoding batch size")
      ->capture_default_str();
  translate->add_option("--max-len", tra.max_len,
                        "Generation cap (0: 2*src_len+10 heuristic)")
      ->capture_default_str();
  translate->add_option("--length-penalty", tra.length_penalty,
                        "Length normalization exponent")
      ->capture_default_str();
  translate->add_option("--config", tra.config, "JSON config file");
  translate->callback([&] { run_translate(tra, *translate); });

  EvaluateArgs ea;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Score hypothesis files with bucketed BLEU and "
                  "word-count error");
  evaluate->add_option("--refs", ea.refs, "Reference translations")
      ->required();
  evaluate->add_option("--sys", ea.systems,
                       "System as label=path (repeatable)")
      ->required();
  evaluate->add_option("--sources", ea.sources,
                       "Source sentences (for source-side buckets)");
  evaluate->add_option("--bucket-threshold", ea.bucket_threshold,
                       "Word-count boundary between buckets")
      ->capture_default_str();
  evaluate->add_option("--bucket-side", ea.bucket_side,
                       "Side whose word count buckets pairs")
      ->capture_default_str();
  evaluate->add_option("--format", ea.format, "Report format: text or json")
      ->capture_default_str();
  evaluate->add_option("--out", ea.out, "Write the report here (default stdout)");
  evaluate->add_option("--config", ea.config, "JSON config file");
  evaluate->callback([&] { run_evaluate(ea, *evaluate); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const minimt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
