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
#include <cstring>
#include <fstream>
#include <string>

#include "json.hpp"
#include "minimt/errors.hpp"
#include "minimt/tensor.hpp"
#include "minimt/training.hpp"
#include "minimt/transformer.hpp"

// Checkpoint container: magic "NMTF", version, length-prefixed JSON header
// (configs, train state, arbitrary extras such as vocabularies), then one
// record per tensor with little-endian float32 data. Bit-exact round trips.

namespace minimt::checkpoint {

inline constexpr char kMagic[4] = {'N', 'M', 'T', 'F'};
inline constexpr std::uint32_t kVersion = 1;

// ---- config (de)serialization ----------------------------------------------

inline nlohmann::json model_to_json(const transformer::ModelConfig& c) {
  return {{"preset", c.preset},
          {"d_model", c.d_model},
          {"n_heads", c.n_heads},
          {"n_encoder_layers", c.n_encoder_layers},
          {"n_decoder_layers", c.n_decoder_layers},
          {"ffn_dim", c.ffn_dim},
          {"dropout", c.dropout},
          {"share_decoder_io", c.share_decoder_io},
          {"pre_layernorm", c.pre_layernorm},
          {"max_source_positions", c.max_source_positions},
          {"max_target_positions", c.max_target_positions},
          {"src_vocab_size", c.src_vocab_size},
          {"tgt_vocab_size", c.tgt_vocab_size}};
}

inline transformer::ModelConfig model_from_json(const nlohmann::json& j) {
  transformer::ModelConfig c;
  j.at("preset").get_to(c.preset);
  j.at("d_model").get_to(c.d_model);
  j.at("n_heads").get_to(c.n_heads);
  j.at("n_encoder_layers").get_to(c.n_encoder_layers);
  j.at("n_decoder_layers").get_to(c.n_decoder_layers);
  j.at("ffn_dim").get_to(c.ffn_dim);
  j.at("dropout").get_to(c.dropout);
  j.at("share_decoder_io").get_to(c.share_decoder_io);
  j.at("pre_layernorm").get_to(c.pre_layernorm);
  j.at("max_source_positions").get_to(c.max_source_positions);
  j.at("max_target_positions").get_to(c.max_target_positions);
  j.at("src_vocab_size").get_to(c.src_vocab_size);
  j.at("tgt_vocab_size").get_to(c.tgt_vocab_size);
  return c;
}

inline nlohmann::json train_to_json(const training::TrainConfig& c) {
  return {{"peak_lr", c.peak_lr},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"clip_norm", c.clip_norm},
          {"warmup_updates", c.warmup_updates},
          {"label_smoothing", c.label_smoothing},
          {"weight_decay", c.weight_decay},
          {"decoupled_decay", c.decoupled_decay},
          {"max_tokens", c.max_tokens},
          {"update_freq", c.update_freq},
          {"stop_ppl", c.stop_ppl},
          {"max_epochs", c.max_epochs},
          {"seed", c.seed}};
}

inline training::TrainConfig train_from_json(const nlohmann::json& j) {
  training::TrainConfig c;
  j.at("peak_lr").get_to(c.peak_lr);
  j.at("adam_beta1").get_to(c.adam_beta1);
  j.at("adam_beta2").get_to(c.adam_beta2);
  j.at("adam_eps").get_to(c.adam_eps);
  j.at("clip_norm").get_to(c.clip_norm);
  j.at("warmup_updates").get_to(c.warmup_updates);
  j.at("label_smoothing").get_to(c.label_smoothing);
  j.at("weight_decay").get_to(c.weight_decay);
  j.at("decoupled_decay").get_to(c.decoupled_decay);
  j.at("max_tokens").get_to(c.max_tokens);
  j.at("update_freq").get_to(c.update_freq);
  j.at("stop_ppl").get_to(c.stop_ppl);
  j.at("max_epochs").get_to(c.max_epochs);
  j.at("seed").get_to(c.seed);
  return c;
}

inline nlohmann::json state_to_json(const training::TrainState& s) {
  return {{"epoch", s.epoch},
          {"updates", s.updates},
          {"train_loss", s.train_loss},
          {"valid_loss", s.valid_loss},
          {"valid_ppl", s.valid_ppl}};
}

inline training::TrainState state_from_json(const nlohmann::json& j) {
  training::TrainState s;
  j.at("epoch").get_to(s.epoch);
  j.at("updates").get_to(s.updates);
  j.at("train_loss").get_to(s.train_loss);
  j.at("valid_loss").get_to(s.valid_loss);
  j.at("valid_ppl").get_to(s.valid_ppl);
  return s;
}

// ---- binary primitives -------------------------------------------------------

namespace detail {

inline void put_u32(std::ostream& out, std::uint32_t x) {
  char b[4] = {static_cast<char>(x), static_cast<char>(x >> 8),
               static_cast<char>(x >> 16), static_cast<char>(x >> 24)};
  out.write(b, 4);
}

inline void put_u64(std::ostream& out, std::uint64_t x) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(x >> (8 * i));
  out.write(b, 8);
}

inline void put_f32(std::ostream& out, float f) {
  static_assert(sizeof(float) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

[[noreturn]] inline void truncated(const std::string& path) {
  fail(ErrorKind::kFormat, path + ": truncated checkpoint file");
}

inline std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) truncated(path);
  return static_cast<std::uint32_t>(b[0]) |
         (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

inline std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) truncated(path);
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return x;
}

inline float get_f32(std::istream& in, const std::string& path) {
  const std::uint32_t bits = get_u32(in, path);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace detail

struct Checkpoint {
  ParamMap<float> params;
  transformer::ModelConfig model;
  training::TrainConfig train;
  training::TrainState state;
  nlohmann::json extra;  // vocabulary token lists and friends
};

inline void save_checkpoint(const std::string& path,
                            const ParamMap<float>& params,
                            const transformer::ModelConfig& model,
                            const training::TrainConfig& train,
                            const training::TrainState& state,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write " + path);
  out.write(kMagic, 4);
  detail::put_u32(out, kVersion);

  nlohmann::json header = {{"model", model_to_json(model)},
                           {"train", train_to_json(train)},
                           {"state", state_to_json(state)},
                           {"extra", extra}};
  const std::string header_str = header.dump();
  detail::put_u64(out, header_str.size());
  out.write(header_str.data(),
            static_cast<std::streamsize>(header_str.size()));

  detail::put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto& [name, t] : params) {
    detail::put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (const std::size_t d : t.shape) detail::put_u64(out, d);
    for (const float f : t.v) detail::put_f32(out, f);
  }
  out.flush();
  if (!out) fail(ErrorKind::kIo, "write failed: " + path);
}

// Loads a checkpoint and validates the stored tensors against the stored
// config; when expected is given, its shapes are enforced instead.
inline Checkpoint load_checkpoint(
    const std::string& path,
    const transformer::ModelConfig* expected = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open " + path);

  char magic[4];
  if (!in.read(magic, 4)) detail::truncated(path);
  if (std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorKind::kFormat, path + ": not a checkpoint file (bad magic)");
  const std::uint32_t version = detail::get_u32(in, path);
  if (version != kVersion)
    fail(ErrorKind::kFormat, path + ": unsupported checkpoint version " +
                                 std::to_string(version));

  const std::uint64_t header_len = detail::get_u64(in, path);
  std::string header_str(header_len, '\0');
  if (!in.read(header_str.data(), static_cast<std::streamsize>(header_len)))
    detail::truncated(path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_str);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path + ": bad checkpoint header: " + e.what());
  }

  Checkpoint ck;
  try {
    ck.model = model_from_json(header.at("model"));
    ck.train = train_from_json(header.at("train"));
    ck.state = state_from_json(header.at("state"));
    ck.extra = header.value("extra", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kFormat, path + ": bad checkpoint header: " + e.what());
  }

  const std::uint32_t count = detail::get_u32(in, path);
  for (std::uint32_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = detail::get_u32(in, path);
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) detail::truncated(path);
    const std::uint32_t rank = detail::get_u32(in, path);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape)
      d = static_cast<std::size_t>(detail::get_u64(in, path));
    Tensor<float> t(shape);
    for (auto& f : t.v) f = detail::get_f32(in, path);
    ck.params.emplace(std::move(name), std::move(t));
  }

  const auto shapes = transformer::expected_shapes(expected ? *expected : ck.model);
  for (const auto& [name, shape] : shapes) {
    auto it = ck.params.find(name);
    if (it == ck.params.end())
      fail(ErrorKind::kShape, path + ": missing tensor " + name);
    if (it->second.shape != shape) {
      std::string want, got;
      for (auto d : shape) want += std::to_string(d) + " ";
      for (auto d : it->second.shape) got += std::to_string(d) + " ";
      fail(ErrorKind::kShape, path + ": tensor " + name +
                                  " has shape [ " + got + "], config wants [ " +
                                  want + "]");
    }
  }
  if (ck.params.size() != shapes.size())
    fail(ErrorKind::kShape, path + ": checkpoint holds " +
                                std::to_string(ck.params.size()) +
                                " tensors, config wants " +
                                std::to_string(shapes.size()));
  return ck;
}

}  // namespace minimt::checkpoint
