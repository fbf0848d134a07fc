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

#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "minimt/errors.hpp"

// Dense row-major tensors templated on the scalar type. float is the
// production precision; double instantiations back the strict gradient
// checks.

namespace minimt {

template <typename R>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<R> v;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), v(numel_of(shape), R(0)) {}

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           std::multiplies<>());
  }

  std::size_t numel() const { return v.size(); }
  R* data() { return v.data(); }
  const R* data() const { return v.data(); }

  std::size_t dim(std::size_t i) const { return shape.at(i); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void fill(R value) { std::fill(v.begin(), v.end(), value); }

  template <typename R2>
  Tensor<R2> cast() const {
    Tensor<R2> out(shape);
    for (std::size_t i = 0; i < v.size(); ++i)
      out.v[i] = static_cast<R2>(v[i]);
    return out;
  }
};

// Named parameter collection; std::map keeps iteration deterministic.
template <typename R>
using ParamMap = std::map<std::string, Tensor<R>>;

template <typename R>
ParamMap<R> zeros_like(const ParamMap<R>& params) {
  ParamMap<R> out;
  for (const auto& [name, t] : params) out.emplace(name, Tensor<R>(t.shape));
  return out;
}

template <typename R>
std::size_t total_numel(const ParamMap<R>& params) {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.numel();
  return n;
}

// Integer id matrix (batch rows of token ids).
struct IntMat {
  std::size_t rows = 0, cols = 0;
  std::vector<std::int32_t> v;

  IntMat() = default;
  IntMat(std::size_t r, std::size_t c, std::int32_t fill_value = 0)
      : rows(r), cols(c), v(r * c, fill_value) {}

  std::int32_t& at(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  std::int32_t at(std::size_t r, std::size_t c) const {
    return v[r * cols + c];
  }
};

namespace nn {

// y[r,o] = sum_i x[r,i] * w[o,i] + b[o]; w is [out, in].
template <typename R>
void linear_forward(const R* x, const R* w, const R* b, R* y,
                    std::size_t rows, std::size_t in, std::size_t out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const R* xr = x + r * in;
    R* yr = y + r * out;
    for (std::size_t o = 0; o < out; ++o) {
      const R* wo = w + o * in;
      R acc = b ? b[o] : R(0);
      for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
      yr[o] = acc;
    }
  }
}

// Accumulates dw/db and writes dx (overwrites dx).
template <typename R>
void linear_backward(const R* x, const R* w, const R* dy, R* dx, R* dw,
                     R* db, std::size_t rows, std::size_t in,
                     std::size_t out) {
  if (dx)
    for (std::size_t r = 0; r < rows; ++r) {
      const R* dyr = dy + r * out;
      R* dxr = dx + r * in;
      for (std::size_t i = 0; i < in; ++i) dxr[i] = R(0);
      for (std::size_t o = 0; o < out; ++o) {
        const R g = dyr[o];
        if (g == R(0)) continue;
        const R* wo = w + o * in;
        for (std::size_t i = 0; i < in; ++i) dxr[i] += g * wo[i];
      }
    }
  for (std::size_t r = 0; r < rows; ++r) {
    const R* dyr = dy + r * out;
    const R* xr = x + r * in;
    for (std::size_t o = 0; o < out; ++o) {
      const R g = dyr[o];
      if (g == R(0)) continue;
      R* dwo = dw + o * in;
      for (std::size_t i = 0; i < in; ++i) dwo[i] += g * xr[i];
      if (db) db[o] += g;
    }
  }
}

// In-place numerically stable softmax over one row of length n.
template <typename R>
void softmax_row(R* row, std::size_t n) {
  R mx = row[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  R sum = R(0);
  for (std::size_t i = 0; i < n; ++i) {
    row[i] = std::exp(row[i] - mx);
    sum += row[i];
  }
  const R inv = R(1) / sum;
  for (std::size_t i = 0; i < n; ++i) row[i] *= inv;
}

template <typename R>
void log_softmax_row(const R* row, R* out, std::size_t n) {
  R mx = row[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, row[i]);
  R sum = R(0);
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(row[i] - mx);
  const R lse = mx + std::log(sum);
  for (std::size_t i = 0; i < n; ++i) out[i] = row[i] - lse;
}

}  // namespace nn
}  // namespace minimt
