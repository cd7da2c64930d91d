// Copyright 2026 The predrc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "common/error.hpp"

namespace predrc::num {

// Which keys each query row may attend to. Key lists are ascending.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::vector<std::vector<std::uint32_t>> allowed)
      : allowed_(std::move(allowed)) {
    for (std::size_t i = 0; i < allowed_.size(); ++i) {
      require(!allowed_[i].empty(), "attention row without keys");
      require(std::is_sorted(allowed_[i].begin(), allowed_[i].end()),
              "attention keys must be ascending");
      require(allowed_[i].back() < allowed_.size(), "attention key out of range");
    }
  }

  // Row i attends to rows 0..i.
  static AttentionMask causal(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> a(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) a[i].push_back(static_cast<std::uint32_t>(j));
    return AttentionMask(std::move(a));
  }

  static AttentionMask full(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> a(n);
    for (auto& r : a)
      for (std::size_t j = 0; j < n; ++j) r.push_back(static_cast<std::uint32_t>(j));
    return AttentionMask(std::move(a));
  }

  std::size_t rows() const { return allowed_.size(); }
  std::span<const std::uint32_t> keys(std::size_t row) const { return allowed_[row]; }

 private:
  std::vector<std::vector<std::uint32_t>> allowed_;
};

// One query row against one head: probs[j] = softmax_j(scale * q·k_j),
// out = Σ probs[j] v_j. Keys and values are pointers to head slices of
// width dh. Shared by the taped and the cached inference paths so both
// produce identical arithmetic.
template <typename T>
void attend_row(const T* q, std::span<const T* const> keys,
                std::span<const T* const> values, std::size_t dh, T scale,
                T* probs, T* out) {
  const std::size_t n = keys.size();
  T mx = -std::numeric_limits<T>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    T s = 0;
    for (std::size_t e = 0; e < dh; ++e) s += q[e] * keys[j][e];
    probs[j] = s * scale;
    mx = std::max(mx, probs[j]);
  }
  T sum = 0;
  for (std::size_t j = 0; j < n; ++j) {
    probs[j] = std::exp(probs[j] - mx);
    sum += probs[j];
  }
  const T inv = T(1) / sum;
  for (std::size_t j = 0; j < n; ++j) probs[j] *= inv;
  std::fill(out, out + dh, T(0));
  for (std::size_t j = 0; j < n; ++j) {
    const T p = probs[j];
    const T* v = values[j];
    for (std::size_t e = 0; e < dh; ++e) out[e] += p * v[e];
  }
}

}  // namespace predrc::num
