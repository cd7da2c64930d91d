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

#include <cstddef>
#include <span>

#include "num/matrix.hpp"

namespace predrc::num {

// C (+)= A·B on raw row-major buffers; A is m×k, B is k×n. Each output
// element is accumulated over k in increasing order regardless of m, so a
// row computed alone is bit-identical to the same row inside a batch.
template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate);

template <typename T>
Matrix<T> transpose(const Matrix<T>& a);

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);
// aᵀ·b
template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b);
// a·bᵀ
template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b);

// Max-shifted softmax. Throws on empty input.
template <typename T>
void softmax(std::span<const T> in, std::span<T> out);

template <typename T>
std::vector<T> softmax(std::span<const T> in);

// Normalizes one row: xhat = (x - mean) / sqrt(var + eps). Returns 1/std.
template <typename T>
T layer_norm_row(std::span<const T> x, std::span<T> xhat, T eps);

template <typename T>
inline T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace predrc::num
