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

#include "num/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace predrc::num {

namespace {

constexpr std::size_t kColBlock = 512;

}  // namespace

template <typename T>
void gemm(const T* a, const T* b, T* c, std::size_t m, std::size_t k,
          std::size_t n, bool accumulate) {
  if (!accumulate) std::fill(c, c + m * n, T(0));
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    T* c0 = c + i * n;
    T* c1 = c0 + n;
    T* c2 = c1 + n;
    T* c3 = c2 + n;
    const T* a0 = a + i * k;
    const T* a1 = a0 + k;
    const T* a2 = a1 + k;
    const T* a3 = a2 + k;
    for (std::size_t jb = 0; jb < n; jb += kColBlock) {
      const std::size_t je = std::min(n, jb + kColBlock);
      for (std::size_t p = 0; p < k; ++p) {
        const T* br = b + p * n;
        const T x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
        for (std::size_t j = jb; j < je; ++j) {
          const T bj = br[j];
          c0[j] += x0 * bj;
          c1[j] += x1 * bj;
          c2[j] += x2 * bj;
          c3[j] += x3 * bj;
        }
      }
    }
  }
  for (; i < m; ++i) {
    T* c0 = c + i * n;
    const T* a0 = a + i * k;
    for (std::size_t jb = 0; jb < n; jb += kColBlock) {
      const std::size_t je = std::min(n, jb + kColBlock);
      for (std::size_t p = 0; p < k; ++p) {
        const T* br = b + p * n;
        const T x0 = a0[p];
        for (std::size_t j = jb; j < je; ++j) c0[j] += x0 * br[j];
      }
    }
  }
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> t(a.cols(), a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.rows(),
          "matmul shape mismatch " + a.shape_string() + " * " + b.shape_string());
  Matrix<T> c(a.rows(), b.cols());
  gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
  return c;
}

template <typename T>
Matrix<T> matmul_tn(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.rows() == b.rows(), "matmul_tn shape mismatch " + a.shape_string() +
                                    " * " + b.shape_string());
  return matmul(transpose(a), b);
}

template <typename T>
Matrix<T> matmul_nt(const Matrix<T>& a, const Matrix<T>& b) {
  require(a.cols() == b.cols(), "matmul_nt shape mismatch " + a.shape_string() +
                                    " * " + b.shape_string());
  return matmul(a, transpose(b));
}

template <typename T>
void softmax(std::span<const T> in, std::span<T> out) {
  require(!in.empty(), "softmax of empty vector");
  require(in.size() == out.size(), "softmax output size mismatch");
  T mx = in[0];
  for (T v : in) mx = std::max(mx, v);
  T sum = 0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - mx);
    sum += out[i];
  }
  const T inv = T(1) / sum;
  for (T& v : out) v *= inv;
}

template <typename T>
std::vector<T> softmax(std::span<const T> in) {
  std::vector<T> out(in.size());
  softmax<T>(in, out);
  return out;
}

template <typename T>
T layer_norm_row(std::span<const T> x, std::span<T> xhat, T eps) {
  const std::size_t n = x.size();
  T mean = 0;
  for (T v : x) mean += v;
  mean /= static_cast<T>(n);
  T var = 0;
  for (T v : x) var += (v - mean) * (v - mean);
  var /= static_cast<T>(n);
  const T inv_std = T(1) / std::sqrt(var + eps);
  for (std::size_t i = 0; i < n; ++i) xhat[i] = (x[i] - mean) * inv_std;
  return inv_std;
}

#define PREDRC_INSTANTIATE(T)                                                  \
  template void gemm<T>(const T*, const T*, T*, std::size_t, std::size_t,      \
                        std::size_t, bool);                                    \
  template Matrix<T> transpose<T>(const Matrix<T>&);                           \
  template Matrix<T> matmul<T>(const Matrix<T>&, const Matrix<T>&);            \
  template Matrix<T> matmul_tn<T>(const Matrix<T>&, const Matrix<T>&);         \
  template Matrix<T> matmul_nt<T>(const Matrix<T>&, const Matrix<T>&);         \
  template void softmax<T>(std::span<const T>, std::span<T>);                  \
  template std::vector<T> softmax<T>(std::span<const T>);                      \
  template T layer_norm_row<T>(std::span<const T>, std::span<T>, T);

PREDRC_INSTANTIATE(float)
PREDRC_INSTANTIATE(double)

#undef PREDRC_INSTANTIATE

}  // namespace predrc::num
