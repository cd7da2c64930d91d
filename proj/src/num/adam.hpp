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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "common/error.hpp"
#include "num/matrix.hpp"

namespace predrc::num {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::vector<Matrix<T>> first_moment;
  std::vector<Matrix<T>> second_moment;
  std::uint64_t step = 0;
};

// One bias-corrected Adam update. Moment buffers are created on the first
// call with the parameter shapes and must match on every later call.
template <typename T>
void adam_step(std::span<Matrix<T>* const> params,
               std::span<const Matrix<T>* const> grads, AdamState<T>& state) {
  const AdamConfig& c = state.config;
  require(c.lr > 0.0, "adam learning rate must be positive");
  require(params.size() == grads.size(), "adam: parameter/gradient count mismatch");
  if (state.step == 0 && state.first_moment.empty()) {
    for (const Matrix<T>* p : params) {
      state.first_moment.emplace_back(p->rows(), p->cols());
      state.second_moment.emplace_back(p->rows(), p->cols());
    }
  }
  require(state.first_moment.size() == params.size(),
          "adam: state tracks a different parameter count");
  for (std::size_t t = 0; t < params.size(); ++t) {
    require(params[t]->same_shape(*grads[t]) &&
                params[t]->same_shape(state.first_moment[t]),
            "adam: shape mismatch at tensor " + std::to_string(t));
  }

  ++state.step;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const T b1 = static_cast<T>(c.beta1), b2 = static_cast<T>(c.beta2);
  const T step_size = static_cast<T>(c.lr / bc1);
  const T inv_bc2 = static_cast<T>(1.0 / bc2);
  const T eps = static_cast<T>(c.epsilon);
  for (std::size_t t = 0; t < params.size(); ++t) {
    T* p = params[t]->data();
    const T* g = grads[t]->data();
    T* m = state.first_moment[t].data();
    T* v = state.second_moment[t].data();
    const std::size_t n = params[t]->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = b1 * m[i] + (T(1) - b1) * g[i];
      v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
      p[i] -= step_size * m[i] / (std::sqrt(v[i] * inv_bc2) + eps);
    }
  }
}

}  // namespace predrc::num
