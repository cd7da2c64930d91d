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
#include <functional>
#include <span>
#include <vector>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "num/matrix.hpp"

namespace predrc::num {

// Evaluates the loss at the current parameter values. When grads is
// non-null it is pre-sized to the parameter shapes and zeroed; the callee
// adds the analytic gradient into it.
using LossFn = std::function<double(std::vector<MatrixD>* grads)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coords_checked = 0;
};

// Central-difference check of an analytic gradient over a sampled subset of
// coordinates (up to samples_per_tensor per tensor; all of them if the tensor
// is smaller). Error per coordinate: |analytic - numeric| / max(1, |numeric|).
inline GradCheckResult grad_check(const LossFn& loss_fn,
                                  std::span<MatrixD* const> params, double eps,
                                  std::size_t samples_per_tensor = 24,
                                  std::uint64_t seed = 1) {
  require(eps >= 1e-6 && eps <= 1e-3, "grad_check eps must lie in [1e-6, 1e-3]");
  std::vector<MatrixD> analytic;
  for (const MatrixD* p : params) analytic.emplace_back(p->rows(), p->cols());
  const double base = loss_fn(&analytic);
  if (!std::isfinite(base)) fail(ErrorCode::kNumeric, "grad_check: non-finite loss");

  Rng rng(seed);
  GradCheckResult result;
  for (std::size_t t = 0; t < params.size(); ++t) {
    MatrixD& p = *params[t];
    std::vector<std::size_t> coords(p.size());
    for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    if (coords.size() > samples_per_tensor) {
      for (std::size_t i = 0; i < samples_per_tensor; ++i)
        std::swap(coords[i], coords[i + rng.below(coords.size() - i)]);
      coords.resize(samples_per_tensor);
    }
    for (std::size_t i : coords) {
      const double saved = p[i];
      p[i] = saved + eps;
      const double up = loss_fn(nullptr);
      p[i] = saved - eps;
      const double down = loss_fn(nullptr);
      p[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        fail(ErrorCode::kNumeric, "grad_check: non-finite loss");
      const double numeric = (up - down) / (2.0 * eps);
      const double err =
          std::abs(analytic[t][i] - numeric) / std::max(1.0, std::abs(numeric));
      result.max_rel_error = std::max(result.max_rel_error, err);
      ++result.coords_checked;
    }
  }
  return result;
}

}  // namespace predrc::num
