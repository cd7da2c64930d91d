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
#include <optional>
#include <vector>

#include "model/params.hpp"
#include "model/step_input.hpp"

namespace predrc::model {

// Incremental inference over one growing collaboration history. Completed
// steps are appended once; their per-layer keys and values are cached, so a
// prediction costs one token pass regardless of history length. Results are
// bit-identical to predict_pair / predict_layout on the same history.
template <typename T>
class RelianceTracker {
 public:
  explicit RelianceTracker(const ModelParams<T>& params);

  std::size_t length() const { return length_; }

  double predict(const std::vector<double>& x, std::optional<double> c) const;
  ReliancePair predict_pair(const std::vector<double>& x, double c_hat) const;

  // Adds a completed step (decision and feedback known) to the history.
  void append(const StepInput& step);

 private:
  struct Pass {
    T logit;
    std::vector<Matrix<T>> keys, values;  // this token's rows, per layer
  };
  // One token through the stack, attending to the cached history and to
  // itself.
  Pass run(const StepInput& token) const;

  const ModelParams<T>* params_;
  std::size_t length_ = 0;
  // Per layer: row-major key and value rows of the cached history.
  std::vector<std::vector<T>> keys_;
  std::vector<std::vector<T>> values_;
};

}  // namespace predrc::model
