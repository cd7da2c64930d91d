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
#include <utility>

#include "data/records.hpp"

namespace predrc::eval {

// Positive class: the step was assigned to the AI. A positive is "true" when
// the AI actually solved the task.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct FScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when a ratio had a zero denominator and was defined as 0.
  bool degenerate = false;
};

ConfusionCounts confusion(std::span<const data::StepRecord> records);
FScore f_score(const ConfusionCounts& counts);
FScore f_score(std::span<const data::StepRecord> records);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};

// Ordinary least squares y = slope * x + intercept.
LinearFit linear_trend(std::span<const std::pair<double, double>> points);

}  // namespace predrc::eval
