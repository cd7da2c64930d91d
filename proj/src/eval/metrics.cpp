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

#include "eval/metrics.hpp"

#include <cmath>

#include "common/error.hpp"

namespace predrc::eval {

ConfusionCounts confusion(std::span<const data::StepRecord> records) {
  ConfusionCounts c;
  for (const auto& r : records) {
    const bool to_ai = r.d == model::Agent::kAi;
    if (to_ai)
      ++(r.ai_correct ? c.tp : c.fp);
    else
      ++(r.ai_correct ? c.fn : c.tn);
  }
  return c;
}

FScore f_score(const ConfusionCounts& c) {
  require(c.total() > 0, "f_score needs at least one record");
  FScore s;
  const std::size_t predicted = c.tp + c.fp;
  const std::size_t actual = c.tp + c.fn;
  if (predicted > 0) s.precision = static_cast<double>(c.tp) / static_cast<double>(predicted);
  if (actual > 0) s.recall = static_cast<double>(c.tp) / static_cast<double>(actual);
  s.degenerate = predicted == 0 || actual == 0;
  if (s.precision + s.recall > 0.0)
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  else
    s.degenerate = true;
  return s;
}

FScore f_score(std::span<const data::StepRecord> records) { return f_score(confusion(records)); }

LinearFit linear_trend(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 2, "linear_trend needs at least two points");
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::kInvalidArgument, "linear_trend needs at least two distinct x values");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace predrc::eval
