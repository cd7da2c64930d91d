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
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/cue_rule.hpp"
#include "env/task_env.hpp"
#include "eval/metrics.hpp"
#include "model/params.hpp"
#include "sim/human.hpp"

namespace predrc::eval {

inline constexpr const char* kPredRc = "pred_rc";
inline constexpr const char* kRandom = "random";

struct SessionOutcome {
  std::string condition;
  double budget = 0.0;
  std::size_t session = 0;
  std::size_t cues = 0;
  double f1 = 0.0;
  bool degenerate = false;
};

struct CellStats {
  std::string condition;
  double budget = 0.0;
  std::size_t n = 0;
  double mean_cues = 0.0;
  double mean_f1 = 0.0;
  double sd_f1 = 0.0;
};

struct ConditionTrend {
  std::string condition;
  std::optional<LinearFit> fit;  // empty when every session had the same cue count
};

struct ComparisonReport {
  std::vector<CellStats> cells;
  std::vector<ConditionTrend> trends;
  std::vector<SessionOutcome> sessions;

  const CellStats& cell(const std::string& condition, double budget) const;
};

// Session s of every cell uses the same seed, hence the same participant,
// tasks, AI outputs and decision draws; only cue provision differs. Pred-RC
// cells use the threshold for the budget; random cells cue exactly
// round(budget * 60) uniformly placed steps.
ComparisonReport compare_conditions(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                    const model::ModelParams<float>& params,
                                    const sim::PopulationConfig& population,
                                    const calib::ThresholdSet& thresholds,
                                    std::span<const double> budgets, std::size_t sessions_per_cell,
                                    std::uint64_t seed);

std::uint64_t evaluation_seed(std::uint64_t seed, std::size_t session);

// condition,budget,n,mean_cues,mean_f1,sd_f1
std::string report_csv(const ComparisonReport& report);
// condition,budget,session,cues,f1,degenerate
std::string report_long_csv(const ComparisonReport& report);
// condition,slope,intercept
std::string report_trend_csv(const ComparisonReport& report);

}  // namespace predrc::eval
