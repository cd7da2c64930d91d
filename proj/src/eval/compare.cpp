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

#include "eval/compare.hpp"

#include <cmath>
#include <cstdio>

#include "calib/session.hpp"
#include "common/error.hpp"
#include "data/records.hpp"

namespace predrc::eval {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

const CellStats& ComparisonReport::cell(const std::string& condition, double budget) const {
  for (const auto& c : cells)
    if (c.condition == condition && std::abs(c.budget - budget) <= 1e-9) return c;
  fail(ErrorCode::kNotFound, "no report cell for " + condition + " at budget " + fmt(budget));
}

std::uint64_t evaluation_seed(std::uint64_t seed, std::size_t session) {
  return Rng(seed).split("evaluation").split(session).next_u64();
}

ComparisonReport compare_conditions(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                    const model::ModelParams<float>& params,
                                    const sim::PopulationConfig& population,
                                    const calib::ThresholdSet& thresholds,
                                    std::span<const double> budgets, std::size_t sessions_per_cell,
                                    std::uint64_t seed) {
  require(sessions_per_cell >= 1, "at least one session per cell is required");
  require(!budgets.empty(), "no budgets to compare");
  ComparisonReport report;
  for (const char* condition : {kPredRc, kRandom}) {
    std::vector<std::pair<double, double>> points;
    for (double budget : budgets) {
      require(budget >= 0.0 && budget <= 1.0, "budget outside [0,1]");
      const double threshold = thresholds.threshold_for(budget);
      CellStats cell{condition, budget, sessions_per_cell, 0, 0, 0};
      std::vector<double> f1s;
      for (std::size_t s = 0; s < sessions_per_cell; ++s) {
        const std::uint64_t session_seed = evaluation_seed(seed, s);
        const calib::SessionStreams streams(session_seed);
        const sim::SimHumanPolicy human = population.sample(streams.participant());
        calib::CuePolicy policy;
        const model::ModelParams<float>* model = nullptr;
        if (std::string(condition) == kPredRc) {
          policy = calib::CuePolicy::pred_rc(threshold);
          model = &params;
        } else {
          const auto count = static_cast<std::size_t>(std::lround(budget * data::kSessionLength));
          policy = calib::CuePolicy::scheduled(calib::exact_schedule(count, streams.schedule()));
        }
        const auto record = calib::run_session(env, calib, human, model, policy, session_seed,
                                               "e" + std::to_string(s));
        const FScore score = f_score(record.steps);
        const std::size_t cues = record.cues_shown();
        report.sessions.push_back({condition, budget, s, cues, score.f1, score.degenerate});
        points.emplace_back(static_cast<double>(cues), score.f1);
        cell.mean_cues += static_cast<double>(cues);
        f1s.push_back(score.f1);
      }
      const double n = static_cast<double>(sessions_per_cell);
      cell.mean_cues /= n;
      for (double f : f1s) cell.mean_f1 += f;
      cell.mean_f1 /= n;
      for (double f : f1s) cell.sd_f1 += (f - cell.mean_f1) * (f - cell.mean_f1);
      cell.sd_f1 = f1s.size() > 1 ? std::sqrt(cell.sd_f1 / (n - 1)) : 0.0;
      report.cells.push_back(cell);
    }
    ConditionTrend trend{condition, std::nullopt};
    bool distinct = false;
    for (const auto& p : points) distinct |= p.first != points.front().first;
    if (distinct) trend.fit = linear_trend(points);
    report.trends.push_back(trend);
  }
  return report;
}

std::string report_csv(const ComparisonReport& report) {
  std::string out = "condition,budget,n,mean_cues,mean_f1,sd_f1\n";
  for (const auto& c : report.cells)
    out += c.condition + "," + fmt(c.budget) + "," + std::to_string(c.n) + "," + fmt(c.mean_cues) + "," +
           fmt(c.mean_f1) + "," + fmt(c.sd_f1) + "\n";
  return out;
}

std::string report_long_csv(const ComparisonReport& report) {
  std::string out = "condition,budget,session,cues,f1,degenerate\n";
  for (const auto& s : report.sessions)
    out += s.condition + "," + fmt(s.budget) + "," + std::to_string(s.session) + "," +
           std::to_string(s.cues) + "," + fmt(s.f1) + "," + (s.degenerate ? "1" : "0") + "\n";
  return out;
}

std::string report_trend_csv(const ComparisonReport& report) {
  std::string out = "condition,slope,intercept\n";
  for (const auto& t : report.trends)
    out += t.condition + "," + (t.fit ? fmt(t.fit->slope) : "") + "," + (t.fit ? fmt(t.fit->intercept) : "") + "\n";
  return out;
}

}  // namespace predrc::eval
