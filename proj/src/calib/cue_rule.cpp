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

#include "calib/cue_rule.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "json.hpp"
#include "model/checkpoint.hpp"
#include "model/trustformer.hpp"

namespace predrc::calib {

Discrepancies compute_discrepancies(const model::ReliancePair& pair, double p) {
  require(p >= 0.0 && p <= 1.0, "success probability outside [0,1]");
  return {std::abs(pair.r_with - p), std::abs(pair.r_without - p)};
}

bool decide_cue(double delta_with, double delta_without, double threshold) {
  require(std::isfinite(delta_with) && std::isfinite(delta_without) && !std::isnan(threshold),
          "cue decision inputs must be finite");
  // The printed form of the rule compares with "<"; that contradicts the
  // stated behaviour of the threshold, so the prose direction is used.
  return delta_without - delta_with > threshold;
}

data::CueDecision make_decision(const model::ReliancePair& pair, double p, double threshold) {
  const Discrepancies d = compute_discrepancies(pair, p);
  return {pair.r_with, pair.r_without, p, d.delta_with, d.delta_without, threshold,
          decide_cue(d.delta_with, d.delta_without, threshold)};
}

double threshold_for_fraction(std::span<const double> improvements, double q) {
  require(!improvements.empty(), "no improvements to derive a threshold from");
  require(q >= 0.0 && q <= 1.0, "target cue fraction outside [0,1]");
  std::vector<double> sorted(improvements.begin(), improvements.end());
  std::sort(sorted.begin(), sorted.end());
  if (q >= 1.0) return sorted.front() - 1e-9;
  const auto idx = static_cast<std::size_t>(
      std::floor(static_cast<double>(sorted.size() - 1) * (1.0 - q)));
  return sorted[idx];
}

ThresholdSet::ThresholdSet(std::vector<ThresholdEntry> entries, std::string model_digest)
    : entries_(std::move(entries)), model_digest_(std::move(model_digest)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const ThresholdEntry& a, const ThresholdEntry& b) { return a.target < b.target; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    require(entries_[i].target >= 0.0 && entries_[i].target <= 1.0, "threshold target outside [0,1]");
    require(std::isfinite(entries_[i].threshold), "threshold is not finite");
    if (i > 0) {
      require(entries_[i].target > entries_[i - 1].target, "duplicate threshold target");
      require(entries_[i].threshold <= entries_[i - 1].threshold,
              "thresholds must not increase with the target fraction");
    }
  }
}

double ThresholdSet::threshold_for(double target) const {
  for (const auto& e : entries_)
    if (std::abs(e.target - target) <= 1e-9) return e.threshold;
  fail(ErrorCode::kNotFound, "no threshold for target " + std::to_string(target));
}

std::string ThresholdSet::to_json() const {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : entries_) entries.push_back({{"target", e.target}, {"threshold", e.threshold}});
  return nlohmann::json{{"schema", "thresholds/1"}, {"model_digest", model_digest_}, {"entries", entries}}
             .dump(2) +
         "\n";
}

ThresholdSet ThresholdSet::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("schema").get<std::string>() != "thresholds/1")
      fail(ErrorCode::kParse, "unsupported threshold file schema");
    std::vector<ThresholdEntry> entries;
    for (const auto& e : j.at("entries"))
      entries.push_back({e.at("target").get<double>(), e.at("threshold").get<double>()});
    return ThresholdSet(std::move(entries), j.at("model_digest").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kParse, std::string("threshold file: ") + e.what());
  }
}

void ThresholdSet::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  out << to_json();
  if (!out) fail(ErrorCode::kIo, "cannot write '" + path + "'");
}

ThresholdSet ThresholdSet::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::vector<double> cue_improvements(const data::RelianceDataset& dataset,
                                     const model::ModelParams<float>& params) {
  require(!dataset.sessions.empty(), "dataset is empty");
  std::vector<double> out;
  out.reserve(dataset.num_steps());
  for (const auto& session : dataset.sessions) {
    std::vector<model::StepInput> steps;
    std::vector<model::PrefixQuery> queries;
    for (const auto& s : session.steps) {
      steps.push_back(s.completed_input());
      queries.push_back({s.step_index, s.c_hat});
      queries.push_back({s.step_index, std::nullopt});
    }
    model::LayoutBuilder builder(params.config);
    builder.add_session_queries(steps, queries);
    const auto r = model::predict_layout(params, builder.layout());
    for (std::size_t i = 0; i < session.steps.size(); ++i) {
      const auto d = compute_discrepancies({r[2 * i], r[2 * i + 1]}, session.steps[i].p);
      out.push_back(d.delta_without - d.delta_with);
    }
  }
  return out;
}

ThresholdSet derive_thresholds(const data::RelianceDataset& dataset,
                               const model::ModelParams<float>& params,
                               std::span<const double> targets) {
  const auto improvements = cue_improvements(dataset, params);
  std::vector<ThresholdEntry> entries;
  for (double q : targets) entries.push_back({q, threshold_for_fraction(improvements, q)});
  return ThresholdSet(std::move(entries), model::checkpoint_digest(params));
}

}  // namespace predrc::calib
