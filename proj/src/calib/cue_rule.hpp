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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "data/records.hpp"
#include "model/params.hpp"
#include "model/step_input.hpp"

namespace predrc::calib {

struct Discrepancies {
  double delta_with = 0.0;
  double delta_without = 0.0;
};

Discrepancies compute_discrepancies(const model::ReliancePair& pair, double p);

// Show the cue iff it reduces the reliance discrepancy by strictly more than
// the threshold. Larger thresholds withhold more cues.
bool decide_cue(double delta_with, double delta_without, double threshold);

data::CueDecision make_decision(const model::ReliancePair& pair, double p, double threshold);

// Threshold realizing roughly fraction q of cues on a list of improvements
// (delta_without - delta_with): the lower (1 - q)-quantile, or just below the
// minimum when q is 1.
double threshold_for_fraction(std::span<const double> improvements, double q);

struct ThresholdEntry {
  double target = 0.0;
  double threshold = 0.0;
  bool operator==(const ThresholdEntry&) const = default;
};

// Entries sorted by target; thresholds are non-increasing in target.
class ThresholdSet {
 public:
  ThresholdSet() = default;
  explicit ThresholdSet(std::vector<ThresholdEntry> entries, std::string model_digest = {});

  const std::vector<ThresholdEntry>& entries() const { return entries_; }
  const std::string& model_digest() const { return model_digest_; }
  // Throws kNotFound when no entry matches the target.
  double threshold_for(double target) const;

  std::string to_json() const;
  static ThresholdSet from_json(const std::string& text);
  void save(const std::string& path) const;
  static ThresholdSet load(const std::string& path);

  bool operator==(const ThresholdSet&) const = default;

 private:
  std::vector<ThresholdEntry> entries_;
  std::string model_digest_;
};

// Improvement of showing the cue at every step of every session, predicted
// by the model from the recorded history.
std::vector<double> cue_improvements(const data::RelianceDataset& dataset,
                                     const model::ModelParams<float>& params);

ThresholdSet derive_thresholds(const data::RelianceDataset& dataset,
                               const model::ModelParams<float>& params,
                               std::span<const double> targets);

}  // namespace predrc::calib
