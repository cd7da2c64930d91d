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

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "model/step_input.hpp"

namespace predrc::data {

inline constexpr std::size_t kSessionLength = 60;
inline constexpr std::array<int, 6> kStrata = {0, 20, 40, 60, 80, 100};
inline constexpr std::string_view kSchema = "rcd/1";

// Inputs and outcome of one cue decision, kept in session logs so decisions
// can be audited and replayed.
struct CueDecision {
  double r_with = 0.5;
  double r_without = 0.5;
  double p = 0.5;
  double delta_with = 0.0;
  double delta_without = 0.0;
  double threshold = 0.0;
  bool provide = false;

  bool operator==(const CueDecision&) const = default;
};

struct StepRecord {
  std::string participant_id;
  std::size_t step_index = 0;
  std::string cluster_id;
  std::vector<double> x;
  std::string y_star;
  std::string ai_answer;
  double c_hat = 0.0;
  bool cue_provided = false;
  std::optional<double> c;
  double p = 0.5;
  model::Agent d = model::Agent::kHuman;
  std::string y;
  model::Feedback f = model::Feedback::kHumanDiffered;
  bool ai_correct = false;
  std::optional<bool> human_correct;  // null when the AI answered
  std::optional<CueDecision> decision;

  // Throws kInvalidArgument naming the first violated invariant.
  void validate() const;
  model::StepInput completed_input() const { return {x, c, d, f}; }
  bool operator==(const StepRecord&) const = default;
};

struct SessionRecord {
  std::string participant_id;
  std::optional<int> rcc_rate_stratum;  // set for dataset sessions
  std::uint64_t generator_seed = 0;
  std::vector<StepRecord> steps;

  // Complete sessions have exactly 60 steps; a live session log may stop early.
  void validate(bool require_complete = true) const;
  std::size_t cues_shown() const;
  bool operator==(const SessionRecord&) const = default;
};

struct Provenance {
  std::string schema{kSchema};
  std::uint64_t seed = 0;
  std::string config_digest;

  bool operator==(const Provenance&) const = default;
};

struct RelianceDataset {
  Provenance provenance;
  std::vector<SessionRecord> sessions;

  void validate() const;
  std::size_t num_steps() const;
  bool operator==(const RelianceDataset&) const = default;
};

// Line format: a provenance header line, then for each session one session
// line followed by its step lines.
void write_jsonl(std::ostream& out, const RelianceDataset& dataset);
RelianceDataset read_jsonl(std::istream& in);
void write_jsonl_file(const std::string& path, const RelianceDataset& dataset);
RelianceDataset read_jsonl_file(const std::string& path);

std::string to_jsonl(const RelianceDataset& dataset);
RelianceDataset from_jsonl(const std::string& text);

}  // namespace predrc::data
