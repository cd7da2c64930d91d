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

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "common/error.hpp"

namespace predrc::model {

enum class Agent : std::uint8_t { kAi = 0, kHuman = 1 };

// Feedback code of a completed step: 0 when the AI answered, 1 when the
// human answered and matched the AI's answer, 2 when the human's answer
// differed from it.
enum class Feedback : std::uint8_t { kAiAnswered = 0, kHumanMatched = 1, kHumanDiffered = 2 };

inline std::string_view agent_name(Agent a) { return a == Agent::kAi ? "AI" : "human"; }

inline Agent parse_agent(std::string_view s) {
  if (s == "AI") return Agent::kAi;
  if (s == "human") return Agent::kHuman;
  fail(ErrorCode::kParse, "unknown agent '" + std::string(s) + "'");
}

inline Feedback feedback_for(Agent d, bool answer_matches_ai) {
  if (d == Agent::kAi) return Feedback::kAiAnswered;
  return answer_matches_ai ? Feedback::kHumanMatched : Feedback::kHumanDiffered;
}

// One token of the reliance model's input. An empty optional is the MASK
// value for that field.
struct StepInput {
  std::vector<double> x;
  std::optional<double> c;
  std::optional<Agent> d;
  std::optional<Feedback> f;

  // The step whose reliance is being predicted: decision and feedback are
  // not yet known.
  static StepInput current(std::vector<double> x, std::optional<double> c) {
    return StepInput{std::move(x), c, std::nullopt, std::nullopt};
  }
};

struct ReliancePair {
  double r_with = 0.5;
  double r_without = 0.5;
};

}  // namespace predrc::model
