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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "data/records.hpp"
#include "env/task_env.hpp"
#include "eval/metrics.hpp"
#include "model/params.hpp"
#include "model/tracker.hpp"
#include "sim/human.hpp"

namespace predrc::calib {

// How a session decides cue provision: Pred-RC with a threshold, or a fixed
// per-step schedule (dataset strata and the random condition).
struct CuePolicy {
  std::optional<double> threshold;
  std::vector<bool> schedule;

  static CuePolicy pred_rc(double threshold) { return {threshold, {}}; }
  static CuePolicy scheduled(std::vector<bool> schedule);
  bool uses_model() const { return threshold.has_value(); }
};

// count steps out of 60 drawn uniformly without replacement.
std::vector<bool> exact_schedule(std::size_t count, Rng rng);

// Random streams of one session. Everything random about a session derives
// from its seed, so two conditions run with the same seed see the same
// tasks, AI outputs, human answers and decision draws.
struct SessionStreams {
  explicit SessionStreams(std::uint64_t seed) : root(seed) {}
  Rng task(std::size_t i) const { return root.split("task").split(i); }
  Rng ai(std::size_t i) const { return root.split("ai").split(i); }
  Rng human(std::size_t i) const { return root.split("human").split(i); }
  Rng decide(std::size_t i) const { return root.split("decide").split(i); }
  Rng schedule() const { return root.split("schedule"); }
  Rng participant() const { return root.split("participant"); }
  Rng root;
};

struct IssuedStep {
  std::size_t index = 0;
  env::TaskInstance task;
  std::string ai_answer;
  double c_hat = 0.0;
  double p = 0.5;
  std::optional<double> cue;
  std::optional<data::CueDecision> decision;
};

struct SubmitResult {
  bool correct = false;
  std::optional<std::size_t> next_index;  // empty once the session is done
};

struct SessionSummary {
  eval::FScore score;
  std::size_t cues_shown = 0;
  std::size_t steps = 0;
};

// Per-step protocol: request_step, then decide, then submit. The step and
// its cue decision are computed once and cached, so repeating request_step
// returns the same step. Out-of-order events throw kProtocol; events after
// the last step throw kState.
class LiveSession {
 public:
  enum class Phase { kAwaitingRequest, kIssued, kDecided, kDone };

  LiveSession(const env::TaskEnv& env, env::CalibrationModel calib,
              const model::ModelParams<float>* params, CuePolicy policy, std::string participant_id,
              std::uint64_t seed, std::optional<int> stratum = std::nullopt);

  Phase phase() const { return phase_; }
  bool done() const { return phase_ == Phase::kDone; }
  std::size_t index() const { return record_.steps.size(); }

  const IssuedStep& request_step();
  // Returns the AI's answer, which is then locked, when the AI is chosen.
  std::optional<std::string> decide(model::Agent agent);
  // For an AI step the answer may be omitted; if given it must equal the
  // locked AI answer. For a human step it is required.
  SubmitResult submit(std::optional<std::string> answer);

  const data::SessionRecord& record() const { return record_; }
  SessionSummary summary() const;

 private:
  const env::TaskEnv* env_;
  env::CalibrationModel calib_;
  const model::ModelParams<float>* params_;
  CuePolicy policy_;
  SessionStreams streams_;
  std::unique_ptr<model::RelianceTracker<float>> tracker_;
  Phase phase_ = Phase::kAwaitingRequest;
  std::optional<IssuedStep> issued_;
  std::optional<model::Agent> agent_;
  data::SessionRecord record_;
};

SessionSummary summarize(const data::SessionRecord& record);

// A simulated participant plays a whole session.
data::SessionRecord run_session(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                const sim::SimHumanPolicy& human,
                                const model::ModelParams<float>* params, const CuePolicy& policy,
                                std::uint64_t seed, const std::string& participant_id,
                                std::optional<int> stratum = std::nullopt);

// Re-drives a logged session through a fresh LiveSession with the logged
// decisions and answers. Throws kState when any step, cue decision or the
// summary differs from the log.
SessionSummary replay_session(const env::TaskEnv& env, const env::CalibrationModel& calib,
                              const model::ModelParams<float>* params, const CuePolicy& policy,
                              const data::SessionRecord& log);

}  // namespace predrc::calib
