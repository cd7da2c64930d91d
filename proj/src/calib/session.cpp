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

#include "calib/session.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

#include "calib/cue_rule.hpp"
#include "common/error.hpp"

namespace predrc::calib {

CuePolicy CuePolicy::scheduled(std::vector<bool> schedule) {
  require(schedule.size() == data::kSessionLength, "cue schedule must cover 60 steps");
  return {std::nullopt, std::move(schedule)};
}

std::vector<bool> exact_schedule(std::size_t count, Rng rng) {
  require(count <= data::kSessionLength, "cue count exceeds session length");
  std::vector<std::size_t> idx(data::kSessionLength);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) std::swap(idx[i], idx[i + rng.below(idx.size() - i)]);
  std::vector<bool> out(data::kSessionLength, false);
  for (std::size_t i = 0; i < count; ++i) out[idx[i]] = true;
  return out;
}

LiveSession::LiveSession(const env::TaskEnv& env, env::CalibrationModel calib,
                         const model::ModelParams<float>* params, CuePolicy policy,
                         std::string participant_id, std::uint64_t seed,
                         std::optional<int> stratum)
    : env_(&env), calib_(calib), params_(params), policy_(std::move(policy)), streams_(seed) {
  require(!participant_id.empty(), "participant id must not be empty");
  if (policy_.uses_model()) {
    require(params_ != nullptr, "Pred-RC sessions need a model");
    require(params_->config.x_dim == env.x_dim(), "model x_dim does not match the task features");
    tracker_ = std::make_unique<model::RelianceTracker<float>>(*params_);
  } else {
    require(policy_.schedule.size() == data::kSessionLength, "cue schedule must cover 60 steps");
  }
  record_.participant_id = std::move(participant_id);
  record_.generator_seed = seed;
  record_.rcc_rate_stratum = stratum;
}

const IssuedStep& LiveSession::request_step() {
  if (phase_ == Phase::kDone) fail(ErrorCode::kState, "session is complete");
  if (issued_) return *issued_;

  IssuedStep s;
  s.index = index();
  Rng task_rng = streams_.task(s.index);
  Rng ai_rng = streams_.ai(s.index);
  s.task = env_->sample_task(task_rng);
  const env::CharDistributions dists = env_->task_ai_infer(s.task, ai_rng);
  s.ai_answer = env::ai_answer(dists);
  s.c_hat = env::confidence_rate(dists);
  s.p = env::success_probability(calib_, s.c_hat);
  bool provide = false;
  if (policy_.uses_model()) {
    s.decision = make_decision(tracker_->predict_pair(s.task.x, s.c_hat), s.p, *policy_.threshold);
    provide = s.decision->provide;
  } else {
    provide = policy_.schedule[s.index];
  }
  if (provide) s.cue = s.c_hat;
  issued_ = std::move(s);
  phase_ = Phase::kIssued;
  return *issued_;
}

std::optional<std::string> LiveSession::decide(model::Agent agent) {
  if (phase_ == Phase::kDone) fail(ErrorCode::kState, "session is complete");
  if (phase_ != Phase::kIssued) fail(ErrorCode::kProtocol, "decision must follow a step request");
  agent_ = agent;
  phase_ = Phase::kDecided;
  if (agent == model::Agent::kAi) return issued_->ai_answer;
  return std::nullopt;
}

SubmitResult LiveSession::submit(std::optional<std::string> answer) {
  if (phase_ == Phase::kDone) fail(ErrorCode::kState, "session is complete");
  if (phase_ != Phase::kDecided) fail(ErrorCode::kProtocol, "submit must follow a decision");
  const IssuedStep& s = *issued_;
  std::string y;
  if (*agent_ == model::Agent::kAi) {
    if (answer && *answer != s.ai_answer)
      fail(ErrorCode::kProtocol, "the AI's answer is locked and cannot be edited");
    y = s.ai_answer;
  } else {
    require(answer.has_value(), "a human step needs an answer");
    y = *answer;
    std::transform(y.begin(), y.end(), y.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    require(y.size() == env::kAnswerLength &&
                std::all_of(y.begin(), y.end(),
                            [](char ch) { return env::kAlphabet.find(ch) != std::string_view::npos; }),
            "answer must be five characters from 0-9 and a-z");
  }

  data::StepRecord r;
  r.participant_id = record_.participant_id;
  r.step_index = s.index;
  r.cluster_id = env_->clusters()[s.task.cluster].id;
  r.x = s.task.x;
  r.y_star = s.task.y_star;
  r.ai_answer = s.ai_answer;
  r.c_hat = s.c_hat;
  r.cue_provided = s.cue.has_value();
  r.c = s.cue;
  r.p = s.p;
  r.d = *agent_;
  r.y = y;
  r.f = model::feedback_for(r.d, y == s.ai_answer);
  r.ai_correct = s.ai_answer == s.task.y_star;
  if (r.d == model::Agent::kHuman) r.human_correct = y == s.task.y_star;
  r.decision = s.decision;
  r.validate();

  if (tracker_) tracker_->append(r.completed_input());
  const bool correct = y == s.task.y_star;
  record_.steps.push_back(std::move(r));
  issued_.reset();
  agent_.reset();
  if (record_.steps.size() == data::kSessionLength) {
    phase_ = Phase::kDone;
    return {correct, std::nullopt};
  }
  phase_ = Phase::kAwaitingRequest;
  return {correct, record_.steps.size()};
}

SessionSummary summarize(const data::SessionRecord& record) {
  require(!record.steps.empty(), "session has no completed steps");
  return {eval::f_score(record.steps), record.cues_shown(), record.steps.size()};
}

SessionSummary LiveSession::summary() const {
  if (phase_ != Phase::kDone) fail(ErrorCode::kProtocol, "summary is available after the last step");
  return summarize(record_);
}

data::SessionRecord run_session(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                const sim::SimHumanPolicy& human,
                                const model::ModelParams<float>* params, const CuePolicy& policy,
                                std::uint64_t seed, const std::string& participant_id,
                                std::optional<int> stratum) {
  LiveSession session(env, calib, params, policy, participant_id, seed, stratum);
  sim::SimHuman person(human, env.clusters().size());
  const SessionStreams streams(seed);
  while (!session.done()) {
    const IssuedStep step = session.request_step();
    Rng decide_rng = streams.decide(step.index);
    const double r = person.reliance(step.task.cluster, step.cue);
    const model::Agent d = decide_rng.uniform() < r ? model::Agent::kAi : model::Agent::kHuman;
    session.decide(d);
    if (d == model::Agent::kAi) {
      session.submit(std::nullopt);
    } else {
      Rng human_rng = streams.human(step.index);
      session.submit(sim::human_answer(step.task, person.policy(), human_rng));
    }
    person.experience(step.task.cluster, d, step.ai_answer == step.task.y_star);
  }
  return session.record();
}

SessionSummary replay_session(const env::TaskEnv& env, const env::CalibrationModel& calib,
                              const model::ModelParams<float>* params, const CuePolicy& policy,
                              const data::SessionRecord& log) {
  LiveSession session(env, calib, params, policy, log.participant_id, log.generator_seed,
                      log.rcc_rate_stratum);
  for (const auto& logged : log.steps) {
    const IssuedStep& step = session.request_step();
    if (step.index != logged.step_index || step.task.y_star != logged.y_star ||
        step.ai_answer != logged.ai_answer || step.c_hat != logged.c_hat || step.p != logged.p)
      fail(ErrorCode::kState, "replayed task differs at step " + std::to_string(logged.step_index));
    if (step.cue != logged.c || step.decision != logged.decision)
      fail(ErrorCode::kState, "replayed cue decision differs at step " + std::to_string(logged.step_index));
    session.decide(logged.d);
    session.submit(logged.y);
    if (!(session.record().steps.back() == logged))
      fail(ErrorCode::kState, "replayed record differs at step " + std::to_string(logged.step_index));
  }
  const SessionSummary replayed = summarize(session.record());
  const SessionSummary original = summarize(log);
  if (replayed.cues_shown != original.cues_shown || replayed.steps != original.steps ||
      replayed.score.f1 != original.score.f1 || replayed.score.precision != original.score.precision ||
      replayed.score.recall != original.score.recall)
    fail(ErrorCode::kState, "replayed summary differs from the log");
  return replayed;
}

}  // namespace predrc::calib
