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

#include <cmath>
#include <limits>

#include "calib/cue_rule.hpp"
#include "calib/session.hpp"
#include "data/generate.hpp"
#include "common/error.hpp"
#include "gtest/gtest.h"
#include "model/trustformer.hpp"
#include "test_world.hpp"

namespace predrc::calib {
namespace {

using model::Agent;
using testing::standard_calibration;
using testing::standard_env;

model::ModelParams<float> cue_sensitive_model() {
  auto p = model::ModelParams<float>::init(model::ModelConfig::tiny(8), Rng(11));
  Rng rng(12);
  for (auto* m : {&p.head_w.back(), &p.head_b.back()})
    for (float& v : m->values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  for (float& v : p.c_w.values()) v *= 20.0f;
  return p;
}

TEST(Discrepancies, Examples) {
  auto d = compute_discrepancies({0.5, 0.5}, 0.5);
  EXPECT_EQ(d.delta_with, 0.0);
  EXPECT_EQ(d.delta_without, 0.0);
  d = compute_discrepancies({1.0, 0.0}, 0.0);
  EXPECT_EQ(d.delta_with, 1.0);
  EXPECT_EQ(d.delta_without, 0.0);
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double r = rng.uniform(), p = rng.uniform();
    EXPECT_EQ(compute_discrepancies({r, r}, p).delta_with, compute_discrepancies({p, p}, r).delta_with);
  }
  EXPECT_THROW(compute_discrepancies({0.5, 0.5}, 1.2), Error);
}

TEST(DecideCue, Examples) {
  EXPECT_TRUE(decide_cue(0.1, 0.4, 0.0));
  EXPECT_FALSE(decide_cue(0.1, 0.1, 0.0));
  EXPECT_FALSE(decide_cue(0.1, 0.4, 0.5));
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_TRUE(decide_cue(0.9, 0.0, -inf));
  EXPECT_FALSE(decide_cue(0.0, 0.9, inf));
}

TEST(Thresholds, Extremes) {
  Rng rng(2);
  std::vector<double> diffs;
  for (int i = 0; i < 101; ++i) diffs.push_back(rng.uniform(-0.5, 0.5));
  auto provided = [&](double thr) {
    std::size_t n = 0;
    for (double d : diffs) n += d > thr;
    return n;
  };
  EXPECT_EQ(provided(threshold_for_fraction(diffs, 1.0)), diffs.size());
  EXPECT_EQ(provided(threshold_for_fraction(diffs, 0.0)), 0u);
  EXPECT_LT(threshold_for_fraction(diffs, 1.0), *std::min_element(diffs.begin(), diffs.end()));
  EXPECT_GE(threshold_for_fraction(diffs, 0.0), *std::max_element(diffs.begin(), diffs.end()));
  auto sorted = diffs;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(threshold_for_fraction(diffs, 0.5), sorted[50]);
  EXPECT_THROW(threshold_for_fraction({}, 0.5), Error);
}

TEST(Thresholds, SetOrderingAndFile) {
  ThresholdSet set({{0.6, 0.01}, {0.2, 0.3}, {0.4, 0.1}}, "abc");
  EXPECT_EQ(set.entries().front().target, 0.2);
  EXPECT_EQ(set.threshold_for(0.4), 0.1);
  EXPECT_THROW(set.threshold_for(0.5), Error);
  EXPECT_TRUE(ThresholdSet::from_json(set.to_json()) == set);
  EXPECT_THROW(ThresholdSet({{0.2, 0.1}, {0.4, 0.3}}), Error);
  EXPECT_THROW(ThresholdSet({{0.2, 0.1}, {0.2, 0.0}}), Error);
  EXPECT_THROW(ThresholdSet::from_json("{}"), Error);
}

TEST(Thresholds, DerivedFromDataset) {
  const auto model = cue_sensitive_model();
  const auto ds = data::generate_dataset(standard_env(), standard_calibration(), {}, 6, 3);
  const std::vector<double> targets = {0.0, 0.2, 0.5, 1.0};
  const auto set = derive_thresholds(ds, model, targets);
  const auto improvements = cue_improvements(ds, model);
  ASSERT_EQ(improvements.size(), 360u);
  for (double q : targets) {
    std::size_t n = 0;
    for (double d : improvements) n += decide_cue(0.0, d, set.threshold_for(q));
    EXPECT_NEAR(n / 360.0, q, 1.0 / 360 + 1e-12) << q;
  }
  // Improvements must agree with step-by-step pair prediction.
  const auto& s = ds.sessions[1];
  std::vector<model::StepInput> hist;
  for (std::size_t i = 0; i < 10; ++i) {
    auto pair = model::predict_pair<float>(model, hist, model::StepInput::current(s.steps[i].x, s.steps[i].c_hat));
    auto d = compute_discrepancies(pair, s.steps[i].p);
    EXPECT_EQ(improvements[60 + i], d.delta_without - d.delta_with);
    hist.push_back(s.steps[i].completed_input());
  }
}

TEST(LiveSession, ProtocolOrder) {
  const auto model = cue_sensitive_model();
  LiveSession s(standard_env(), standard_calibration(), &model, CuePolicy::pred_rc(0.0), "live", 7);
  EXPECT_THROW(s.decide(Agent::kAi), Error);
  EXPECT_THROW(s.submit("abcde"), Error);
  const IssuedStep first = s.request_step();
  const IssuedStep again = s.request_step();
  EXPECT_EQ(first.task.y_star, again.task.y_star);
  EXPECT_EQ(first.cue, again.cue);
  ASSERT_TRUE(first.decision.has_value());
  EXPECT_EQ(first.cue.has_value(), first.decision->provide);
  EXPECT_THROW(s.submit(std::nullopt), Error);
  EXPECT_EQ(*s.decide(Agent::kAi), first.ai_answer);
  EXPECT_THROW(s.decide(Agent::kHuman), Error);
  std::string edited = first.ai_answer;
  edited[0] = edited[0] == 'a' ? 'b' : 'a';
  try {
    s.submit(edited);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProtocol);
  }
  auto res = s.submit(first.ai_answer);
  EXPECT_EQ(res.next_index, std::optional<std::size_t>(1));
  EXPECT_THROW(s.summary(), Error);

  s.request_step();
  EXPECT_FALSE(s.decide(Agent::kHuman).has_value());
  EXPECT_THROW(s.submit(std::nullopt), Error);
  EXPECT_THROW(s.submit("abc"), Error);
  EXPECT_THROW(s.submit("ab#de"), Error);
  EXPECT_EQ(s.submit("ABCDE").next_index, std::optional<std::size_t>(2));
  EXPECT_EQ(s.record().steps[1].y, "abcde");

  while (!s.done()) {
    s.request_step();
    s.decide(Agent::kAi);
    s.submit(std::nullopt);
  }
  EXPECT_EQ(s.record().steps.size(), 60u);
  EXPECT_EQ(s.summary().steps, 60u);
  try {
    s.request_step();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kState);
  }
}

TEST(RunSession, DeterministicAndBudgetExtremes) {
  const auto model = cue_sensitive_model();
  const sim::SimHumanPolicy human;
  const double inf = std::numeric_limits<double>::infinity();
  auto a = run_session(standard_env(), standard_calibration(), human, &model, CuePolicy::pred_rc(0.0), 9, "p");
  auto b = run_session(standard_env(), standard_calibration(), human, &model, CuePolicy::pred_rc(0.0), 9, "p");
  EXPECT_TRUE(a == b);
  auto none = run_session(standard_env(), standard_calibration(), human, &model, CuePolicy::pred_rc(inf), 9, "p");
  EXPECT_EQ(none.cues_shown(), 0u);
  auto all = run_session(standard_env(), standard_calibration(), human, &model, CuePolicy::pred_rc(-inf), 9, "p");
  EXPECT_EQ(all.cues_shown(), 60u);
  // Identical cue streams give identical sessions apart from logged decisions.
  auto sched = run_session(standard_env(), standard_calibration(), human, nullptr,
                           CuePolicy::scheduled(std::vector<bool>(60, true)), 9, "p");
  for (std::size_t i = 0; i < 60; ++i) {
    auto x = all.steps[i];
    x.decision.reset();
    EXPECT_TRUE(x == sched.steps[i]);
  }
}

TEST(RunSession, CueBlindHumanIgnoresCues) {
  const auto model = cue_sensitive_model();
  sim::SimHumanPolicy blind;
  blind.w_cue = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto cued = run_session(standard_env(), standard_calibration(), blind, &model, CuePolicy::pred_rc(0.0), seed, "p");
    auto masked = run_session(standard_env(), standard_calibration(), blind, nullptr,
                              CuePolicy::scheduled(std::vector<bool>(60, false)), seed, "p");
    for (std::size_t i = 0; i < 60; ++i) {
      EXPECT_EQ(cued.steps[i].d, masked.steps[i].d);
      EXPECT_EQ(cued.steps[i].y, masked.steps[i].y);
    }
  }
}

TEST(RunSession, CueCountNonIncreasingInThreshold) {
  const auto model = cue_sensitive_model();
  const auto ds = data::generate_dataset(standard_env(), standard_calibration(), {}, 6, 4);
  const auto improvements = cue_improvements(ds, model);
  std::size_t prev = improvements.size() + 1;
  for (double thr = -1.0; thr <= 1.0; thr += 0.01) {
    std::size_t n = 0;
    for (double d : improvements) n += decide_cue(0.0, d, thr);
    EXPECT_LE(n, prev);
    prev = n;
  }
}

TEST(Replay, ReproducesLoggedSession) {
  const auto model = cue_sensitive_model();
  const auto policy = CuePolicy::pred_rc(0.05);
  auto log = run_session(standard_env(), standard_calibration(), sim::SimHumanPolicy{}, &model, policy, 21, "r");
  const auto summary = replay_session(standard_env(), standard_calibration(), &model, policy, log);
  EXPECT_EQ(summary.cues_shown, log.cues_shown());
  auto tampered = log;
  tampered.steps[10].decision->r_with += 1e-9;
  EXPECT_THROW(replay_session(standard_env(), standard_calibration(), &model, policy, tampered), Error);
  auto other = log;
  other.generator_seed += 1;
  EXPECT_THROW(replay_session(standard_env(), standard_calibration(), &model, policy, other), Error);
}

TEST(ExactSchedule, CountAndUniformity) {
  for (std::size_t n : {0u, 12u, 60u}) {
    auto s = exact_schedule(n, Rng(n));
    EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), true)), n);
  }
  std::vector<int> hits(60, 0);
  for (int i = 0; i < 2000; ++i) {
    auto s = exact_schedule(12, Rng(1000 + i));
    for (int j = 0; j < 60; ++j) hits[j] += s[j];
  }
  for (int h : hits) EXPECT_NEAR(h / 2000.0, 0.2, 0.05);
}

}  // namespace
}  // namespace predrc::calib
