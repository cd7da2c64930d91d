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

#include <set>

#include "data/generate.hpp"
#include "data/records.hpp"
#include "common/error.hpp"
#include "gtest/gtest.h"
#include "test_world.hpp"

namespace predrc::data {
namespace {

using testing::standard_calibration;
using testing::standard_env;

const RelianceDataset& small_dataset() {
  static const RelianceDataset ds = generate_dataset(standard_env(), standard_calibration(), {}, 12, 5);
  return ds;
}

TEST(GenerateDataset, ExactStrata) {
  auto ds = generate_dataset(standard_env(), standard_calibration(), {}, 6, 1);
  ASSERT_EQ(ds.sessions.size(), 6u);
  std::multiset<std::size_t> counts;
  for (const auto& s : ds.sessions) {
    EXPECT_EQ(s.steps.size(), kSessionLength);
    ASSERT_TRUE(s.rcc_rate_stratum.has_value());
    EXPECT_EQ(s.cues_shown(), static_cast<std::size_t>(*s.rcc_rate_stratum) * 60 / 100);
    counts.insert(s.cues_shown());
  }
  EXPECT_EQ(counts, (std::multiset<std::size_t>{0, 12, 24, 36, 48, 60}));
  EXPECT_NO_THROW(ds.validate());
  EXPECT_THROW(generate_dataset(standard_env(), standard_calibration(), {}, 7, 1), Error);
}

TEST(GenerateDataset, DeterministicBytes) {
  const auto a = to_jsonl(generate_dataset(standard_env(), standard_calibration(), {}, 6, 42));
  const auto b = to_jsonl(generate_dataset(standard_env(), standard_calibration(), {}, 6, 42));
  const auto c = to_jsonl(generate_dataset(standard_env(), standard_calibration(), {}, 6, 43));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(GenerateDataset, StepInvariantsHold) {
  for (const auto& s : small_dataset().sessions)
    for (const auto& r : s.steps) {
      EXPECT_EQ(r.c.has_value(), r.cue_provided);
      if (r.d == model::Agent::kAi) {
        EXPECT_EQ(r.y, r.ai_answer);
        EXPECT_EQ(r.f, model::Feedback::kAiAnswered);
      } else {
        EXPECT_EQ(r.f == model::Feedback::kHumanMatched, r.y == r.ai_answer);
      }
      EXPECT_EQ(r.ai_correct, r.ai_answer == r.y_star);
      EXPECT_FALSE(r.decision.has_value());
    }
}

TEST(Jsonl, RoundTrip) {
  const auto& ds = small_dataset();
  const std::string text = to_jsonl(ds);
  const auto back = from_jsonl(text);
  EXPECT_TRUE(back == ds);
  EXPECT_EQ(to_jsonl(back), text);
  EXPECT_EQ(text.substr(0, 17), "{\"config_digest\":");
}

TEST(Jsonl, HeaderAndFieldNames) {
  const std::string text = to_jsonl(small_dataset());
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_NE(header.find("\"schema\":\"rcd/1\""), std::string::npos);
  EXPECT_NE(header.find("\"seed\":5"), std::string::npos);
  for (const char* field : {"participant_id", "step_index", "cluster_id", "\"x\"", "y_star", "ai_answer",
                            "c_hat", "cue_provided", "\"c\"", "\"p\"", "\"d\"", "\"y\"", "\"f\"",
                            "ai_correct", "human_correct"})
    EXPECT_NE(text.find(field), std::string::npos) << field;
}

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

TEST(Jsonl, ErrorsNameTheProblem) {
  const std::string text = to_jsonl(generate_dataset(standard_env(), standard_calibration(), {}, 6, 1));
  try {
    from_jsonl(replace_once(text, "\"ai_correct\":", "\"ai_correctness\":"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'ai_correct'"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    from_jsonl(replace_once(text, "\"schema\":\"rcd/1\"", "\"schema\":\"rcd/2\""));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("schema"), std::string::npos);
  }
  // A recorded cue value on an uncued step breaks the c/cue_provided rule.
  const auto pos = text.find("\"c\":null");
  ASSERT_NE(pos, std::string::npos);
  std::string bad = text;
  bad.replace(pos, 8, "\"c\":0.5");
  EXPECT_THROW(from_jsonl(bad), Error);
  EXPECT_THROW(from_jsonl(text.substr(0, text.size() / 2)), Error);
  std::string garbage = text;
  garbage.insert(garbage.find('\n') + 1, "{not json\n");
  try {
    from_jsonl(garbage);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(Jsonl, FeedbackIsRecomputedOnRead) {
  const std::string text = to_jsonl(generate_dataset(standard_env(), standard_calibration(), {}, 6, 2));
  const auto pos = text.find("\"f\":0");
  ASSERT_NE(pos, std::string::npos);
  std::string bad = text;
  bad.replace(pos, 5, "\"f\":2");
  EXPECT_THROW(from_jsonl(bad), Error);
}

TEST(StratifiedKfold, OnePerStratumAtSixtyTen) {
  const auto ds = generate_dataset(standard_env(), standard_calibration(), {}, 60, 3);
  const auto folds = stratified_kfold(ds, 10, 7);
  ASSERT_EQ(folds.size(), 10u);
  std::map<std::string, int> stratum;
  for (const auto& s : ds.sessions) stratum[s.participant_id] = *s.rcc_rate_stratum;
  std::set<std::string> all;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 6u);
    std::set<int> strata;
    for (const auto& id : f) {
      strata.insert(stratum[id]);
      EXPECT_TRUE(all.insert(id).second) << "participant in two folds";
    }
    EXPECT_EQ(strata.size(), 6u);
  }
  EXPECT_EQ(all.size(), 60u);
  EXPECT_EQ(stratified_kfold(ds, 10, 7), folds);

  auto shuffled = ds;
  std::reverse(shuffled.sessions.begin(), shuffled.sessions.end());
  EXPECT_EQ(stratified_kfold(shuffled, 10, 7), folds);
  EXPECT_THROW(stratified_kfold(small_dataset(), 20, 1), Error);
}

TEST(StratifiedKfold, SplitFoldPartitions) {
  const auto& ds = small_dataset();
  const auto folds = stratified_kfold(ds, 3, 1);
  for (std::size_t f = 0; f < 3; ++f) {
    auto [train, hold] = split_fold(ds, folds, f);
    EXPECT_EQ(train.sessions.size() + hold.sessions.size(), ds.sessions.size());
    EXPECT_EQ(hold.sessions.size(), folds[f].size());
  }
}

}  // namespace
}  // namespace predrc::data
