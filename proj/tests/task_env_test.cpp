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
#include <map>

#include "env/task_env.hpp"
#include "common/error.hpp"
#include "gtest/gtest.h"

namespace predrc::env {
namespace {

CharDistributions point_masses(const std::string& s) {
  CharDistributions d{};
  for (std::size_t j = 0; j < kAnswerLength; ++j) {
    d[j].fill(0.0);
    d[j][char_index(s[j])] = 1.0;
  }
  return d;
}

CharDistributions random_dists(Rng& rng) {
  CharDistributions d{};
  for (auto& row : d) {
    double sum = 0;
    for (double& p : row) sum += (p = rng.uniform());
    for (double& p : row) p /= sum;
  }
  return d;
}

TEST(SampleTask, SingleClusterAndWeights) {
  TaskEnv one({{"only", 0.5, {}, 1.0}});
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(one.sample_task(rng).cluster, 0u);

  TaskEnv two({{"a", 0.5, {}, 0.5}, {"b", 0.5, {}, 0.5}});
  std::size_t count_a = 0;
  for (int i = 0; i < 10000; ++i) count_a += two.sample_task(rng).cluster == 0;
  EXPECT_NEAR(count_a / 10000.0, 0.5, 0.02);
}

TEST(SampleTask, ShapeAndDeterminism) {
  auto env = TaskEnv::standard();
  EXPECT_EQ(env.x_dim(), 8u);
  Rng a(5), b(5);
  for (int i = 0; i < 50; ++i) {
    TaskInstance t = env.sample_task(a), u = env.sample_task(b);
    EXPECT_EQ(t.y_star, u.y_star);
    EXPECT_EQ(t.x, u.x);
    ASSERT_EQ(t.y_star.size(), kAnswerLength);
    for (char ch : t.y_star) EXPECT_NE(kAlphabet.find(ch), std::string_view::npos);
    EXPECT_EQ(t.x[t.cluster], 1.0);
    double onehot = 0;
    for (std::size_t k = 0; k < 4; ++k) onehot += t.x[k];
    EXPECT_EQ(onehot, 1.0);
  }
}

TEST(TaskEnv, RejectsInvalidClusters) {
  EXPECT_THROW(TaskEnv({}), Error);
  EXPECT_THROW(TaskEnv({{"a", 1.5, {}, 1.0}}), Error);
  EXPECT_THROW(TaskEnv({{"a", 0.5, {}, 0.4}, {"b", 0.5, {}, 0.4}}), Error);
}

TEST(TaskAi, SkillExtremes) {
  Rng rng(2);
  TaskEnv perfect({{"a", 1.0, {}, 1.0}});
  for (int i = 0; i < 200; ++i) {
    auto t = perfect.sample_task(rng);
    auto d = perfect.task_ai_infer(t, rng);
    validate(d);
    EXPECT_EQ(ai_answer(d), t.y_star);
  }
  SurrogateConfig flat;
  flat.wrong_peak = {0.0, 0.0};
  TaskEnv blind({{"a", 0.0, {}, 1.0}}, flat);
  auto t = blind.sample_task(rng);
  auto d = blind.task_ai_infer(t, rng);
  for (const auto& row : d) EXPECT_NEAR(*std::max_element(row.begin(), row.end()), 1.0 / 36, 1e-15);
}

TEST(TaskAi, ExactMatchMatchesClosedForm) {
  // Exact match happens iff every position is right: probability skill^5.
  Rng rng(3);
  for (double skill : {0.9, 0.6}) {
    TaskEnv env({{"a", skill, {}, 1.0}});
    const int n = 20000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
      auto t = env.sample_task(rng);
      hits += ai_answer(env.task_ai_infer(t, rng)) == t.y_star;
    }
    const double expect = std::pow(skill, 5);
    EXPECT_NEAR(hits / double(n), expect, 2 * std::sqrt(expect * (1 - expect) / n) + 1e-3);
  }
}

TEST(TaskAi, ClusterAccuracyOrdering) {
  auto env = TaskEnv::standard();
  Rng rng(4);
  std::map<std::size_t, std::pair<int, int>> acc;
  for (int i = 0; i < 20000; ++i) {
    auto t = env.sample_task(rng);
    auto& [hit, total] = acc[t.cluster];
    hit += ai_answer(env.task_ai_infer(t, rng)) == t.y_star;
    ++total;
  }
  auto rate = [&](std::size_t k) { return acc[k].first / double(acc[k].second); };
  EXPECT_GT(rate(0), rate(1));
  EXPECT_GT(rate(1), rate(2) + 0.3);
  EXPECT_LT(rate(2), 0.01);
  EXPECT_LT(rate(3), 0.01);
}

TEST(AiAnswer, ExamplesAndTieBreak) {
  EXPECT_EQ(ai_answer(point_masses("a1b2c")), "a1b2c");
  CharDistributions tie = point_masses("00000");
  tie[2].fill(0.0);
  tie[2][char_index('0')] = 0.5;
  tie[2][char_index('z')] = 0.5;
  EXPECT_EQ(ai_answer(tie)[2], '0');
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    auto d = random_dists(rng);
    std::string brute;
    for (const auto& row : d) {
      std::size_t best = 0;
      for (std::size_t k = 1; k < kAlphabetSize; ++k)
        if (row[k] > row[best]) best = k;
      brute.push_back(kAlphabet[best]);
    }
    EXPECT_EQ(ai_answer(d), brute);
  }
}

TEST(ConfidenceRate, Examples) {
  EXPECT_EQ(confidence_rate(point_masses("zzzzz")), 1.0);
  CharDistributions uniform{};
  for (auto& row : uniform) row.fill(1.0 / 36);
  EXPECT_NEAR(confidence_rate(uniform), 1.6538e-8, 1e-12);
  EXPECT_NEAR(confidence_rate(uniform), std::pow(36.0, -5), 1e-20);
  CharDistributions d{};
  const double maxes[] = {0.9, 0.8, 0.7, 0.6, 0.5};
  for (std::size_t j = 0; j < 5; ++j) {
    d[j].fill((1 - maxes[j]) / 35);
    d[j][j] = maxes[j];
  }
  EXPECT_NEAR(confidence_rate(d), 0.1512, 1e-12);
}

TEST(ConfidenceRate, RangeAndMonotonicity) {
  Rng rng(6);
  const double floor = std::pow(36.0, -5);
  for (int i = 0; i < 200; ++i) {
    auto d = random_dists(rng);
    const double c = confidence_rate(d);
    EXPECT_GE(c, floor * (1 - 1e-12));
    EXPECT_LE(c, 1.0);
    // Sharpen one position's maximum.
    auto e = d;
    auto& row = e[rng.below(5)];
    const std::size_t top = std::max_element(row.begin(), row.end()) - row.begin();
    for (double& p : row) p *= 0.5;
    row[top] += 0.5;
    EXPECT_GE(confidence_rate(e), c);
  }
}

double log_lik(const std::vector<std::pair<double, bool>>& data, double a, double b) {
  double ll = 0;
  for (auto [c, y] : data) {
    const double p = 1 / (1 + std::exp(-(a * c + b)));
    ll += y ? std::log(p) : std::log(1 - p);
  }
  return ll;
}

TEST(FitCalibration, NoSignalAndErrors) {
  std::vector<std::pair<double, bool>> flat;
  for (int i = 0; i < 200; ++i) flat.emplace_back((i % 10) / 10.0, (i / 10) % 2 == 0);
  auto m = fit_calibration(flat);
  EXPECT_NEAR(m.a, 0.0, 1e-6);
  EXPECT_NEAR(success_probability(m, 0.3), 0.5, 1e-6);

  std::vector<std::pair<double, bool>> one_class = {{0.1, true}, {0.5, true}};
  EXPECT_THROW(fit_calibration(one_class), Error);
  std::vector<std::pair<double, bool>> separated = {{0.1, false}, {0.2, false}, {0.8, true}};
  EXPECT_THROW(fit_calibration(separated), Error);
  EXPECT_THROW(fit_calibration(std::vector<std::pair<double, bool>>{{0.5, true}}), Error);
}

TEST(FitCalibration, BeatsCoarseGridAndIsPositive) {
  Rng rng(7);
  std::vector<std::pair<double, bool>> data;
  for (int i = 0; i < 400; ++i) {
    const double c = rng.uniform();
    data.emplace_back(c, rng.bernoulli(0.2 + 0.6 * c));
  }
  auto m = fit_calibration(data);
  EXPECT_GT(m.a, 0.0);
  const double fitted = log_lik(data, m.a, m.b);
  double best_grid = -INFINITY, grid_a = 0;
  for (double a = -10; a <= 10; a += 0.25)
    for (double b = -10; b <= 10; b += 0.25) {
      const double ll = log_lik(data, a, b);
      if (ll > best_grid) {
        best_grid = ll;
        grid_a = a;
      }
    }
  EXPECT_GT(grid_a, 0.0);
  EXPECT_GE(fitted, best_grid - 1e-9);
}

TEST(FitCalibration, RecoversKnownParameters) {
  Rng rng(8);
  std::vector<std::pair<double, bool>> data;
  for (int i = 0; i < 5000; ++i) {
    const double c = rng.uniform();
    data.emplace_back(c, rng.bernoulli(1 / (1 + std::exp(-(4 * c - 2)))));
  }
  auto m = fit_calibration(data);
  EXPECT_NEAR(m.a, 4.0, 0.5);
  EXPECT_NEAR(m.b, -2.0, 0.5);
}

TEST(SuccessProbability, Examples) {
  EXPECT_EQ(success_probability({0, 0}, 0.77), 0.5);
  EXPECT_EQ(success_probability({4, -2}, 0.5), 0.5);
  double prev = 0;
  for (double c = 0; c <= 1.0; c += 0.05) {
    const double p = success_probability({4, -2}, c);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(Calibration, StandardEnvironmentIsOrderPreserving) {
  auto env = TaskEnv::standard();
  auto m = fit_calibration(env.calibration_pairs(4000, Rng(9)));
  EXPECT_GT(m.a, 0.0);
}

}  // namespace
}  // namespace predrc::env
