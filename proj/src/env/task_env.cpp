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

#include "env/task_env.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "common/error.hpp"

namespace predrc::env {
namespace {

double log_likelihood(std::span<const std::pair<double, bool>> pairs, double a, double b) {
  double ll = 0.0;
  for (const auto& [c, y] : pairs) {
    const double z = a * c + b;
    // log sigmoid(z) and log(1 - sigmoid(z)) without overflow
    const double log1pexp = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    ll += y ? z - log1pexp : -log1pexp;
  }
  return ll;
}

}  // namespace

TaskEnv::TaskEnv(std::vector<ClusterSpec> clusters, SurrogateConfig surrogate)
    : clusters_(std::move(clusters)), surrogate_(surrogate) {
  require(!clusters_.empty(), "task environment needs at least one cluster");
  double total = 0.0;
  for (const auto& c : clusters_) {
    require(c.ai_skill >= 0.0 && c.ai_skill <= 1.0, "cluster '" + c.id + "' ai_skill outside [0,1]");
    require(c.mix_weight >= 0.0 && std::isfinite(c.mix_weight),
            "cluster '" + c.id + "' has invalid mix_weight");
    total += c.mix_weight;
  }
  require(std::abs(total - 1.0) <= 1e-9, "cluster mix weights must sum to 1");
  for (const auto& [lo, hi] : {surrogate_.correct_peak, surrogate_.wrong_peak})
    require(lo >= 0.0 && lo <= hi && hi <= 1.0, "surrogate peak range must satisfy 0<=lo<=hi<=1");
}

TaskEnv TaskEnv::standard() {
  return TaskEnv({
      {"A", 0.98, {0, 0.2}, 0.3},
      {"B", 0.90, {1, 0.4}, 0.3875},
      {"C", 0.20, {2, 0.6}, 0.15625},
      {"D", 0.15, {3, 0.8}, 0.15625},
  });
}

TaskInstance TaskEnv::sample_task(Rng& rng) const {
  TaskInstance t;
  double u = rng.uniform();
  t.cluster = clusters_.size() - 1;
  for (std::size_t k = 0; k < clusters_.size(); ++k) {
    if (u < clusters_[k].mix_weight) {
      t.cluster = k;
      break;
    }
    u -= clusters_[k].mix_weight;
  }
  t.x.assign(x_dim(), 0.0);
  t.x[t.cluster] = 1.0;
  for (std::size_t j = 0; j < kStyleDims; ++j) t.x[clusters_.size() + j] = rng.normal();
  for (std::size_t j = 0; j < kAnswerLength; ++j) t.y_star.push_back(kAlphabet[rng.below(kAlphabetSize)]);
  return t;
}

CharDistributions TaskEnv::task_ai_infer(const TaskInstance& task, Rng& rng) const {
  require(task.cluster < clusters_.size(), "task cluster out of range");
  require(task.y_star.size() == kAnswerLength, "task answer must have five characters");
  const double skill = clusters_[task.cluster].ai_skill;
  CharDistributions out;
  for (std::size_t j = 0; j < kAnswerLength; ++j) {
    const std::size_t truth = char_index(task.y_star[j]);
    const bool right = rng.bernoulli(skill);
    std::size_t pred = truth;
    if (!right) {
      pred = rng.below(kAlphabetSize - 1);
      if (pred >= truth) ++pred;
    }
    const auto [lo, hi] = right ? surrogate_.correct_peak : surrogate_.wrong_peak;
    const double peak = rng.uniform(lo, hi);
    out[j].fill((1.0 - peak) / kAlphabetSize);
    out[j][pred] += peak;
  }
  return out;
}

std::vector<std::pair<double, bool>> TaskEnv::calibration_pairs(std::size_t n, Rng rng) const {
  std::vector<std::pair<double, bool>> pairs;
  pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng task_rng = rng.split("task").split(i);
    Rng ai_rng = rng.split("ai").split(i);
    const TaskInstance task = sample_task(task_rng);
    const CharDistributions d = task_ai_infer(task, ai_rng);
    pairs.emplace_back(confidence_rate(d), ai_answer(d) == task.y_star);
  }
  return pairs;
}

std::size_t char_index(char c) {
  const auto pos = kAlphabet.find(c);
  require(pos != std::string_view::npos, std::string("character '") + c + "' not in alphabet");
  return pos;
}

void validate(const CharDistributions& dists) {
  for (const auto& d : dists) {
    double sum = 0.0;
    for (double p : d) {
      require(p >= 0.0 && std::isfinite(p), "character distribution has a negative entry");
      sum += p;
    }
    require(std::abs(sum - 1.0) <= 1e-9, "character distribution does not sum to 1");
  }
}

std::string ai_answer(const CharDistributions& dists) {
  std::string out;
  for (const auto& d : dists) {
    // max_element keeps the first maximum, i.e. the lowest alphabet index.
    out.push_back(kAlphabet[std::max_element(d.begin(), d.end()) - d.begin()]);
  }
  return out;
}

double confidence_rate(const CharDistributions& dists) {
  double c = 1.0;
  for (const auto& d : dists) c *= *std::max_element(d.begin(), d.end());
  return std::clamp(c, 0.0, 1.0);
}

CalibrationModel fit_calibration(std::span<const std::pair<double, bool>> pairs) {
  require(pairs.size() >= 2, "calibration needs at least two pairs");
  std::size_t positives = 0;
  for (const auto& [c, y] : pairs) {
    require(std::isfinite(c), "calibration confidence is not finite");
    positives += y;
  }
  if (positives == 0 || positives == pairs.size())
    fail(ErrorCode::kNumeric, "calibration data has a single class (perfect separation)");

  // Complete separation by confidence has no finite maximizer.
  double max_neg = -INFINITY, min_pos = INFINITY, max_pos = -INFINITY, min_neg = INFINITY;
  for (const auto& [c, y] : pairs) {
    if (y) {
      min_pos = std::min(min_pos, c);
      max_pos = std::max(max_pos, c);
    } else {
      max_neg = std::max(max_neg, c);
      min_neg = std::min(min_neg, c);
    }
  }
  if (max_neg < min_pos || max_pos < min_neg)
    fail(ErrorCode::kNumeric, "calibration data is perfectly separated by confidence");

  constexpr int kMaxIterations = 100;
  constexpr double kTolerance = 1e-8;
  double a = 0.0;
  double b = std::log(static_cast<double>(positives) / static_cast<double>(pairs.size() - positives));
  double ll = log_likelihood(pairs, a, b);
  for (int it = 0; it < kMaxIterations; ++it) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (const auto& [c, y] : pairs) {
      const double p = 1.0 / (1.0 + std::exp(-(a * c + b)));
      const double r = (y ? 1.0 : 0.0) - p;
      const double w = p * (1.0 - p);
      ga += r * c;
      gb += r;
      haa += w * c * c;
      hab += w * c;
      hbb += w;
    }
    const double det = haa * hbb - hab * hab;
    if (!(det > 0.0)) fail(ErrorCode::kNumeric, "calibration Hessian is singular");
    double da = (hbb * ga - hab * gb) / det;
    double db = (haa * gb - hab * ga) / det;
    double step = 1.0;
    double next = log_likelihood(pairs, a + da, b + db);
    while (next < ll && step > 1e-10) {
      step *= 0.5;
      next = log_likelihood(pairs, a + step * da, b + step * db);
    }
    a += step * da;
    b += step * db;
    ll = std::max(ll, next);
    if (std::max(std::abs(step * da), std::abs(step * db)) < kTolerance) break;
  }
  if (!std::isfinite(a) || !std::isfinite(b)) fail(ErrorCode::kNumeric, "calibration fit diverged");
  return {a, b};
}

double success_probability(const CalibrationModel& calib, double c_hat) {
  require(std::isfinite(calib.a) && std::isfinite(calib.b), "calibration model is not finite");
  return 1.0 / (1.0 + std::exp(-(calib.a * c_hat + calib.b)));
}

}  // namespace predrc::env
