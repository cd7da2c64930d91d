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
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "common/rng.hpp"

namespace predrc::env {

// Character set of task answers. The order is the published tie-break
// order: digits before lowercase letters.
inline constexpr std::string_view kAlphabet = "0123456789abcdefghijklmnopqrstuvwxyz";
inline constexpr std::size_t kAlphabetSize = 36;
inline constexpr std::size_t kAnswerLength = 5;
inline constexpr std::size_t kStyleDims = 4;

struct ClusterStyle {
  int background = 0;
  double distortion = 0.0;
};

struct ClusterSpec {
  std::string id;
  double ai_skill = 0.5;  // per-character probability the AI is right
  ClusterStyle style;
  double mix_weight = 1.0;
};

// Peak mass of the surrogate AI's per-character distribution, drawn
// uniformly from one range when the character is right and from another
// when it is wrong. The rest of the mass is spread evenly over the alphabet.
struct SurrogateConfig {
  std::pair<double, double> correct_peak{0.75, 1.0};
  std::pair<double, double> wrong_peak{0.1, 0.6};
};

struct TaskInstance {
  std::size_t cluster = 0;
  std::vector<double> x;
  std::string y_star;
};

using CharDistribution = std::array<double, kAlphabetSize>;
using CharDistributions = std::array<CharDistribution, kAnswerLength>;

struct CalibrationModel {
  double a = 0.0;
  double b = 0.0;
};

class TaskEnv {
 public:
  TaskEnv(std::vector<ClusterSpec> clusters, SurrogateConfig surrogate = {});

  // Four clusters with per-character skills 0.98, 0.90, 0.20 and 0.15, mixed
  // so that the overall five-character accuracy of the AI is 50%.
  static TaskEnv standard();

  const std::vector<ClusterSpec>& clusters() const { return clusters_; }
  const SurrogateConfig& surrogate() const { return surrogate_; }
  std::size_t x_dim() const { return clusters_.size() + kStyleDims; }

  TaskInstance sample_task(Rng& rng) const;
  CharDistributions task_ai_infer(const TaskInstance& task, Rng& rng) const;

  // (confidence, AI matched) pairs from n fresh tasks; the data a
  // calibration model is fitted on.
  std::vector<std::pair<double, bool>> calibration_pairs(std::size_t n, Rng rng) const;

 private:
  std::vector<ClusterSpec> clusters_;
  SurrogateConfig surrogate_;
};

std::size_t char_index(char c);
void validate(const CharDistributions& dists);

std::string ai_answer(const CharDistributions& dists);
double confidence_rate(const CharDistributions& dists);

// Maximum-likelihood logistic fit of matched ~ sigmoid(a * c + b) by Newton
// iterations with step halving.
CalibrationModel fit_calibration(std::span<const std::pair<double, bool>> pairs);
double success_probability(const CalibrationModel& calib, double c_hat);

}  // namespace predrc::env
