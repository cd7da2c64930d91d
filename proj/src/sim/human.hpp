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
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "common/rng.hpp"
#include "env/task_env.hpp"
#include "model/step_input.hpp"

namespace predrc::sim {

struct BetaParams {
  double alpha = 1.0;
  double beta = 1.0;
  double mean() const { return alpha / (alpha + beta); }
};

// Per-cluster belief about how often the AI succeeds.
struct BeliefState {
  std::vector<BetaParams> clusters;

  static BeliefState from_prior(std::size_t num_clusters, BetaParams prior);
};

// Logistic reliance policy:
//   logit = w0 + w_belief * (belief mean - 0.5) + w_cue * (c_hat - 0.5)
// where the cue term is present only when the cue is shown.
struct SimHumanPolicy {
  double w0 = 0.0;
  double w_belief = 8.0;
  double w_cue = 8.0;
  // Per-character accuracy of the human's own answers. A wrong character is
  // drawn uniformly from the whole alphabet, so the five-character match
  // rate is (s + (1 - s) / 36)^5, which is 0.844 at this value.
  double own_skill = 0.9657;
  BetaParams prior;

  void validate() const;
};

// An AI outcome the human sees. Only produced for steps assigned to the AI.
struct Observation {
  std::size_t cluster = 0;
  bool ai_correct = false;
};

double reliance_prob(const SimHumanPolicy& policy, const BeliefState& belief,
                     std::size_t cluster, std::optional<double> cue);

BeliefState update_belief(BeliefState belief, const Observation& obs);

model::Agent sample_decision(Rng& rng, double prob);

std::string human_answer(const env::TaskInstance& task, const SimHumanPolicy& policy, Rng& rng);

// What the human experienced at one completed step.
struct ExperienceStep {
  std::size_t cluster = 0;
  model::Agent d = model::Agent::kHuman;
  bool ai_correct = false;
};

BeliefState belief_after(const SimHumanPolicy& policy, std::size_t num_clusters,
                         std::span<const ExperienceStep> history);

// Exact reliance probabilities for the next step with the cue shown and hidden.
model::ReliancePair oracle_reliance(const SimHumanPolicy& policy, std::size_t num_clusters,
                                    std::span<const ExperienceStep> history, std::size_t cluster,
                                    double c_hat);

// One simulated participant: a fixed policy plus its evolving belief.
class SimHuman {
 public:
  SimHuman(SimHumanPolicy policy, std::size_t num_clusters);

  const SimHumanPolicy& policy() const { return policy_; }
  const BeliefState& belief() const { return belief_; }

  double reliance(std::size_t cluster, std::optional<double> cue) const {
    return reliance_prob(policy_, belief_, cluster, cue);
  }
  // Called after every step; the belief moves only when the AI answered.
  void experience(std::size_t cluster, model::Agent d, bool ai_correct);

 private:
  SimHumanPolicy policy_;
  BeliefState belief_;
};

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double sample(Rng& rng) const { return rng.uniform(lo, hi); }
};

// Participants draw their weights independently and uniformly from these
// ranges. The defaults describe people who start out doubting the AI and
// react strongly to a shown confidence rate.
struct PopulationConfig {
  Range w0{-2.5, -1.5};
  Range w_belief{8.0, 16.0};
  Range w_cue{12.0, 18.0};
  double own_skill = 0.9657;
  BetaParams prior;

  void validate() const;
  SimHumanPolicy sample(Rng rng) const;
};

}  // namespace predrc::sim
