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

#include "sim/human.hpp"

#include <cmath>

#include "common/error.hpp"

namespace predrc::sim {

BeliefState BeliefState::from_prior(std::size_t num_clusters, BetaParams prior) {
  require(prior.alpha > 0.0 && prior.beta > 0.0, "Beta prior parameters must be positive");
  return BeliefState{std::vector<BetaParams>(num_clusters, prior)};
}

void SimHumanPolicy::validate() const {
  require(std::isfinite(w0) && std::isfinite(w_belief) && std::isfinite(w_cue),
          "policy weights must be finite");
  require(own_skill >= 0.0 && own_skill <= 1.0, "own_skill outside [0,1]");
  require(prior.alpha > 0.0 && prior.beta > 0.0, "Beta prior parameters must be positive");
}

double reliance_prob(const SimHumanPolicy& policy, const BeliefState& belief,
                     std::size_t cluster, std::optional<double> cue) {
  require(cluster < belief.clusters.size(), "cluster outside belief state");
  double logit = policy.w0 + policy.w_belief * (belief.clusters[cluster].mean() - 0.5);
  if (cue) logit += policy.w_cue * (*cue - 0.5);
  return 1.0 / (1.0 + std::exp(-logit));
}

BeliefState update_belief(BeliefState belief, const Observation& obs) {
  require(obs.cluster < belief.clusters.size(), "observation cluster outside belief state");
  auto& b = belief.clusters[obs.cluster];
  (obs.ai_correct ? b.alpha : b.beta) += 1.0;
  return belief;
}

model::Agent sample_decision(Rng& rng, double prob) {
  require(prob >= 0.0 && prob <= 1.0, "decision probability outside [0,1]");
  return rng.bernoulli(prob) ? model::Agent::kAi : model::Agent::kHuman;
}

std::string human_answer(const env::TaskInstance& task, const SimHumanPolicy& policy, Rng& rng) {
  std::string out = task.y_star;
  for (char& ch : out) {
    if (!rng.bernoulli(policy.own_skill)) ch = env::kAlphabet[rng.below(env::kAlphabetSize)];
  }
  return out;
}

BeliefState belief_after(const SimHumanPolicy& policy, std::size_t num_clusters,
                         std::span<const ExperienceStep> history) {
  BeliefState belief = BeliefState::from_prior(num_clusters, policy.prior);
  for (const auto& s : history)
    if (s.d == model::Agent::kAi) belief = update_belief(std::move(belief), {s.cluster, s.ai_correct});
  return belief;
}

model::ReliancePair oracle_reliance(const SimHumanPolicy& policy, std::size_t num_clusters,
                                    std::span<const ExperienceStep> history, std::size_t cluster,
                                    double c_hat) {
  const BeliefState belief = belief_after(policy, num_clusters, history);
  return {reliance_prob(policy, belief, cluster, c_hat),
          reliance_prob(policy, belief, cluster, std::nullopt)};
}

SimHuman::SimHuman(SimHumanPolicy policy, std::size_t num_clusters)
    : policy_(policy), belief_(BeliefState::from_prior(num_clusters, policy.prior)) {
  policy_.validate();
}

void SimHuman::experience(std::size_t cluster, model::Agent d, bool ai_correct) {
  if (d == model::Agent::kAi) belief_ = update_belief(std::move(belief_), {cluster, ai_correct});
}

void PopulationConfig::validate() const {
  for (const Range& r : {w0, w_belief, w_cue})
    require(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi, "population range invalid");
  require(own_skill >= 0.0 && own_skill <= 1.0, "own_skill outside [0,1]");
  require(prior.alpha > 0.0 && prior.beta > 0.0, "Beta prior parameters must be positive");
}

SimHumanPolicy PopulationConfig::sample(Rng rng) const {
  SimHumanPolicy p;
  p.w0 = w0.sample(rng);
  p.w_belief = w_belief.sample(rng);
  p.w_cue = w_cue.sample(rng);
  p.own_skill = own_skill;
  p.prior = prior;
  return p;
}

}  // namespace predrc::sim
