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

#include "data/generate.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "calib/session.hpp"
#include "common/digest.hpp"
#include "common/error.hpp"

namespace predrc::data {
namespace {

std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string describe_world(const env::TaskEnv& env, const env::CalibrationModel& calib,
                           const sim::PopulationConfig& population) {
  std::string s;
  for (const auto& c : env.clusters())
    s += "cluster " + c.id + " " + real(c.ai_skill) + " " + real(c.mix_weight) + " " +
         std::to_string(c.style.background) + " " + real(c.style.distortion) + "\n";
  const auto& sg = env.surrogate();
  s += "surrogate " + real(sg.correct_peak.first) + " " + real(sg.correct_peak.second) + " " +
       real(sg.wrong_peak.first) + " " + real(sg.wrong_peak.second) + "\n";
  s += "calibration " + real(calib.a) + " " + real(calib.b) + "\n";
  s += "population " + real(population.w0.lo) + " " + real(population.w0.hi) + " " +
       real(population.w_belief.lo) + " " + real(population.w_belief.hi) + " " +
       real(population.w_cue.lo) + " " + real(population.w_cue.hi) + " " +
       real(population.own_skill) + " " + real(population.prior.alpha) + " " +
       real(population.prior.beta) + "\n";
  return s;
}

std::uint64_t participant_seed(std::uint64_t dataset_seed, std::size_t k) {
  return Rng(dataset_seed).split("participant").split(k).next_u64();
}

std::string participant_name(std::size_t k) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%04zu", k);
  return buf;
}

RelianceDataset generate_dataset(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                 const sim::PopulationConfig& population,
                                 std::size_t n_participants, std::uint64_t seed) {
  require(n_participants > 0 && n_participants % kStrata.size() == 0,
          "participant count must be a positive multiple of 6");
  population.validate();
  RelianceDataset ds;
  ds.provenance.seed = seed;
  ds.provenance.config_digest = hex64(fnv1a64(describe_world(env, calib, population)));
  for (std::size_t k = 0; k < n_participants; ++k) {
    const std::uint64_t s = participant_seed(seed, k);
    const calib::SessionStreams streams(s);
    const int stratum = kStrata[k % kStrata.size()];
    const std::size_t cues = static_cast<std::size_t>(stratum) * kSessionLength / 100;
    const auto policy = calib::CuePolicy::scheduled(calib::exact_schedule(cues, streams.schedule()));
    ds.sessions.push_back(calib::run_session(env, calib, population.sample(streams.participant()),
                                             nullptr, policy, s, participant_name(k), stratum));
  }
  return ds;
}

std::vector<std::vector<std::string>> stratified_kfold(const RelianceDataset& dataset, std::size_t k,
                                                       std::uint64_t seed) {
  require(k >= 2, "k-fold needs k >= 2");
  require(dataset.sessions.size() >= k, "fewer participants than folds");
  std::map<int, std::vector<std::string>> by_stratum;
  std::set<std::string> seen;
  for (const auto& s : dataset.sessions) {
    require(seen.insert(s.participant_id).second, "duplicate participant_id '" + s.participant_id + "'");
    by_stratum[s.rcc_rate_stratum.value_or(-1)].push_back(s.participant_id);
  }
  std::vector<std::vector<std::string>> folds(k);
  std::size_t next = 0;
  Rng root = Rng(seed).split("kfold");
  for (auto& [stratum, ids] : by_stratum) {
    std::sort(ids.begin(), ids.end());
    Rng rng = root.split(static_cast<std::uint64_t>(stratum + 1));
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    for (const auto& id : ids) {
      folds[next].push_back(id);
      next = (next + 1) % k;
    }
  }
  return folds;
}

std::pair<RelianceDataset, RelianceDataset> split_fold(
    const RelianceDataset& dataset, const std::vector<std::vector<std::string>>& folds,
    std::size_t fold) {
  require(fold < folds.size(), "fold index out of range");
  const std::set<std::string> held(folds[fold].begin(), folds[fold].end());
  RelianceDataset train{dataset.provenance, {}}, holdout{dataset.provenance, {}};
  for (const auto& s : dataset.sessions) (held.count(s.participant_id) ? holdout : train).sessions.push_back(s);
  return {std::move(train), std::move(holdout)};
}

}  // namespace predrc::data
