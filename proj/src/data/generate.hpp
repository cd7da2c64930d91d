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
#include <string>
#include <utility>
#include <vector>

#include "data/records.hpp"
#include "env/task_env.hpp"
#include "sim/human.hpp"

namespace predrc::data {

// Canonical description of everything that shapes generated data; its
// digest goes into dataset headers.
std::string describe_world(const env::TaskEnv& env, const env::CalibrationModel& calib,
                           const sim::PopulationConfig& population);

// Seed of participant k's session under a dataset seed.
std::uint64_t participant_seed(std::uint64_t dataset_seed, std::size_t k);
std::string participant_name(std::size_t k);

// n_participants must be a multiple of 6; participant k gets stratum
// kStrata[k % 6] and exactly that share of its 60 steps cued, placed
// uniformly at random.
RelianceDataset generate_dataset(const env::TaskEnv& env, const env::CalibrationModel& calib,
                                 const sim::PopulationConfig& population,
                                 std::size_t n_participants, std::uint64_t seed);

// Participant ids per fold. Within each stratum participants are shuffled
// (from an order-independent starting point) and dealt round-robin.
std::vector<std::vector<std::string>> stratified_kfold(const RelianceDataset& dataset, std::size_t k,
                                                       std::uint64_t seed);

// (train, holdout) for one fold.
std::pair<RelianceDataset, RelianceDataset> split_fold(
    const RelianceDataset& dataset, const std::vector<std::vector<std::string>>& folds,
    std::size_t fold);

}  // namespace predrc::data
