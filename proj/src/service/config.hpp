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
#include <vector>

#include "env/task_env.hpp"
#include "model/config.hpp"
#include "sim/human.hpp"
#include "train/trainer.hpp"

namespace predrc::service {

inline constexpr std::string_view kConfigSchema = "predrc-config/1";
inline constexpr const char* kConfigEnvVar = "PREDRC_CONFIG";

struct CalibrationSettings {
  std::size_t samples = 20000;
  std::uint64_t seed = 7;
};

struct Paths {
  std::string dataset = "data/reliance.rcd.jsonl";
  std::string checkpoints = "checkpoints";
  std::string reports = "reports";
  std::string session_logs = "session_logs";
};

struct ServiceSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  double session_ttl_seconds = 1800.0;
};

// Every key is optional; a missing key keeps the default below. Unknown keys
// are rejected so that typos do not silently fall back to defaults.
struct EngineConfig {
  std::vector<env::ClusterSpec> clusters = env::TaskEnv::standard().clusters();
  env::SurrogateConfig surrogate;
  CalibrationSettings calibration;
  sim::PopulationConfig population;
  model::ModelConfig model;  // x_dim follows the cluster count
  train::TrainConfig train;
  std::vector<double> threshold_targets = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  Paths paths;
  ServiceSettings service;

  static EngineConfig from_json(const std::string& text);
  static EngineConfig load(const std::string& path);
  // Path given explicitly, else $PREDRC_CONFIG, else built-in defaults.
  static EngineConfig resolve(const std::string& path);

  std::string to_json() const;
  std::string digest() const;
  void validate() const;
};

// Environment and calibration derived from a configuration.
struct World {
  env::TaskEnv env;
  env::CalibrationModel calib;

  static World build(const EngineConfig& config);
};

}  // namespace predrc::service
