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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "data/records.hpp"
#include "model/config.hpp"
#include "model/params.hpp"
#include "model/trustformer.hpp"
#include "num/adam.hpp"

namespace predrc::train {

enum class Precision { kF32, kF64 };
enum class LrSchedule { kConstant, kCosine };

struct TrainConfig {
  std::size_t epochs = 30;
  // Sessions per minibatch; every session contributes all 60 of its steps.
  std::size_t batch_size = 1;
  num::AdamConfig adam{2e-4, 0.9, 0.999, 1e-8};
  // Cosine decays the rate from adam.lr towards zero over all updates.
  LrSchedule lr_schedule = LrSchedule::kConstant;
  // When positive, evaluation and checkpoints use an exponential moving
  // average of the weights with this decay per update.
  double ema_decay = 0.995;
  std::uint64_t seed = 1;
  Precision precision = Precision::kF32;
  std::size_t eval_every = 1;

  void validate() const;
  std::string to_text() const;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  std::optional<double> holdout_acc;
  std::optional<double> holdout_bce;

  bool operator==(const EpochMetrics&) const = default;
};

struct TrainResult {
  model::ModelParams<float> final_params;
  model::ModelParams<float> best_params;
  std::size_t best_epoch = 0;
  double best_acc = 0.0;
  std::vector<EpochMetrics> metrics;
};

// One example per step: history is the steps before it, the step itself
// carries its recorded cue with d and f masked, the label is the recorded d.
std::vector<model::Example> make_examples(const data::SessionRecord& session);

// Packed evaluation of every step of every session with its recorded cue.
std::vector<std::vector<double>> predict_sessions(const model::ModelParams<float>& params,
                                                  const data::RelianceDataset& dataset);

// Fraction of steps where (r >= 0.5) == (d == AI); r = 0.5 counts as AI.
double decision_accuracy(const model::ModelParams<float>& params,
                         const data::RelianceDataset& dataset);

struct HoldoutScore {
  double accuracy = 0.0;
  double bce = 0.0;
};
HoldoutScore score_predictions(const data::RelianceDataset& dataset,
                               const std::vector<std::vector<double>>& r);

// Called after every epoch with the metrics and the current parameters.
using EpochCallback = std::function<void(const EpochMetrics&, const model::ModelParams<float>&)>;

// Minibatch Adam on mean BCE. The best checkpoint has the highest holdout
// accuracy over trained epochs, ties going to the earlier epoch.
TrainResult train(const data::RelianceDataset& train_set, const data::RelianceDataset& holdout,
                  const model::ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct CVSummary {
  std::vector<double> fold_best_acc;
  std::vector<std::size_t> fold_best_epoch;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

// Normal-approximation 95% interval: mean ± 1.96 · sd / sqrt(k), sd with
// k - 1 in the denominator.
CVSummary summarize_folds(std::vector<double> best_acc, std::vector<std::size_t> best_epoch);

CVSummary cross_validate(const data::RelianceDataset& dataset, std::size_t k,
                         std::uint64_t fold_seed, const model::ModelConfig& model_config,
                         const TrainConfig& config);

std::string metrics_csv(const std::vector<EpochMetrics>& metrics);
std::string cv_csv(const CVSummary& summary);

}  // namespace predrc::train
