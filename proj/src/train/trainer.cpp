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

#include "train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "common/error.hpp"
#include "data/generate.hpp"

namespace predrc::train {
using num::Matrix;

namespace {

std::vector<model::StepInput> completed_inputs(const data::SessionRecord& s) {
  std::vector<model::StepInput> out;
  out.reserve(s.steps.size());
  for (const auto& r : s.steps) out.push_back(r.completed_input());
  return out;
}

template <typename T>
std::vector<std::vector<double>> predict_sessions_t(const model::ModelParams<T>& params,
                                                    const data::RelianceDataset& dataset) {
  constexpr std::size_t kSessionsPerPass = 8;
  std::vector<std::vector<double>> out;
  for (std::size_t first = 0; first < dataset.sessions.size(); first += kSessionsPerPass) {
    const std::size_t last = std::min(first + kSessionsPerPass, dataset.sessions.size());
    model::LayoutBuilder builder(params.config);
    for (std::size_t s = first; s < last; ++s) builder.add_session(completed_inputs(dataset.sessions[s]));
    const auto r = model::predict_layout(params, builder.layout());
    std::size_t pos = 0;
    for (std::size_t s = first; s < last; ++s) {
      const std::size_t n = dataset.sessions[s].steps.size();
      out.emplace_back(r.begin() + pos, r.begin() + pos + n);
      pos += n;
    }
  }
  return out;
}

template <typename T>
TrainResult train_t(const data::RelianceDataset& train_set, const data::RelianceDataset& holdout,
                    const model::ModelConfig& model_config, const TrainConfig& config,
                    const EpochCallback& on_epoch) {
  Rng root = Rng(config.seed);
  auto params = model::ModelParams<T>::init(model_config, root.split("init"));
  num::AdamState<T> adam{config.adam, {}, {}, 0};
  std::vector<Matrix<T>*> param_list = params.tensors();
  const bool use_ema = config.ema_decay > 0.0;
  auto averaged = params;
  std::vector<Matrix<T>*> averaged_list = averaged.tensors();
  const std::size_t batches = (train_set.sessions.size() + config.batch_size - 1) / config.batch_size;
  const double total_updates = static_cast<double>(batches * config.epochs);
  const auto& scored = use_ema ? averaged : params;

  auto evaluate = [&](std::size_t epoch, double train_loss) {
    EpochMetrics m{epoch, train_loss, std::nullopt, std::nullopt};
    const bool last = epoch == config.epochs;
    if (epoch > 0 && (epoch % config.eval_every == 0 || last)) {
      const HoldoutScore h = score_predictions(holdout, predict_sessions_t(scored, holdout));
      m.holdout_acc = h.accuracy;
      m.holdout_bce = h.bce;
    }
    return m;
  };

  TrainResult result{params.template cast<float>(), params.template cast<float>(), 0, -1.0, {}};
  {
    // Loss of the untrained model over the training set.
    const HoldoutScore s = score_predictions(train_set, predict_sessions_t(params, train_set));
    EpochMetrics m{0, s.bce, std::nullopt, std::nullopt};
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m, result.final_params);
  }

  std::vector<std::size_t> order(train_set.sessions.size());
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle = root.split("shuffle").split(epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    std::size_t examples = 0;
    for (std::size_t b = 0; b * config.batch_size < order.size(); ++b) {
      model::LayoutBuilder builder(model_config);
      std::vector<std::uint8_t> labels;
      const std::size_t end = std::min(order.size(), (b + 1) * config.batch_size);
      for (std::size_t i = b * config.batch_size; i < end; ++i) {
        const auto& s = train_set.sessions[order[i]];
        builder.add_session(completed_inputs(s));
        for (const auto& r : s.steps) labels.push_back(r.d == model::Agent::kAi ? 1 : 0);
      }
      Rng dropout = root.split("dropout").split(epoch).split(b);
      auto lg = model::layout_loss_and_grad<T>(params, builder.layout(), labels, &dropout);
      if (!std::isfinite(lg.loss))
        fail(ErrorCode::kNumeric, "training diverged at epoch " + std::to_string(epoch) + " batch " +
                                      std::to_string(b));
      loss_sum += lg.loss * static_cast<double>(labels.size());
      examples += labels.size();
      std::vector<const Matrix<T>*> grads;
      for (Matrix<T>* g : lg.grads.tensors()) grads.push_back(g);
      if (config.lr_schedule == LrSchedule::kCosine)
        adam.config.lr = config.adam.lr * 0.5 *
                         (1.0 + std::cos(std::numbers::pi * static_cast<double>(adam.step) / total_updates));
      num::adam_step<T>(param_list, grads, adam);
      if (use_ema) {
        const T keep = static_cast<T>(config.ema_decay), mix = static_cast<T>(1.0 - config.ema_decay);
        for (std::size_t t = 0; t < param_list.size(); ++t) {
          T* a = averaged_list[t]->data();
          const T* p = param_list[t]->data();
          for (std::size_t i = 0; i < param_list[t]->size(); ++i) a[i] = keep * a[i] + mix * p[i];
        }
      }
    }

    EpochMetrics m = evaluate(epoch, loss_sum / static_cast<double>(examples));
    if (m.holdout_acc && *m.holdout_acc > result.best_acc) {
      result.best_acc = *m.holdout_acc;
      result.best_epoch = epoch;
      result.best_params = scored.template cast<float>();
    }
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m, scored.template cast<float>());
  }
  result.final_params = scored.template cast<float>();
  return result;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void TrainConfig::validate() const {
  require(epochs >= 1, "epochs must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(eval_every >= 1, "eval_every must be at least 1");
  require(adam.lr > 0.0 && adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 &&
              adam.beta2 < 1.0 && adam.epsilon > 0.0,
          "invalid Adam settings");
  require(ema_decay >= 0.0 && ema_decay < 1.0, "ema_decay must lie in [0, 1)");
}

std::string TrainConfig::to_text() const {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "epochs=%zu\nbatch_size=%zu\nlr=%.17g\nbeta1=%.17g\nbeta2=%.17g\nepsilon=%.17g\n"
                "lr_schedule=%s\nema_decay=%.17g\nseed=%llu\nprecision=%s\neval_every=%zu\n",
                epochs, batch_size, adam.lr, adam.beta1, adam.beta2, adam.epsilon,
                lr_schedule == LrSchedule::kCosine ? "cosine" : "constant", ema_decay,
                static_cast<unsigned long long>(seed), precision == Precision::kF32 ? "f32" : "f64",
                eval_every);
  return buf;
}

std::vector<model::Example> make_examples(const data::SessionRecord& session) {
  std::vector<model::Example> out;
  std::vector<model::StepInput> history;
  for (const auto& r : session.steps) {
    out.push_back({history, model::StepInput::current(r.x, r.c), r.d});
    history.push_back(r.completed_input());
  }
  return out;
}

std::vector<std::vector<double>> predict_sessions(const model::ModelParams<float>& params,
                                                  const data::RelianceDataset& dataset) {
  return predict_sessions_t(params, dataset);
}

HoldoutScore score_predictions(const data::RelianceDataset& dataset,
                               const std::vector<std::vector<double>>& r) {
  require(r.size() == dataset.sessions.size(), "one prediction list per session required");
  std::size_t n = 0, hits = 0;
  double bce = 0.0;
  for (std::size_t s = 0; s < r.size(); ++s) {
    const auto& steps = dataset.sessions[s].steps;
    require(r[s].size() == steps.size(), "one prediction per step required");
    for (std::size_t i = 0; i < steps.size(); ++i) {
      hits += (r[s][i] >= 0.5) == (steps[i].d == model::Agent::kAi);
      bce += model::bce_loss(r[s][i], steps[i].d);
      ++n;
    }
  }
  require(n > 0, "no steps to score");
  return {static_cast<double>(hits) / static_cast<double>(n), bce / static_cast<double>(n)};
}

double decision_accuracy(const model::ModelParams<float>& params,
                         const data::RelianceDataset& dataset) {
  return score_predictions(dataset, predict_sessions(params, dataset)).accuracy;
}

TrainResult train(const data::RelianceDataset& train_set, const data::RelianceDataset& holdout,
                  const model::ModelConfig& model_config, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  model_config.validate();
  require(!train_set.sessions.empty(), "training set is empty");
  require(!holdout.sessions.empty(), "holdout set is empty");
  if (config.precision == Precision::kF64)
    return train_t<double>(train_set, holdout, model_config, config, on_epoch);
  return train_t<float>(train_set, holdout, model_config, config, on_epoch);
}

CVSummary summarize_folds(std::vector<double> best_acc, std::vector<std::size_t> best_epoch) {
  require(!best_acc.empty() && best_acc.size() == best_epoch.size(), "fold results are inconsistent");
  CVSummary s{std::move(best_acc), std::move(best_epoch), 0, 0, 0};
  const double k = static_cast<double>(s.fold_best_acc.size());
  s.mean = std::accumulate(s.fold_best_acc.begin(), s.fold_best_acc.end(), 0.0) / k;
  double ss = 0.0;
  for (double a : s.fold_best_acc) ss += (a - s.mean) * (a - s.mean);
  const double half = k > 1 ? 1.96 * std::sqrt(ss / (k - 1)) / std::sqrt(k) : 0.0;
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

CVSummary cross_validate(const data::RelianceDataset& dataset, std::size_t k,
                         std::uint64_t fold_seed, const model::ModelConfig& model_config,
                         const TrainConfig& config) {
  const auto folds = data::stratified_kfold(dataset, k, fold_seed);
  std::vector<double> acc;
  std::vector<std::size_t> epoch;
  for (std::size_t f = 0; f < k; ++f) {
    auto [train_set, holdout] = data::split_fold(dataset, folds, f);
    // Sessions in a canonical order so the result does not depend on the
    // order of the input file.
    for (auto* d : {&train_set, &holdout})
      std::sort(d->sessions.begin(), d->sessions.end(),
                [](const auto& a, const auto& b) { return a.participant_id < b.participant_id; });
    const TrainResult r = train(train_set, holdout, model_config, config);
    acc.push_back(r.best_acc);
    epoch.push_back(r.best_epoch);
  }
  return summarize_folds(std::move(acc), std::move(epoch));
}

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
  std::string out = "epoch,train_loss,holdout_acc,holdout_bce\n";
  for (const auto& m : metrics) {
    out += std::to_string(m.epoch) + "," + fmt(m.train_loss) + "," +
           (m.holdout_acc ? fmt(*m.holdout_acc) : "") + "," + (m.holdout_bce ? fmt(*m.holdout_bce) : "") +
           "\n";
  }
  return out;
}

std::string cv_csv(const CVSummary& s) {
  std::string out = "fold,best_acc,best_epoch\n";
  for (std::size_t f = 0; f < s.fold_best_acc.size(); ++f)
    out += std::to_string(f) + "," + fmt(s.fold_best_acc[f]) + "," + std::to_string(s.fold_best_epoch[f]) + "\n";
  out += "mean," + fmt(s.mean) + ",\nci95_low," + fmt(s.ci_low) + ",\nci95_high," + fmt(s.ci_high) + ",\n";
  return out;
}

}  // namespace predrc::train
