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

#include "predrc/predrc.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>

#include "calib/cue_rule.hpp"
#include "common/error.hpp"
#include "data/generate.hpp"
#include "data/records.hpp"
#include "eval/compare.hpp"
#include "model/checkpoint.hpp"
#include "service/config.hpp"
#include "service/http_service.hpp"
#include "train/trainer.hpp"

using namespace predrc;

struct predrc_engine {
  service::EngineConfig config;
  service::World world;
  predrc_log_fn log_fn = nullptr;
  void* log_user = nullptr;

  void log(const std::string& message) const {
    if (log_fn) log_fn(log_user, message.c_str());
  }
};

struct predrc_service {
  model::ModelParams<float> params;
  std::unique_ptr<service::SessionService> impl;
  int port = 0;
};

namespace {

thread_local std::string last_error;

predrc_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return PREDRC_INVALID_ARGUMENT;
    case ErrorCode::kParse: return PREDRC_PARSE;
    case ErrorCode::kIo: return PREDRC_IO;
    case ErrorCode::kProtocol: return PREDRC_PROTOCOL;
    case ErrorCode::kNotFound: return PREDRC_NOT_FOUND;
    case ErrorCode::kNumeric: return PREDRC_NUMERIC;
    case ErrorCode::kState: return PREDRC_STATE;
  }
  return PREDRC_INTERNAL;
}

template <typename F>
predrc_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return PREDRC_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    last_error = e.what();
    return PREDRC_INTERNAL;
  } catch (...) {
    last_error = "unknown failure";
    return PREDRC_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

void make_parent(const std::string& path) {
  const std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  if (ec) fail(ErrorCode::kIo, "cannot create directory for " + path + ": " + ec.message());
}

void write_text(const std::string& path, const std::string& text) {
  make_parent(path);
  const std::filesystem::path p(path);
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
}

predrc_engine* make_engine(service::EngineConfig config) {
  auto world = service::World::build(config);
  return new predrc_engine{std::move(config), std::move(world)};
}

model::ModelParams<float> load_model(const predrc_engine& e, const char* path) {
  need(path, "checkpoint path");
  auto params = model::load_checkpoint(path);
  if (params.config.x_dim != e.world.env.x_dim())
    fail(ErrorCode::kInvalidArgument, "checkpoint x_dim does not match the configured clusters");
  return params;
}

calib::ThresholdSet load_thresholds(const char* path, const model::ModelParams<float>& params) {
  need(path, "thresholds path");
  auto set = calib::ThresholdSet::load(path);
  if (!set.model_digest().empty() && set.model_digest() != model::checkpoint_digest(params))
    fail(ErrorCode::kInvalidArgument, "thresholds were derived for a different checkpoint");
  return set;
}

std::unique_ptr<service::SessionService> make_service(const predrc_engine& e,
                                                      const model::ModelParams<float>& params,
                                                      const char* thresholds_path) {
  return std::make_unique<service::SessionService>(
      e.world, params, load_thresholds(thresholds_path, params), e.config.service,
      e.config.paths.session_logs, e.config.digest());
}

}  // namespace

extern "C" {

const char* predrc_version(void) { return "1.0.0"; }

const char* predrc_status_name(predrc_status status) {
  switch (status) {
    case PREDRC_OK: return "ok";
    case PREDRC_INVALID_ARGUMENT: return "invalid argument";
    case PREDRC_PARSE: return "parse error";
    case PREDRC_IO: return "i/o error";
    case PREDRC_PROTOCOL: return "protocol violation";
    case PREDRC_NOT_FOUND: return "not found";
    case PREDRC_NUMERIC: return "numeric failure";
    case PREDRC_STATE: return "invalid state";
    case PREDRC_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* predrc_last_error(void) { return last_error.c_str(); }

void predrc_free_string(char* s) { std::free(s); }

predrc_status predrc_engine_create(const char* config_path, predrc_engine** out) {
  return guarded([&] {
    need(out, "out");
    *out = make_engine(service::EngineConfig::resolve(config_path ? config_path : ""));
  });
}

predrc_status predrc_engine_create_from_json(const char* config_json, predrc_engine** out) {
  return guarded([&] {
    need(config_json, "config_json");
    need(out, "out");
    *out = make_engine(service::EngineConfig::from_json(config_json));
  });
}

void predrc_engine_destroy(predrc_engine* engine) { delete engine; }

void predrc_engine_set_log(predrc_engine* engine, predrc_log_fn fn, void* user) {
  if (!engine) return;
  engine->log_fn = fn;
  engine->log_user = user;
}

predrc_status predrc_engine_config_json(const predrc_engine* engine, char** out) {
  return guarded([&] {
    need(engine, "engine");
    need(out, "out");
    const std::string text = engine->config.to_json();
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *out = buf;
  });
}

const char* predrc_engine_path(const predrc_engine* engine, const char* name) {
  if (!engine || !name) return nullptr;
  const auto& p = engine->config.paths;
  const std::string n = name;
  if (n == "dataset") return p.dataset.c_str();
  if (n == "checkpoints") return p.checkpoints.c_str();
  if (n == "reports") return p.reports.c_str();
  if (n == "session_logs") return p.session_logs.c_str();
  return nullptr;
}

predrc_status predrc_generate_dataset(predrc_engine* engine, size_t participants, uint64_t seed,
                                      const char* out_path) {
  return guarded([&] {
    need(engine, "engine");
    need(out_path, "out_path");
    auto ds = data::generate_dataset(engine->world.env, engine->world.calib, engine->config.population,
                                     participants, seed);
    make_parent(out_path);
    data::write_jsonl_file(out_path, ds);
    engine->log("wrote " + std::to_string(ds.sessions.size()) + " sessions to " + out_path);
  });
}

void predrc_train_options_init(predrc_train_options* options) {
  if (!options) return;
  *options = predrc_train_options{};
  options->folds = 10;
  options->fold = 0;
  options->fold_seed = 1;
}

predrc_status predrc_train(predrc_engine* engine, const predrc_train_options* options,
                           predrc_train_result* result) {
  return guarded([&] {
    need(engine, "engine");
    need(options, "options");
    need(options->dataset_path, "dataset_path");
    need(options->checkpoint_out, "checkpoint_out");
    auto ds = data::read_jsonl_file(options->dataset_path);
    data::RelianceDataset train_set, holdout;
    if (options->holdout_path) {
      train_set = std::move(ds);
      holdout = data::read_jsonl_file(options->holdout_path);
    } else {
      auto folds = data::stratified_kfold(ds, options->folds, options->fold_seed);
      require(options->fold < folds.size(), "fold index out of range");
      std::tie(train_set, holdout) = data::split_fold(ds, folds, options->fold);
    }
    train::TrainConfig tc = engine->config.train;
    if (options->epochs) tc.epochs = options->epochs;
    auto res = train::train(train_set, holdout, engine->config.model, tc,
                            [&](const train::EpochMetrics& m, const model::ModelParams<float>&) {
                              std::ostringstream line;
                              line << "epoch " << m.epoch << " train_loss " << m.train_loss;
                              if (m.holdout_acc) line << " holdout_acc " << *m.holdout_acc;
                              engine->log(line.str());
                            });
    make_parent(options->checkpoint_out);
    model::save_checkpoint(options->checkpoint_out, res.best_params);
    if (options->metrics_out) write_text(options->metrics_out, train::metrics_csv(res.metrics));
    if (result) {
      result->best_epoch = res.best_epoch;
      result->best_accuracy = res.best_acc;
      result->final_train_loss = res.metrics.back().train_loss;
    }
  });
}

predrc_status predrc_crossval(predrc_engine* engine, const char* dataset_path, size_t k,
                              uint64_t fold_seed, const char* csv_out, predrc_cv_result* result) {
  return guarded([&] {
    need(engine, "engine");
    need(dataset_path, "dataset_path");
    auto ds = data::read_jsonl_file(dataset_path);
    auto summary = train::cross_validate(ds, k, fold_seed, engine->config.model, engine->config.train);
    if (csv_out) write_text(csv_out, train::cv_csv(summary));
    engine->log("cross-validation mean accuracy " + std::to_string(summary.mean));
    if (result) *result = predrc_cv_result{summary.mean, summary.ci_low, summary.ci_high};
  });
}

predrc_status predrc_sweep(predrc_engine* engine, const char* dataset_path,
                           const char* checkpoint_path, const double* targets, size_t num_targets,
                           const char* thresholds_out, const char* sweep_csv_out) {
  return guarded([&] {
    need(engine, "engine");
    need(dataset_path, "dataset_path");
    need(thresholds_out, "thresholds_out");
    if (num_targets) need(targets, "targets");
    const auto params = load_model(*engine, checkpoint_path);
    const auto ds = data::read_jsonl_file(dataset_path);
    std::vector<double> t = num_targets ? std::vector<double>(targets, targets + num_targets)
                                        : engine->config.threshold_targets;
    const auto set = calib::derive_thresholds(ds, params, t);
    make_parent(thresholds_out);
    set.save(thresholds_out);
    if (sweep_csv_out) {
      auto improvements = calib::cue_improvements(ds, params);
      std::sort(improvements.begin(), improvements.end());
      std::ostringstream csv;
      csv.precision(17);
      csv << "threshold,cues,fraction\n";
      const double lo = improvements.front() - 1e-9, hi = improvements.back();
      constexpr int kPoints = 41;
      for (int i = 0; i < kPoints; ++i) {
        const double thr = lo + (hi - lo) * i / (kPoints - 1);
        const auto cues = static_cast<std::size_t>(
            improvements.end() - std::upper_bound(improvements.begin(), improvements.end(), thr));
        csv << thr << ',' << cues << ',' << static_cast<double>(cues) / improvements.size() << '\n';
      }
      write_text(sweep_csv_out, csv.str());
    }
  });
}

predrc_status predrc_evaluate(predrc_engine* engine, const char* checkpoint_path,
                              const char* thresholds_path, size_t sessions_per_cell, uint64_t seed,
                              const char* out_prefix) {
  return guarded([&] {
    need(engine, "engine");
    need(out_prefix, "out_prefix");
    const auto params = load_model(*engine, checkpoint_path);
    const auto set = load_thresholds(thresholds_path, params);
    std::vector<double> budgets;
    for (const auto& e : set.entries()) budgets.push_back(e.target);
    const auto report = eval::compare_conditions(engine->world.env, engine->world.calib, params,
                                                 engine->config.population, set, budgets,
                                                 sessions_per_cell, seed);
    const std::string prefix = out_prefix;
    write_text(prefix + ".csv", eval::report_csv(report));
    write_text(prefix + ".long.csv", eval::report_long_csv(report));
    write_text(prefix + ".trend.csv", eval::report_trend_csv(report));
    engine->log("wrote " + prefix + ".csv");
  });
}

predrc_status predrc_service_start(predrc_engine* engine, const char* checkpoint_path,
                                   const char* thresholds_path, const char* host, int port,
                                   predrc_service** out) {
  return guarded([&] {
    need(engine, "engine");
    need(out, "out");
    auto svc = std::make_unique<predrc_service>();
    svc->params = load_model(*engine, checkpoint_path);
    svc->impl = make_service(*engine, svc->params, thresholds_path);
    svc->port = svc->impl->start(host ? host : engine->config.service.host, port);
    engine->log("serving on port " + std::to_string(svc->port));
    *out = svc.release();
  });
}

int predrc_service_port(const predrc_service* service) { return service ? service->port : -1; }

void predrc_service_stop(predrc_service* service) {
  if (!service) return;
  service->impl->stop();
  delete service;
}

predrc_status predrc_serve(predrc_engine* engine, const char* checkpoint_path,
                           const char* thresholds_path, const char* host, int port) {
  return guarded([&] {
    need(engine, "engine");
    const auto params = load_model(*engine, checkpoint_path);
    auto svc = make_service(*engine, params, thresholds_path);
    const std::string h = host ? host : engine->config.service.host;
    const int p = port > 0 ? port : engine->config.service.port;
    engine->log("serving on " + h + ":" + std::to_string(p));
    svc->run(h, p);
  });
}

}  // extern "C"
