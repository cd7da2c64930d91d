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

#include "service/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "common/digest.hpp"
#include "common/error.hpp"
#include "json.hpp"

namespace predrc::service {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(ErrorCode::kParse, "config '" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) fail(ErrorCode::kParse, "unknown config key '" + where + "." + k + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kParse, "config key '" + where + "." + key + "' has the wrong type");
  }
}

void read_pair(const json& j, const char* key, std::pair<double, double>& out, const std::string& where) {
  std::vector<double> v;
  read(j, key, v, where);
  if (!j.contains(key)) return;
  if (v.size() != 2) fail(ErrorCode::kParse, "config key '" + where + "." + key + "' needs [lo, hi]");
  out = {v[0], v[1]};
}

void read_range(const json& j, const char* key, sim::Range& out, const std::string& where) {
  std::pair<double, double> p{out.lo, out.hi};
  read_pair(j, key, p, where);
  out = {p.first, p.second};
}

}  // namespace

EngineConfig EngineConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, "", {"schema", "clusters", "surrogate", "calibration", "population", "model", "train",
                     "thresholds", "paths", "service"});
  EngineConfig c;
  std::string schema{kConfigSchema};
  read(j, "schema", schema, "");
  if (schema != kConfigSchema) fail(ErrorCode::kParse, "unsupported config schema '" + schema + "'");

  if (j.contains("clusters")) {
    c.clusters.clear();
    for (const auto& cj : j.at("clusters")) {
      check_keys(cj, "clusters[]", {"id", "skill", "mix_weight", "style"});
      env::ClusterSpec s;
      read(cj, "id", s.id, "clusters[]");
      read(cj, "skill", s.ai_skill, "clusters[]");
      read(cj, "mix_weight", s.mix_weight, "clusters[]");
      if (cj.contains("style")) {
        check_keys(cj.at("style"), "clusters[].style", {"background", "distortion"});
        read(cj.at("style"), "background", s.style.background, "clusters[].style");
        read(cj.at("style"), "distortion", s.style.distortion, "clusters[].style");
      }
      c.clusters.push_back(s);
    }
  }
  if (j.contains("surrogate")) {
    const auto& sj = j.at("surrogate");
    check_keys(sj, "surrogate", {"correct_peak", "wrong_peak"});
    read_pair(sj, "correct_peak", c.surrogate.correct_peak, "surrogate");
    read_pair(sj, "wrong_peak", c.surrogate.wrong_peak, "surrogate");
  }
  if (j.contains("calibration")) {
    const auto& cj = j.at("calibration");
    check_keys(cj, "calibration", {"samples", "seed"});
    read(cj, "samples", c.calibration.samples, "calibration");
    read(cj, "seed", c.calibration.seed, "calibration");
  }
  if (j.contains("population")) {
    const auto& pj = j.at("population");
    check_keys(pj, "population", {"w0", "w_belief", "w_cue", "own_skill", "prior"});
    read_range(pj, "w0", c.population.w0, "population");
    read_range(pj, "w_belief", c.population.w_belief, "population");
    read_range(pj, "w_cue", c.population.w_cue, "population");
    read(pj, "own_skill", c.population.own_skill, "population");
    std::pair<double, double> prior{c.population.prior.alpha, c.population.prior.beta};
    read_pair(pj, "prior", prior, "population");
    c.population.prior = {prior.first, prior.second};
  }
  if (j.contains("model")) {
    const auto& mj = j.at("model");
    check_keys(mj, "model", {"num_layers", "num_heads", "d_model", "d_ff", "dropout", "mlp_hidden",
                             "max_seq_len", "layer_norm_eps"});
    read(mj, "num_layers", c.model.num_layers, "model");
    read(mj, "num_heads", c.model.num_heads, "model");
    read(mj, "d_model", c.model.d_model, "model");
    read(mj, "d_ff", c.model.d_ff, "model");
    read(mj, "dropout", c.model.dropout, "model");
    read(mj, "mlp_hidden", c.model.mlp_hidden, "model");
    read(mj, "max_seq_len", c.model.max_seq_len, "model");
    read(mj, "layer_norm_eps", c.model.layer_norm_eps, "model");
  }
  if (j.contains("train")) {
    const auto& tj = j.at("train");
    check_keys(tj, "train", {"epochs", "batch_size", "lr", "beta1", "beta2", "epsilon", "seed",
                             "precision", "eval_every", "lr_schedule", "ema_decay"});
    read(tj, "epochs", c.train.epochs, "train");
    read(tj, "batch_size", c.train.batch_size, "train");
    read(tj, "lr", c.train.adam.lr, "train");
    read(tj, "beta1", c.train.adam.beta1, "train");
    read(tj, "beta2", c.train.adam.beta2, "train");
    read(tj, "epsilon", c.train.adam.epsilon, "train");
    read(tj, "seed", c.train.seed, "train");
    read(tj, "eval_every", c.train.eval_every, "train");
    read(tj, "ema_decay", c.train.ema_decay, "train");
    std::string schedule = c.train.lr_schedule == train::LrSchedule::kCosine ? "cosine" : "constant";
    read(tj, "lr_schedule", schedule, "train");
    if (schedule != "constant" && schedule != "cosine")
      fail(ErrorCode::kParse, "train.lr_schedule must be \"constant\" or \"cosine\"");
    c.train.lr_schedule = schedule == "cosine" ? train::LrSchedule::kCosine : train::LrSchedule::kConstant;
    std::string precision = "f32";
    read(tj, "precision", precision, "train");
    if (precision != "f32" && precision != "f64")
      fail(ErrorCode::kParse, "train.precision must be \"f32\" or \"f64\"");
    c.train.precision = precision == "f32" ? train::Precision::kF32 : train::Precision::kF64;
  }
  if (j.contains("thresholds")) {
    check_keys(j.at("thresholds"), "thresholds", {"targets"});
    read(j.at("thresholds"), "targets", c.threshold_targets, "thresholds");
  }
  if (j.contains("paths")) {
    const auto& pj = j.at("paths");
    check_keys(pj, "paths", {"dataset", "checkpoints", "reports", "session_logs"});
    read(pj, "dataset", c.paths.dataset, "paths");
    read(pj, "checkpoints", c.paths.checkpoints, "paths");
    read(pj, "reports", c.paths.reports, "paths");
    read(pj, "session_logs", c.paths.session_logs, "paths");
  }
  if (j.contains("service")) {
    const auto& sj = j.at("service");
    check_keys(sj, "service", {"host", "port", "session_ttl_seconds"});
    read(sj, "host", c.service.host, "service");
    read(sj, "port", c.service.port, "service");
    read(sj, "session_ttl_seconds", c.service.session_ttl_seconds, "service");
  }
  c.model.x_dim = c.clusters.size() + env::kStyleDims;
  c.validate();
  return c;
}

EngineConfig EngineConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

EngineConfig EngineConfig::resolve(const std::string& path) {
  if (!path.empty()) return load(path);
  if (const char* env = std::getenv(kConfigEnvVar); env && *env) return load(env);
  EngineConfig c;
  c.model.x_dim = c.clusters.size() + env::kStyleDims;
  return c;
}

std::string EngineConfig::to_json() const {
  json clusters_j = json::array();
  for (const auto& c : clusters)
    clusters_j.push_back({{"id", c.id},
                          {"skill", c.ai_skill},
                          {"mix_weight", c.mix_weight},
                          {"style", {{"background", c.style.background}, {"distortion", c.style.distortion}}}});
  json j{
      {"schema", kConfigSchema},
      {"clusters", clusters_j},
      {"surrogate",
       {{"correct_peak", {surrogate.correct_peak.first, surrogate.correct_peak.second}},
        {"wrong_peak", {surrogate.wrong_peak.first, surrogate.wrong_peak.second}}}},
      {"calibration", {{"samples", calibration.samples}, {"seed", calibration.seed}}},
      {"population",
       {{"w0", {population.w0.lo, population.w0.hi}},
        {"w_belief", {population.w_belief.lo, population.w_belief.hi}},
        {"w_cue", {population.w_cue.lo, population.w_cue.hi}},
        {"own_skill", population.own_skill},
        {"prior", {population.prior.alpha, population.prior.beta}}}},
      {"model",
       {{"num_layers", model.num_layers},
        {"num_heads", model.num_heads},
        {"d_model", model.d_model},
        {"d_ff", model.d_ff},
        {"dropout", model.dropout},
        {"mlp_hidden", model.mlp_hidden},
        {"max_seq_len", model.max_seq_len},
        {"layer_norm_eps", model.layer_norm_eps}}},
      {"train",
       {{"epochs", train.epochs},
        {"batch_size", train.batch_size},
        {"lr", train.adam.lr},
        {"beta1", train.adam.beta1},
        {"beta2", train.adam.beta2},
        {"epsilon", train.adam.epsilon},
        {"seed", train.seed},
        {"precision", train.precision == train::Precision::kF32 ? "f32" : "f64"},
        {"eval_every", train.eval_every},
        {"lr_schedule", train.lr_schedule == train::LrSchedule::kCosine ? "cosine" : "constant"},
        {"ema_decay", train.ema_decay}}},
      {"thresholds", {{"targets", threshold_targets}}},
      {"paths",
       {{"dataset", paths.dataset},
        {"checkpoints", paths.checkpoints},
        {"reports", paths.reports},
        {"session_logs", paths.session_logs}}},
      {"service",
       {{"host", service.host}, {"port", service.port}, {"session_ttl_seconds", service.session_ttl_seconds}}}};
  return j.dump(2) + "\n";
}

std::string EngineConfig::digest() const { return hex64(fnv1a64(to_json())); }

void EngineConfig::validate() const {
  env::TaskEnv(clusters, surrogate);
  population.validate();
  model.validate();
  require(model.x_dim == clusters.size() + env::kStyleDims, "model x_dim must match the task features");
  train.validate();
  require(calibration.samples >= 2, "calibration.samples must be at least 2");
  for (double t : threshold_targets) require(t >= 0.0 && t <= 1.0, "threshold targets must lie in [0,1]");
  require(service.port >= 0 && service.port <= 65535, "service.port out of range");
  require(service.session_ttl_seconds > 0.0, "service.session_ttl_seconds must be positive");
}

World World::build(const EngineConfig& config) {
  env::TaskEnv env(config.clusters, config.surrogate);
  const auto calib = env::fit_calibration(env.calibration_pairs(config.calibration.samples, Rng(config.calibration.seed)));
  return {std::move(env), calib};
}

}  // namespace predrc::service
