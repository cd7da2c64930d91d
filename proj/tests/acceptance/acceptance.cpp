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

// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 5, 6, 7 and 9 reuse the model trained for 4.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "calib/cue_rule.hpp"
#include "calib/session.hpp"
#include "common/error.hpp"
#include "data/generate.hpp"
#include "data/records.hpp"
#include "eval/compare.hpp"
#include "eval/metrics.hpp"
#include "httplib.h"
#include "json.hpp"
#include "model/checkpoint.hpp"
#include "model/tracker.hpp"
#include "model/trustformer.hpp"
#include "num/grad_check.hpp"
#include "service/config.hpp"
#include "service/http_service.hpp"
#include "train/trainer.hpp"

namespace predrc {
namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Data and model shared between criteria.
struct Context {
  service::EngineConfig config;
  service::World world = service::World::build(config);
  data::RelianceDataset train_set;
  data::RelianceDataset holdout;
  data::RelianceDataset calibration_set;  // thresholds are derived here, away from the training data
  std::optional<model::ModelParams<float>> params;
  std::optional<calib::ThresholdSet> thresholds;
  std::vector<double> closed_loop_fractions;  // mean cue fraction per criterion 5 budget
};

constexpr std::size_t kTrainParticipants = 120;
constexpr std::uint64_t kTrainSeed = 11;
constexpr std::size_t kHoldoutParticipants = 60;
constexpr std::uint64_t kHoldoutSeed = 12;
constexpr std::size_t kCalibrationParticipants = 120;
constexpr std::uint64_t kCalibrationSeed = 14;
constexpr std::uint64_t kComparisonSeed = 13;
constexpr std::size_t kComparisonSessions = 200;

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

model::StepInput random_step(Rng& rng, std::size_t x_dim, bool completed) {
  model::StepInput s;
  s.x.assign(x_dim, 0.0);
  s.x[rng.below(4)] = 1.0;
  for (std::size_t j = 4; j < x_dim; ++j) s.x[j] = rng.normal();
  if (rng.bernoulli(0.5)) s.c = rng.uniform();
  if (completed) {
    s.d = rng.bernoulli(0.5) ? model::Agent::kAi : model::Agent::kHuman;
    s.f = *s.d == model::Agent::kAi
              ? model::Feedback::kAiAnswered
              : (rng.bernoulli(0.5) ? model::Feedback::kHumanMatched : model::Feedback::kHumanDiffered);
  }
  return s;
}

template <typename T>
model::ModelParams<T> random_params(const model::ModelConfig& cfg, std::uint64_t seed) {
  auto p = model::ModelParams<T>::init(cfg, Rng(seed));
  Rng rng(seed ^ 0x5eed);
  for (auto* m : {&p.head_w.back(), &p.head_b.back()})
    for (T& v : m->values()) v = static_cast<T>(rng.uniform(-0.5, 0.5));
  return p;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness(Context&) {
  const auto t0 = Clock::now();
  model::ModelConfig cfg;
  cfg.num_layers = 1;
  cfg.d_model = 8;
  cfg.num_heads = 2;
  cfg.d_ff = 16;
  cfg.mlp_hidden = {8};
  cfg.max_seq_len = 5;
  cfg.dropout = 0.0;
  cfg.x_dim = 8;
  auto p = random_params<double>(cfg, 101);
  Rng rng(102);
  std::vector<model::Example> batch;
  for (int i = 0; i < 4; ++i) {
    std::vector<model::StepInput> h;
    for (int j = 0; j < 4; ++j) h.push_back(random_step(rng, cfg.x_dim, true));
    batch.push_back({h, model::StepInput::current(random_step(rng, cfg.x_dim, false).x, rng.uniform()),
                     i % 2 ? model::Agent::kAi : model::Agent::kHuman});
  }
  auto tensors = p.tensors();
  auto loss = [&](std::vector<num::MatrixD>* grads) {
    auto lg = model::loss_and_grad<double>(p, batch, nullptr);
    if (grads) {
      auto g = lg.grads.tensors();
      for (std::size_t t = 0; t < g.size(); ++t) (*grads)[t] = *g[t];
    }
    return lg.loss;
  };
  // Every coordinate of every tensor.
  const auto res = num::grad_check(loss, tensors, 1e-5, std::numeric_limits<std::size_t>::max());
  const double secs = seconds_since(t0);
  return {res.max_rel_error <= 1e-4 && secs < 60.0,
          "max rel error " + fmt("%.2e", res.max_rel_error) + " over " + std::to_string(res.coords_checked) +
              " coordinates, " + fmt("%.1f s", secs)};
}

Outcome masking_and_causality(Context&) {
  constexpr int kTrials = 100;
  int embed_ok = 0, leak_rejected = 0, causal_ok = 0;
  for (int trial = 0; trial < kTrials; ++trial) {
    Rng rng = Rng(200).split(static_cast<std::uint64_t>(trial));
    auto cfg = model::ModelConfig::tiny(8);
    auto p = random_params<float>(cfg, 300 + trial);

    // (a) The current token never touches the d/f feature maps.
    std::vector<model::StepInput> h;
    const std::size_t len = rng.below(cfg.max_seq_len);
    for (std::size_t i = 0; i < len; ++i) h.push_back(random_step(rng, 8, true));
    const auto cur = model::StepInput::current(random_step(rng, 8, false).x, rng.uniform());
    const auto before = model::embed_history<float>(p, h, cur);
    auto q = p;
    for (auto* m : {&q.d_w, &q.d_b, &q.f_w, &q.f_b})
      for (float& v : m->values()) v += static_cast<float>(rng.normal());
    const auto after = model::embed_history<float>(q, h, cur);
    bool same = true;
    for (std::size_t j = 0; j < before.cols(); ++j) same &= before(len, j) == after(len, j);
    embed_ok += same;
    auto leaked = cur;
    if (trial % 2) leaked.d = model::Agent::kAi; else leaked.f = model::Feedback::kHumanMatched;
    try {
      model::embed_history<float>(p, h, leaked);
    } catch (const Error&) {
      ++leak_rejected;
    }

    // (b) Editing steps after i leaves r_0..r_i bit-identical, through the
    // packed layout and the incremental tracker.
    std::vector<model::StepInput> steps;
    const std::size_t n = 2 + rng.below(cfg.max_seq_len - 1);
    for (std::size_t s = 0; s < n; ++s) steps.push_back(random_step(rng, 8, true));
    const std::size_t cut = rng.below(n);
    auto edited = steps;
    for (std::size_t s = cut + 1; s < n; ++s) edited[s] = random_step(rng, 8, true);
    auto run_layout = [&](const std::vector<model::StepInput>& ss) {
      model::LayoutBuilder b(cfg);
      b.add_session(ss);
      return model::predict_layout<float>(p, b.layout());
    };
    auto run_tracker = [&](const std::vector<model::StepInput>& ss) {
      model::RelianceTracker<float> t(p);
      std::vector<double> r;
      for (const auto& s : ss) {
        const auto pair = t.predict_pair(s.x, s.c.value_or(0.5));
        r.push_back(s.c ? pair.r_with : pair.r_without);
        t.append(s);
      }
      return r;
    };
    const auto a = run_layout(steps), b = run_layout(edited);
    const auto ta = run_tracker(steps), tb = run_tracker(edited);
    bool prefix_same = true;
    for (std::size_t s = 0; s <= cut; ++s) prefix_same &= a[s] == b[s] && ta[s] == tb[s] && a[s] == ta[s];
    causal_ok += prefix_same;
  }
  return {embed_ok == kTrials && leak_rejected == kTrials && causal_ok == kTrials,
          "(a) " + std::to_string(embed_ok) + "/" + std::to_string(kTrials) + " current tokens unchanged, " +
              std::to_string(leak_rejected) + "/" + std::to_string(kTrials) + " unmasked current d/f rejected; (b) " +
              std::to_string(causal_ok) + "/" + std::to_string(kTrials) + " prefixes bit-identical"};
}

Outcome environment_calibration(Context& ctx) {
  constexpr std::size_t kSteps = 7200;
  const auto& env = ctx.world.env;
  Rng rng(400);
  std::size_t ai_hits = 0, human_hits = 0;
  const auto human = ctx.config.population.sample(Rng(401));
  for (std::size_t i = 0; i < kSteps; ++i) {
    auto task = env.sample_task(rng);
    ai_hits += env::ai_answer(env.task_ai_infer(task, rng)) == task.y_star;
    human_hits += sim::human_answer(task, human, rng) == task.y_star;
  }
  const double ai = static_cast<double>(ai_hits) / kSteps;
  const double hu = static_cast<double>(human_hits) / kSteps;
  return {std::abs(ai - 0.50) <= 0.03 && std::abs(hu - 0.844) <= 0.015,
          "AI exact match " + fmt("%.4f", ai) + " (0.50 +/- 0.03), human " + fmt("%.4f", hu) +
              " (0.844 +/- 0.015) over " + std::to_string(kSteps) + " steps"};
}

// Oracle reliance for every step of a dataset, with the cue state recorded.
std::vector<std::vector<double>> oracle_rates(const Context& ctx, const data::RelianceDataset& ds) {
  std::map<std::string, std::size_t> cluster_index;
  const auto& clusters = ctx.world.env.clusters();
  for (std::size_t k = 0; k < clusters.size(); ++k) cluster_index[clusters[k].id] = k;
  std::vector<std::vector<double>> out;
  for (const auto& s : ds.sessions) {
    const auto policy = ctx.config.population.sample(calib::SessionStreams(s.generator_seed).participant());
    std::vector<sim::ExperienceStep> history;
    std::vector<double> r;
    for (const auto& st : s.steps) {
      const std::size_t c = cluster_index.at(st.cluster_id);
      const auto pair = sim::oracle_reliance(policy, clusters.size(), history, c, st.c_hat);
      r.push_back(st.cue_provided ? pair.r_with : pair.r_without);
      history.push_back({c, st.d, st.ai_correct});
    }
    out.push_back(std::move(r));
  }
  return out;
}

Outcome oracle_recovery(Context& ctx) {
  const auto t0 = Clock::now();
  const auto& w = ctx.world;
  ctx.train_set = data::generate_dataset(w.env, w.calib, ctx.config.population, kTrainParticipants, kTrainSeed);
  ctx.holdout = data::generate_dataset(w.env, w.calib, ctx.config.population, kHoldoutParticipants, kHoldoutSeed);
  const auto& tc = ctx.config.train;
  auto result = train::train(ctx.train_set, ctx.holdout, ctx.config.model, tc);
  const double secs = seconds_since(t0);
  ctx.params = result.best_params;

  const auto oracle = oracle_rates(ctx, ctx.holdout);
  const auto predicted = train::predict_sessions(*ctx.params, ctx.holdout);
  double abs_err = 0.0, bayes = 0.0, n = 0.0;
  for (std::size_t s = 0; s < oracle.size(); ++s)
    for (std::size_t i = 0; i < oracle[s].size(); ++i) {
      abs_err += std::abs(predicted[s][i] - oracle[s][i]);
      bayes += std::max(oracle[s][i], 1.0 - oracle[s][i]);
      n += 1.0;
    }
  const double mae = abs_err / n, bayes_acc = bayes / n, acc = result.best_acc;
  const bool epochs_ok = tc.epochs >= 25 && tc.epochs <= 50;
  return {epochs_ok && acc >= 0.75 && bayes_acc - acc <= 0.05 && mae <= 0.10 && secs <= 900.0,
          std::to_string(tc.epochs) + " epochs on " + std::to_string(kTrainParticipants) +
              " participants: holdout accuracy " + fmt("%.4f", acc) + " (best epoch " +
              std::to_string(result.best_epoch) + "), oracle Bayes accuracy " + fmt("%.4f", bayes_acc) +
              ", MAE vs oracle r " + fmt("%.4f", mae) + ", " + fmt("%.0f s", secs)};
}

Outcome fscore_replication(Context& ctx) {
  if (!ctx.params) return {false, "no trained model"};
  const auto t0 = Clock::now();
  ctx.calibration_set = data::generate_dataset(ctx.world.env, ctx.world.calib, ctx.config.population,
                                               kCalibrationParticipants, kCalibrationSeed);
  ctx.thresholds = calib::derive_thresholds(ctx.calibration_set, *ctx.params, ctx.config.threshold_targets);
  const std::vector<double> budgets = {0.2, 0.4, 0.6};
  const auto report = eval::compare_conditions(ctx.world.env, ctx.world.calib, *ctx.params, ctx.config.population,
                                               *ctx.thresholds, budgets, kComparisonSessions, kComparisonSeed);
  std::ostringstream detail;
  bool ok = true;
  std::vector<double> gaps;
  for (double b : budgets) {
    const auto& pr = report.cell(eval::kPredRc, b);
    const auto& rnd = report.cell(eval::kRandom, b);
    ok &= pr.n >= 200 && rnd.n >= 200 && pr.mean_f1 >= rnd.mean_f1;
    gaps.push_back(pr.mean_f1 - rnd.mean_f1);
    ctx.closed_loop_fractions.push_back(pr.mean_cues / static_cast<double>(data::kSessionLength));
    detail << "budget " << b << ": pred_rc " << fmt("%.4f", pr.mean_f1) << " vs random " << fmt("%.4f", rnd.mean_f1)
           << "; ";
  }
  ok &= gaps.front() > gaps.back();
  detail << "gap@20% " << fmt("%.4f", gaps.front()) << " vs gap@60% " << fmt("%.4f", gaps.back()) << ", "
         << kComparisonSessions << " paired sessions per cell, " << fmt("%.0f s", seconds_since(t0));
  return {ok, detail.str()};
}

Outcome threshold_mechanics(Context& ctx) {
  if (!ctx.params || !ctx.thresholds) return {false, "no trained model or thresholds"};
  // Sweep: count provided cues through the decision rule on a fixed dataset.
  std::vector<std::pair<model::ReliancePair, double>> queries;
  for (const auto& session : ctx.holdout.sessions) {
    std::vector<model::StepInput> steps;
    std::vector<model::PrefixQuery> q;
    for (const auto& s : session.steps) {
      steps.push_back(s.completed_input());
      q.push_back({s.step_index, s.c_hat});
      q.push_back({s.step_index, std::nullopt});
    }
    model::LayoutBuilder builder(ctx.params->config);
    builder.add_session_queries(steps, q);
    const auto r = model::predict_layout(*ctx.params, builder.layout());
    for (std::size_t i = 0; i < session.steps.size(); ++i)
      queries.push_back({{r[2 * i], r[2 * i + 1]}, session.steps[i].p});
  }
  const auto improvements = calib::cue_improvements(ctx.holdout, *ctx.params);
  const auto [lo, hi] = std::minmax_element(improvements.begin(), improvements.end());
  constexpr int kGrid = 101;
  std::size_t previous = std::numeric_limits<std::size_t>::max();
  bool monotone = true;
  std::size_t first = 0, last = 0;
  for (int g = 0; g < kGrid; ++g) {
    const double thr = (*lo - 0.01) + (*hi - *lo + 0.02) * g / (kGrid - 1);
    std::size_t cues = 0;
    for (const auto& [pair, p] : queries) cues += calib::make_decision(pair, p, thr).provide;
    monotone &= cues <= previous;
    previous = cues;
    if (g == 0) first = cues;
    last = cues;
  }

  // Realized fractions on sessions not used for derivation.
  bool within = true;
  double worst = 0.0;
  for (const auto& e : ctx.thresholds->entries()) {
    const auto shown = std::count_if(improvements.begin(), improvements.end(),
                                     [&](double v) { return calib::decide_cue(0.0, v, e.threshold); });
    const double frac = static_cast<double>(shown) / improvements.size();
    worst = std::max(worst, std::abs(frac - e.target));
    within &= std::abs(frac - e.target) <= 0.03;
  }
  std::string closed;
  for (double f : ctx.closed_loop_fractions) closed += fmt(" %.3f", f);
  return {monotone && within && first == queries.size() && last == 0,
          "cue count non-increasing over " + std::to_string(kGrid) + " thresholds (" + std::to_string(first) +
              " -> " + std::to_string(last) + "); worst held-out fraction error " + fmt("%.4f", worst) +
              " over " + std::to_string(ctx.thresholds->entries().size()) + " targets; live-session fractions at" +
              " 20/40/60%:" + closed};
}

Outcome determinism_and_persistence(Context& ctx) {
  const auto& w = ctx.world;
  std::vector<std::string> failures;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  };

  const auto a = data::generate_dataset(w.env, w.calib, ctx.config.population, 12, 700);
  const auto b = data::generate_dataset(w.env, w.calib, ctx.config.population, 12, 700);
  const auto c = data::generate_dataset(w.env, w.calib, ctx.config.population, 12, 701);
  check(data::to_jsonl(a) == data::to_jsonl(b), "dataset bytes");
  check(data::to_jsonl(a) != data::to_jsonl(c), "seed sensitivity");

  auto tiny = model::ModelConfig::tiny(w.env.x_dim());
  train::TrainConfig tc;
  tc.epochs = 3;
  tc.adam.lr = 1e-3;
  const auto folds = data::stratified_kfold(a, 2, 1);
  const auto [tr, ho] = data::split_fold(a, folds, 0);
  const auto r1 = train::train(tr, ho, tiny, tc);
  const auto r2 = train::train(tr, ho, tiny, tc);
  check(train::metrics_csv(r1.metrics) == train::metrics_csv(r2.metrics), "training metrics");
  check(model::encode_checkpoint(r1.best_params) == model::encode_checkpoint(r2.best_params), "trained weights");

  calib::ThresholdSet ts({{0.2, 0.001}, {0.6, -0.001}}, model::checkpoint_digest(r1.best_params));
  const std::vector<double> budgets = {0.2, 0.6};
  const auto rep1 = eval::compare_conditions(w.env, w.calib, r1.best_params, ctx.config.population, ts, budgets, 4, 9);
  const auto rep2 = eval::compare_conditions(w.env, w.calib, r1.best_params, ctx.config.population, ts, budgets, 4, 9);
  check(eval::report_csv(rep1) == eval::report_csv(rep2) && eval::report_long_csv(rep1) == eval::report_long_csv(rep2) &&
            eval::report_trend_csv(rep1) == eval::report_trend_csv(rep2),
        "comparison reports");

  const auto dir = std::filesystem::temp_directory_path() / ("predrc_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  const auto& params = ctx.params ? *ctx.params : r1.best_params;
  model::save_checkpoint(dir / "model.ckpt", params);
  const auto loaded = model::load_checkpoint(dir / "model.ckpt");
  const auto& probe = ctx.holdout.sessions.empty() ? a : ctx.holdout;
  check(train::predict_sessions(params, probe) == train::predict_sessions(loaded, probe), "checkpoint predictions");
  check(model::encode_checkpoint(loaded) == model::encode_checkpoint(params), "checkpoint bytes");

  std::size_t round_trips = 0;
  for (const data::RelianceDataset* ds : std::vector<const data::RelianceDataset*>{&a, &c, &ctx.train_set, &ctx.holdout}) {
    if (ds->sessions.empty()) continue;
    data::write_jsonl_file((dir / "ds.jsonl").string(), *ds);
    check(data::read_jsonl_file((dir / "ds.jsonl").string()) == *ds, "dataset file round trip");
    ++round_trips;
  }
  // Session logs carry cue decisions.
  for (std::uint64_t s = 0; s < 4; ++s) {
    const auto human = ctx.config.population.sample(Rng(800 + s));
    data::RelianceDataset log;
    log.provenance.seed = 900 + s;
    log.sessions.push_back(calib::run_session(w.env, w.calib, human, &r1.best_params,
                                              calib::CuePolicy::pred_rc(0.0), 900 + s, "log" + std::to_string(s)));
    check(log.sessions[0].steps[0].decision.has_value(), "session log carries decisions");
    data::write_jsonl_file((dir / "log.jsonl").string(), log);
    check(data::read_jsonl_file((dir / "log.jsonl").string()) == log, "session log round trip");
    ++round_trips;
  }
  if (ctx.thresholds) {
    ctx.thresholds->save((dir / "t.json").string());
    check(calib::ThresholdSet::load((dir / "t.json").string()) == *ctx.thresholds, "threshold file round trip");
  }
  std::filesystem::remove_all(dir);

  std::string detail = failures.empty() ? "datasets, metrics, weights and reports reproduce; checkpoint predictions "
                                          "bit-identical; " +
                                              std::to_string(round_trips) + " files round-trip"
                                        : "mismatch:";
  for (const auto& f : failures) detail += " " + f + ";";
  return {failures.empty(), detail};
}

Outcome metric_oracles(Context&) {
  constexpr int kInstances = 200;
  int f_ok = 0, trend_ok = 0, folds_ok = 0;
  Rng rng(1000);
  for (int t = 0; t < kInstances; ++t) {
    // f_score against a direct count over records.
    std::vector<data::StepRecord> records(1 + rng.below(80));
    for (auto& r : records) {
      r.d = rng.bernoulli(0.5) ? model::Agent::kAi : model::Agent::kHuman;
      r.ai_correct = rng.bernoulli(0.5);
    }
    double tp = 0, to_ai = 0, ai_ok = 0;
    for (const auto& r : records) {
      const bool assigned = r.d == model::Agent::kAi;
      tp += assigned && r.ai_correct;
      to_ai += assigned;
      ai_ok += r.ai_correct;
    }
    const double prec = to_ai > 0 ? tp / to_ai : 0.0;
    const double rec = ai_ok > 0 ? tp / ai_ok : 0.0;
    const double f1 = prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
    const auto got = eval::f_score(records);
    f_ok += std::abs(got.precision - prec) < 1e-12 && std::abs(got.recall - rec) < 1e-12 &&
            std::abs(got.f1 - f1) < 1e-12;

    // Least squares slope from pairwise differences.
    std::vector<std::pair<double, double>> pts(2 + rng.below(40));
    for (auto& [x, y] : pts) {
      x = static_cast<double>(rng.below(61));
      y = rng.uniform();
    }
    pts[0].first = 0;
    pts[1].first = 60;
    long double num = 0, den = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const long double dx = pts[i].first - pts[j].first;
        num += dx * (pts[i].second - pts[j].second);
        den += dx * dx;
      }
    const double slope = static_cast<double>(num / den);
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) mx += x, my += y;
    mx /= pts.size();
    my /= pts.size();
    const auto fit = eval::linear_trend(pts);
    trend_ok += std::abs(fit.slope - slope) < 1e-9 && std::abs(fit.intercept - (my - slope * mx)) < 1e-9;
  }

  // Stratified folds: 60 participants, 10 folds, one participant per stratum
  // per fold, every participant in exactly one fold.
  constexpr int kFoldTrials = 100;
  data::RelianceDataset ds;
  for (std::size_t k = 0; k < 60; ++k) {
    data::SessionRecord s;
    s.participant_id = data::participant_name(k);
    s.rcc_rate_stratum = data::kStrata[k % 6];
    ds.sessions.push_back(s);
  }
  for (int t = 0; t < kFoldTrials; ++t) {
    auto shuffled = ds;
    Rng r = Rng(1100).split(static_cast<std::uint64_t>(t));
    for (std::size_t i = shuffled.sessions.size(); i > 1; --i)
      std::swap(shuffled.sessions[i - 1], shuffled.sessions[r.below(i)]);
    const auto folds = data::stratified_kfold(shuffled, 10, 1200 + t);
    std::map<std::string, int> stratum_of, seen;
    for (const auto& s : ds.sessions) stratum_of[s.participant_id] = *s.rcc_rate_stratum;
    bool ok = folds.size() == 10;
    for (const auto& fold : folds) {
      std::map<int, int> per;
      for (const auto& id : fold) ++per[stratum_of.at(id)], ++seen[id];
      ok &= per.size() == 6 && std::all_of(per.begin(), per.end(), [](auto& kv) { return kv.second == 1; });
    }
    ok &= seen.size() == 60 && std::all_of(seen.begin(), seen.end(), [](auto& kv) { return kv.second == 1; });
    folds_ok += ok;
  }
  return {f_ok == kInstances && trend_ok == kInstances && folds_ok == kFoldTrials,
          "f_score " + std::to_string(f_ok) + "/" + std::to_string(kInstances) + ", linear_trend " +
              std::to_string(trend_ok) + "/" + std::to_string(kInstances) + ", stratified_kfold 60/10 " +
              std::to_string(folds_ok) + "/" + std::to_string(kFoldTrials)};
}

Outcome service_replay(Context& ctx) {
  if (!ctx.params || !ctx.thresholds) return {false, "no trained model or thresholds"};
  const auto dir = std::filesystem::temp_directory_path() / ("predrc_acceptance_logs_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  constexpr double kTarget = 0.4;
  service::SessionService svc(ctx.world, *ctx.params, *ctx.thresholds, ctx.config.service, dir.string(),
                              ctx.config.digest());
  const int port = svc.start("127.0.0.1", 0);
  httplib::Client client("127.0.0.1", port);
  auto post = [&](const std::string& path, const json& body) {
    auto res = client.Post(path, body.dump(), "application/json");
    return std::make_pair(res ? res->status : -1, res && res->status == 200 ? json::parse(res->body) : json());
  };
  auto get = [&](const std::string& path) {
    auto res = client.Get(path);
    return std::make_pair(res ? res->status : -1, res && res->status == 200 ? json::parse(res->body) : json());
  };

  std::vector<std::string> problems;
  const auto [created_status, created] = post("/api/sessions", {{"threshold_target", kTarget}});
  if (created_status != 200) return {false, "session creation failed"};
  const std::string base = "/api/sessions/" + created.at("session_id").get<std::string>();

  // Rejections on the first step.
  int rejected = 0;
  rejected += post(base + "/submit", {{"answer", "abcde"}}).first == 409;  // before the step is issued
  rejected += post(base + "/decision", {{"agent", "AI"}}).first == 409;
  std::vector<std::optional<double>> served_cues;
  bool done = false;
  int tamper_attempts = 0;
  for (int i = 0; i < 60 && !done; ++i) {
    const auto [st_status, step] = get(base + "/step");
    if (st_status != 200) {
      problems.push_back("step " + std::to_string(i));
      break;
    }
    served_cues.push_back(step.at("cue").is_null() ? std::nullopt : std::optional<double>(step.at("cue")));
    if (i == 0) rejected += post(base + "/submit", {{"answer", "abcde"}}).first == 409;  // before deciding
    const bool ai = step.at("cue").is_null() ? i % 2 == 0 : step.at("cue").get<double>() >= 0.5;
    const auto [dec_status, dec] = post(base + "/decision", {{"agent", ai ? "AI" : "human"}});
    json answer;
    if (ai) {
      std::string tampered = dec.at("ai_answer");
      tampered[4] = tampered[4] == '0' ? '1' : '0';
      if (tamper_attempts < 3) {  // the first three AI steps
        ++tamper_attempts;
        rejected += post(base + "/submit", {{"answer", tampered}}).first == 409;
      }
      answer = dec.at("ai_answer");
    } else {
      answer = step.at("render").at("text");
    }
    const auto [sub_status, sub] = post(base + "/submit", {{"answer", answer}});
    if (dec_status != 200 || sub_status != 200) problems.push_back("event at step " + std::to_string(i));
    done = sub.value("done", false);
  }
  const auto [sum_status, summary] = get(base + "/summary");
  rejected += post(base + "/decision", {{"agent", "AI"}}).first == 409;  // after completion
  svc.stop();

  std::string detail;
  try {
    const auto log_path = dir / (created.at("session_id").get<std::string>() + ".rcd.jsonl");
    const auto log = data::read_jsonl_file(log_path.string());
    const auto& rec = log.sessions.at(0);
    const double threshold = ctx.thresholds->threshold_for(kTarget);
    const auto replay = calib::replay_session(ctx.world.env, ctx.world.calib, &*ctx.params,
                                              calib::CuePolicy::pred_rc(threshold), rec);
    std::size_t matching = 0;
    for (std::size_t i = 0; i < rec.steps.size() && i < served_cues.size(); ++i)
      matching += rec.steps[i].decision && rec.steps[i].decision->provide == served_cues[i].has_value() &&
                  rec.steps[i].c == served_cues[i];
    const bool summary_ok = sum_status == 200 && summary.at("f1").get<double>() == replay.score.f1 &&
                            summary.at("precision").get<double>() == replay.score.precision &&
                            summary.at("recall").get<double>() == replay.score.recall &&
                            summary.at("cues_shown").get<std::size_t>() == replay.cues_shown &&
                            summary.at("steps").get<std::size_t>() == 60;
    if (matching != 60) problems.push_back("cue decisions matched " + std::to_string(matching) + "/60");
    if (!summary_ok) problems.push_back("summary differs from replay");
    detail = "60-step log replayed: " + std::to_string(matching) + "/60 cue decisions (" +
             std::to_string(replay.cues_shown) + " cues shown), summary f1 " + fmt("%.4f", replay.score.f1) +
             " reproduced; " + std::to_string(rejected) + "/7 out-of-order or tampered events rejected with 409";
  } catch (const std::exception& e) {
    problems.push_back(std::string("replay: ") + e.what());
  }
  std::filesystem::remove_all(dir);
  if (rejected != 7) problems.push_back("rejections " + std::to_string(rejected) + "/7");
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace
}  // namespace predrc

int main() {
  using namespace predrc;
  const std::vector<std::pair<const char*, std::function<Outcome(Context&)>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"masking and causality", masking_and_causality},
      {"environment calibration", environment_calibration},
      {"oracle recovery", oracle_recovery},
      {"f-score replication", fscore_replication},
      {"threshold mechanics", threshold_mechanics},
      {"determinism and persistence", determinism_and_persistence},
      {"metric oracles", metric_oracles},
      {"service replay", service_replay},
  };
  Context ctx;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %zu %-28s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
