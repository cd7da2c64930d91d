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

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "predrc/predrc.h"

namespace {

void log_to_stderr(void*, const char* message) { std::fprintf(stderr, "%s\n", message); }

int check(predrc_status status) {
  if (status == PREDRC_OK) return 0;
  std::fprintf(stderr, "error (%s): %s\n", predrc_status_name(status), predrc_last_error());
  return 1;
}

std::vector<double> parse_targets(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument(item);
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"predrc: reliance model training, cue calibration and the session service"};
  app.require_subcommand(1);
  app.set_version_flag("--version", predrc_version());

  std::string config;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "Configuration file (defaults to $PREDRC_CONFIG, then built-ins)");
  };

  auto* gen = app.add_subcommand("gen-data", "Generate a simulated reliance dataset");
  std::string gen_out;
  std::size_t participants = 120;
  std::uint64_t seed = 1;
  add_config(gen);
  gen->add_option("--out", gen_out, "Output .rcd.jsonl file (default: paths.dataset)");
  gen->add_option("--participants", participants, "Participants, a multiple of 6")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Generator seed");

  auto* tr = app.add_subcommand("train", "Train the reliance model");
  std::string data, holdout, ckpt_out, metrics_out;
  std::size_t folds = 10, fold = 0, epochs = 0;
  std::uint64_t fold_seed = 1;
  add_config(tr);
  tr->add_option("--data", data, "Training dataset (default: paths.dataset)");
  tr->add_option("--out", ckpt_out, "Best checkpoint output (default: <paths.checkpoints>/model.ckpt)");
  tr->add_option("--holdout", holdout, "Separate holdout dataset (default: one fold of --data)");
  tr->add_option("--metrics", metrics_out, "Per-epoch metrics CSV (default: <out>.metrics.csv)");
  tr->add_option("--folds", folds, "Folds used to carve the holdout")->check(CLI::Range(2, 1000));
  tr->add_option("--fold", fold, "Held-out fold index");
  tr->add_option("--fold-seed", fold_seed, "Fold assignment seed");
  tr->add_option("--epochs", epochs, "Override the configured epoch count")->check(CLI::PositiveNumber);

  auto* cv = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  std::size_t k = 10;
  std::string cv_out;
  add_config(cv);
  cv->add_option("--data", data, "Dataset (default: paths.dataset)");
  cv->add_option("--k", k, "Number of folds")->check(CLI::Range(2, 1000));
  cv->add_option("--fold-seed", fold_seed, "Fold assignment seed");
  cv->add_option("--out", cv_out, "Summary CSV (default: <paths.reports>/crossval.csv)");

  auto* sw = app.add_subcommand("sweep", "Derive cue thresholds for target cue fractions");
  std::string ckpt, targets_text, thresholds_out, sweep_csv;
  add_config(sw);
  sw->add_option("--data", data, "Sessions the model was not trained on (default: paths.dataset)");
  sw->add_option("--ckpt", ckpt, "Checkpoint (default: <paths.checkpoints>/model.ckpt)");
  sw->add_option("--targets", targets_text, "Comma-separated cue fractions (default: configured)");
  sw->add_option("--out", thresholds_out, "Threshold file (default: <paths.checkpoints>/thresholds.json)");
  sw->add_option("--sweep-csv", sweep_csv, "Cue count over a threshold grid");

  auto* ev = app.add_subcommand("evaluate", "Compare Pred-RC with random cue placement");
  std::string thresholds, ev_out;
  std::size_t sessions = 200;
  add_config(ev);
  ev->add_option("--ckpt", ckpt, "Checkpoint (default: <paths.checkpoints>/model.ckpt)");
  ev->add_option("--thresholds", thresholds, "Threshold file (default: <paths.checkpoints>/thresholds.json)");
  ev->add_option("--sessions", sessions, "Sessions per cell")->check(CLI::PositiveNumber);
  ev->add_option("--seed", seed, "Evaluation seed");
  ev->add_option("--out", ev_out, "Output prefix for the report CSVs (default: <paths.reports>/report)");

  auto* sv = app.add_subcommand("serve", "Run the HTTP session service");
  std::string host;
  int port = 0;
  add_config(sv);
  sv->add_option("--ckpt", ckpt, "Checkpoint (default: <paths.checkpoints>/model.ckpt)");
  sv->add_option("--thresholds", thresholds, "Threshold file (default: <paths.checkpoints>/thresholds.json)");
  sv->add_option("--host", host, "Bind address (default: configured)");
  sv->add_option("--port", port, "Port (default: configured)")->check(CLI::Range(1, 65535));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::vector<double> targets;
  if (!targets_text.empty()) {
    try {
      targets = parse_targets(targets_text);
    } catch (const std::exception&) {
      std::fprintf(stderr, "--targets: expected comma-separated numbers\n");
      return 2;
    }
  }

  predrc_engine* engine = nullptr;
  if (int rc = check(predrc_engine_create(config.empty() ? nullptr : config.c_str(), &engine))) return rc;
  predrc_engine_set_log(engine, log_to_stderr, nullptr);

  // Unset paths fall back to the configured locations.
  auto fill = [](std::string& value, const std::string& fallback) {
    if (value.empty()) value = fallback;
  };
  const std::string dataset_path = predrc_engine_path(engine, "dataset");
  const std::string checkpoints = predrc_engine_path(engine, "checkpoints");
  const std::string reports = predrc_engine_path(engine, "reports");
  fill(gen_out, dataset_path);
  fill(data, dataset_path);
  fill(ckpt_out, checkpoints + "/model.ckpt");
  fill(ckpt, checkpoints + "/model.ckpt");
  fill(thresholds_out, checkpoints + "/thresholds.json");
  fill(thresholds, checkpoints + "/thresholds.json");
  fill(cv_out, reports + "/crossval.csv");
  fill(ev_out, reports + "/report");

  int rc = 0;
  if (*gen) {
    rc = check(predrc_generate_dataset(engine, participants, seed, gen_out.c_str()));
  } else if (*tr) {
    predrc_train_options opt;
    predrc_train_options_init(&opt);
    if (metrics_out.empty()) metrics_out = ckpt_out + ".metrics.csv";
    opt.dataset_path = data.c_str();
    opt.holdout_path = holdout.empty() ? nullptr : holdout.c_str();
    opt.folds = folds;
    opt.fold = fold;
    opt.fold_seed = fold_seed;
    opt.epochs = epochs;
    opt.checkpoint_out = ckpt_out.c_str();
    opt.metrics_out = metrics_out.c_str();
    predrc_train_result res{};
    rc = check(predrc_train(engine, &opt, &res));
    if (rc == 0)
      std::printf("best_epoch %zu holdout_accuracy %.4f\n", res.best_epoch, res.best_accuracy);
  } else if (*cv) {
    predrc_cv_result res{};
    rc = check(predrc_crossval(engine, data.c_str(), k, fold_seed, cv_out.c_str(), &res));
    if (rc == 0)
      std::printf("mean_accuracy %.4f ci95 [%.4f, %.4f]\n", res.mean_accuracy, res.ci_low, res.ci_high);
  } else if (*sw) {
    rc = check(predrc_sweep(engine, data.c_str(), ckpt.c_str(), targets.data(), targets.size(),
                            thresholds_out.c_str(), sweep_csv.empty() ? nullptr : sweep_csv.c_str()));
  } else if (*ev) {
    rc = check(predrc_evaluate(engine, ckpt.c_str(), thresholds.c_str(), sessions, seed, ev_out.c_str()));
  } else if (*sv) {
    rc = check(predrc_serve(engine, ckpt.c_str(), thresholds.c_str(), host.empty() ? nullptr : host.c_str(),
                            port));
  }
  predrc_engine_destroy(engine);
  return rc;
}
