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

#ifndef PREDRC_PREDRC_H_
#define PREDRC_PREDRC_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PREDRC_API __declspec(dllexport)
#else
#define PREDRC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Every function returning predrc_status leaves a message for
 * predrc_last_error() on failure. Messages are per thread. */
typedef enum predrc_status {
  PREDRC_OK = 0,
  PREDRC_INVALID_ARGUMENT = 1,
  PREDRC_PARSE = 2,
  PREDRC_IO = 3,
  PREDRC_PROTOCOL = 4,
  PREDRC_NOT_FOUND = 5,
  PREDRC_NUMERIC = 6,
  PREDRC_STATE = 7,
  PREDRC_INTERNAL = 100
} predrc_status;

typedef struct predrc_engine predrc_engine;
typedef struct predrc_service predrc_service;

typedef void (*predrc_log_fn)(void* user, const char* message);

PREDRC_API const char* predrc_version(void);
PREDRC_API const char* predrc_status_name(predrc_status status);
PREDRC_API const char* predrc_last_error(void);
PREDRC_API void predrc_free_string(char* s);

/* config_path may be NULL: $PREDRC_CONFIG is used if set, else defaults. */
PREDRC_API predrc_status predrc_engine_create(const char* config_path, predrc_engine** out);
PREDRC_API predrc_status predrc_engine_create_from_json(const char* config_json, predrc_engine** out);
PREDRC_API void predrc_engine_destroy(predrc_engine* engine);
PREDRC_API void predrc_engine_set_log(predrc_engine* engine, predrc_log_fn fn, void* user);
/* Effective configuration as JSON; release with predrc_free_string. */
PREDRC_API predrc_status predrc_engine_config_json(const predrc_engine* engine, char** out);

/* Configured path for "dataset", "checkpoints", "reports" or "session_logs";
 * NULL for any other name. Valid until the engine is destroyed. */
PREDRC_API const char* predrc_engine_path(const predrc_engine* engine, const char* name);

PREDRC_API predrc_status predrc_generate_dataset(predrc_engine* engine, size_t participants,
                                                 uint64_t seed, const char* out_path);

typedef struct predrc_train_options {
  const char* dataset_path;
  /* Separate holdout file; when NULL, fold `fold` of a stratified
   * `folds`-fold split of the dataset is held out. */
  const char* holdout_path;
  size_t folds;
  size_t fold;
  uint64_t fold_seed;
  /* 0 keeps the configured value. */
  size_t epochs;
  const char* checkpoint_out; /* best checkpoint */
  const char* metrics_out;    /* per-epoch CSV; may be NULL */
} predrc_train_options;

typedef struct predrc_train_result {
  size_t best_epoch;
  double best_accuracy;
  double final_train_loss;
} predrc_train_result;

PREDRC_API void predrc_train_options_init(predrc_train_options* options);
PREDRC_API predrc_status predrc_train(predrc_engine* engine, const predrc_train_options* options,
                                      predrc_train_result* result);

typedef struct predrc_cv_result {
  double mean_accuracy;
  double ci_low;
  double ci_high;
} predrc_cv_result;

PREDRC_API predrc_status predrc_crossval(predrc_engine* engine, const char* dataset_path, size_t k,
                                         uint64_t fold_seed, const char* csv_out,
                                         predrc_cv_result* result);

/* Derives one threshold per target cue fraction from the dataset and writes
 * the threshold file. targets may be NULL to use the configured targets.
 * sweep_csv_out (optional) receives threshold,cues,fraction rows. */
PREDRC_API predrc_status predrc_sweep(predrc_engine* engine, const char* dataset_path,
                                      const char* checkpoint_path, const double* targets,
                                      size_t num_targets, const char* thresholds_out,
                                      const char* sweep_csv_out);

/* Paired Pred-RC versus random comparison at every target in the threshold
 * file. Writes <out_prefix>.csv, <out_prefix>.long.csv and <out_prefix>.trend.csv. */
PREDRC_API predrc_status predrc_evaluate(predrc_engine* engine, const char* checkpoint_path,
                                         const char* thresholds_path, size_t sessions_per_cell,
                                         uint64_t seed, const char* out_prefix);

/* HTTP session service on a background thread. port 0 picks a free port;
 * host NULL uses the configured address. */
PREDRC_API predrc_status predrc_service_start(predrc_engine* engine, const char* checkpoint_path,
                                              const char* thresholds_path, const char* host,
                                              int port, predrc_service** out);
PREDRC_API int predrc_service_port(const predrc_service* service);
PREDRC_API void predrc_service_stop(predrc_service* service);

/* Serves on the calling thread until the process is stopped. */
PREDRC_API predrc_status predrc_serve(predrc_engine* engine, const char* checkpoint_path,
                                      const char* thresholds_path, const char* host, int port);

#ifdef __cplusplus
}
#endif

#endif /* PREDRC_PREDRC_H_ */
