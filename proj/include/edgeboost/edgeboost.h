#ifndef EDGEBOOST_H
#define EDGEBOOST_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define EB_API __declspec(dllexport)
#else
#define EB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum eb_status {
  EB_OK = 0,
  EB_ERR_INVALID_ARGUMENT = 1,
  EB_ERR_INVALID_CONFIG = 2,
  EB_ERR_PARSE = 3,
  EB_ERR_VALIDATION = 4,
  EB_ERR_IO = 5,
  EB_ERR_LOAD = 6,
  EB_ERR_BUDGET_INFEASIBLE = 7,
  EB_ERR_TRAINING_DIVERGED = 8,
  EB_ERR_MASKED_ACTION = 9,
  EB_ERR_INTERNAL = 10
} eb_status;

typedef enum eb_format { EB_FORMAT_TEXT = 0, EB_FORMAT_CSV = 1, EB_FORMAT_JSON = 2 } eb_format;

typedef struct eb_config eb_config;
typedef struct eb_ensemble eb_ensemble;
typedef struct eb_qtable eb_qtable;

EB_API const char* eb_version(void);
EB_API const char* eb_status_name(eb_status status);

/* Message of the last failed call on this thread ("" after success). */
EB_API const char* eb_last_error(void);
/* Newline-separated warnings from the last call on this thread. */
EB_API const char* eb_last_warnings(void);

/* Strings returned through char** out-parameters are owned by the caller. */
EB_API void eb_string_free(char* s);

/* Project configuration. Loading validates the whole document. */
EB_API eb_status eb_config_load(const char* path, eb_config** out);
EB_API eb_status eb_config_set_seed(eb_config* cfg, uint64_t seed);
EB_API uint64_t eb_config_seed(const eb_config* cfg);
/* Overrides one setting by dotted key, e.g. "scheduler.beta" or "simulation.retrain".
   The config is revalidated; on failure it is left unchanged. */
EB_API eb_status eb_config_set(eb_config* cfg, const char* key, const char* value);
EB_API void eb_config_free(eb_config* cfg);

/* Pipeline commands; `summary` may be NULL. */
EB_API eb_status eb_build_ensemble(const eb_config* cfg, const char* out_dir, char** summary);
/* `trace_csv` may be NULL to use the configured trace. */
EB_API eb_status eb_train_scheduler(const eb_config* cfg, const char* ensemble_dir, const char* out_path,
                                    const char* trace_csv, char** summary);
/* Policies: "all", "fixed:k", "qtable:PATH". The all-N baseline always runs. */
EB_API eb_status eb_simulate(const eb_config* cfg, const char* ensemble_dir, const char* const* policies,
                             size_t policy_count, const char* out_dir, eb_format format, int jobs,
                             const char* trace_csv, char** table);
EB_API eb_status eb_report(const char* const* run_dirs, size_t count, eb_format format, char** table);

/* Trained ensemble from a build directory. */
EB_API eb_status eb_ensemble_load(const char* ensemble_dir, eb_ensemble** out);
EB_API size_t eb_ensemble_size(const eb_ensemble* e);
EB_API size_t eb_ensemble_input_size(const eb_ensemble* e);
EB_API int eb_ensemble_class_count(const eb_ensemble* e);
EB_API uint64_t eb_ensemble_learner_macs(const eb_ensemble* e, size_t index);
/* Weighted vote over the first k learners; `scores` (class_count entries) may be NULL. */
EB_API eb_status eb_ensemble_predict(const eb_ensemble* e, const double* input, size_t input_len, size_t k,
                                     int* label, double* scores);
EB_API void eb_ensemble_free(eb_ensemble* e);

/* Scheduler table. */
EB_API eb_status eb_qtable_load(const char* path, eb_qtable** out);
EB_API int eb_qtable_ensemble_size(const eb_qtable* q);
EB_API eb_status eb_qtable_value(const eb_qtable* q, int e_now, int e_last, int p_harv, int l, int r, int action,
                                 double* value);
EB_API eb_status eb_qtable_act(const eb_qtable* q, int e_now, int e_last, int p_harv, int l, int r, int* action);
EB_API void eb_qtable_free(eb_qtable* q);

#ifdef __cplusplus
}
#endif

#endif
