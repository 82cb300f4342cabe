#ifndef FINLAB_H
#define FINLAB_H

#pragma once

#include <stdbool.h>
#include <stddef.h>

typedef enum FinlabStatus {
  FINLAB_STATUS_OK = 0,
  FINLAB_STATUS_NULL_POINTER = 1,
  FINLAB_STATUS_INVALID_UTF8 = 2,
  FINLAB_STATUS_INVALID_ARGUMENT = 3,
  FINLAB_STATUS_PARSE = 4,
  FINLAB_STATUS_IMPOSSIBLE_HISTORY = 5,
  FINLAB_STATUS_RESOURCE_CAP = 6,
  FINLAB_STATUS_IO = 7,
  FINLAB_STATUS_PANIC = 8,
} FinlabStatus;

typedef enum FinlabAggregate {
  FINLAB_AGGREGATE_MEAN = 0,
  FINLAB_AGGREGATE_MAXIMIN = 1,
  FINLAB_AGGREGATE_WEIGHTED = 2,
} FinlabAggregate;

typedef struct FinlabInterpretation FinlabInterpretation;

typedef struct FinlabModel FinlabModel;

typedef struct FinlabReport FinlabReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *finlab_last_error(void);

// # Safety
// `s` must be null or a string returned by this library.
void finlab_string_free(char *s);

// Loads a builtin model (`table41`, `hitman`, `bernoulli:P`,
// `delusion63:ALPHA`, `delusion64`) or a model file.
//
// # Safety
// `spec` must be a NUL-terminated string and `model` writable.
enum FinlabStatus finlab_model_load(const char *spec, struct FinlabModel **model);

// Parses a model from its text format.
//
// # Safety
// `source` must be a NUL-terminated string and `model` writable.
enum FinlabStatus finlab_model_parse(const char *source, struct FinlabModel **model);

// # Safety
// `model` must be null or a handle from this library, not yet freed.
void finlab_model_free(struct FinlabModel *model);

// # Safety
// `model` must be a live handle; the output pointers may be null.
enum FinlabStatus finlab_model_dims(const struct FinlabModel *model,
                                    size_t *n_states,
                                    size_t *n_actions,
                                    size_t *n_observations);

// Probability of the observations given the actions, `rho(h)`.
//
// # Safety
// `actions` and `observations` must each hold `len` elements.
enum FinlabStatus finlab_model_history_probability(const struct FinlabModel *model,
                                                   const size_t *actions,
                                                   const size_t *observations,
                                                   size_t len,
                                                   double *probability);

// Best next action for a reward-maximizing agent after the given history.
// Observations factor as `o = o' * grid_len + reward_index`; utility is
// discounted geometrically with `gamma` over `horizon` steps.
//
// # Safety
// `actions`/`observations` must hold `len` elements and `grid` `grid_len`.
enum FinlabStatus finlab_model_best_action(const struct FinlabModel *model,
                                           const size_t *actions,
                                           const size_t *observations,
                                           size_t len,
                                           const double *grid,
                                           size_t grid_len,
                                           double gamma,
                                           size_t horizon,
                                           size_t *action);

// The three-element field with `+`, `*`, `0` and `1`.
struct FinlabInterpretation *finlab_interpretation_gf3(void);

// # Safety
// `source` must be a NUL-terminated string and `interp` writable.
enum FinlabStatus finlab_interpretation_parse(const char *source,
                                              struct FinlabInterpretation **interp);

// # Safety
// `interp` must be null or a handle from this library, not yet freed.
void finlab_interpretation_free(struct FinlabInterpretation *interp);

// Decides a statement in the interpretation.
//
// # Safety
// `interp` must be a live handle and `statement` a NUL-terminated string.
enum FinlabStatus finlab_decide(const struct FinlabInterpretation *interp,
                                const char *statement,
                                bool *verdict);

// Aggregates a profile of member values in `[0, 1]`. `alive` may be null
// (all alive); `weights` is only read for [`FinlabAggregate::Weighted`].
//
// # Safety
// Non-null arrays must hold `len` elements.
enum FinlabStatus finlab_aggregate(const double *values,
                                   const bool *alive,
                                   const double *weights,
                                   size_t len,
                                   enum FinlabAggregate kind,
                                   double *result);

// Runs an experiment by its command-line name. `config_json` may be null
// for defaults.
//
// # Safety
// `name` and non-null `config_json` must be NUL-terminated strings.
enum FinlabStatus finlab_experiment_run(const char *name,
                                        const char *config_json,
                                        struct FinlabReport **report);

// # Safety
// `report` must be null or a handle from this library, not yet freed.
void finlab_report_free(struct FinlabReport *report);

// Whether every checked metric passed; false for a null handle.
//
// # Safety
// `report` must be null or a live handle.
bool finlab_report_all_pass(const struct FinlabReport *report);

// Numeric value of a named metric.
//
// # Safety
// `report` must be a live handle and `name` a NUL-terminated string.
enum FinlabStatus finlab_report_metric(const struct FinlabReport *report,
                                       const char *name,
                                       double *value);

// The report as JSON; release with [`finlab_string_free`].
//
// # Safety
// `report` must be a live handle and `json` writable.
enum FinlabStatus finlab_report_json(const struct FinlabReport *report, char **json);

// Writes `report.json`, `metrics.csv` and table CSVs into `dir`.
//
// # Safety
// `report` must be a live handle and `dir` a NUL-terminated string.
enum FinlabStatus finlab_report_emit(const struct FinlabReport *report, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FINLAB_H */
