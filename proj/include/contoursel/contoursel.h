/* C interface of the contoursel library.
 *
 * Every function returns a cs_status; CS_OK is zero. On failure a
 * description is available from cs_last_error() on the same thread until the
 * next failing call. Handles are opaque and owned by the caller, who releases
 * them with the matching *_free function (NULL is accepted).
 *
 * String results are copied into (buf, cap). *needed, when not NULL, receives
 * the length including the terminator; a too small buffer gives
 * CS_INVALID_ARGUMENT and leaves buf untouched.
 */
#ifndef CONTOURSEL_H
#define CONTOURSEL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define CS_API __declspec(dllexport)
#else
#define CS_API __attribute__((visibility("default")))
#endif

typedef enum cs_status {
  CS_OK = 0,
  CS_INVALID_ARGUMENT = 1,
  CS_INVALID_PROBLEM = 2,
  CS_CONTRACT = 3,
  CS_DATA = 4,
  CS_IO = 5,
  CS_PARSE = 6,
  CS_TRAINING = 7,
  CS_SELECTION = 8,
  CS_PROTOCOL = 9,
  CS_CONFIG = 10,
  CS_INTERNAL = 11,
  CS_CHECK_FAILED = 12
} cs_status;

typedef enum cs_tie_policy { CS_TIES_DROP = 0, CS_TIES_PRATT = 1 } cs_tie_policy;

typedef struct cs_config cs_config;
typedef struct cs_instance cs_instance;
typedef struct cs_stack cs_stack;
typedef struct cs_model cs_model;

CS_API const char* cs_version(void);
CS_API const char* cs_last_error(void);
/* Stable lower-case name of a status ("ok", "config", ...). */
CS_API const char* cs_status_name(cs_status status);

/* Experiment configuration. */
CS_API cs_status cs_config_default(cs_config** out);
CS_API cs_status cs_config_parse(const char* json, cs_config** out);
CS_API cs_status cs_config_load(const char* path, cs_config** out);
/* JSON merge patch on top of the current values. */
CS_API cs_status cs_config_apply(cs_config* config, const char* json_patch);
CS_API cs_status cs_config_to_json(const cs_config* config, char* buf, size_t cap, size_t* needed);
CS_API void cs_config_free(cs_config* config);

/* Runs one command ("probe", "render", "gen-perf", "train", "evaluate",
 * "report", "stats", "gradcheck"). Its one-line summary is truncated to fit
 * summary (always terminated when cap > 0); *needed gets the full length. */
CS_API cs_status cs_run_command(const cs_config* config, const char* command, char* summary,
                                size_t cap, size_t* needed);

/* Problem instances. kind is inferred from the function name. */
CS_API cs_status cs_instance_create(const char* function, int dimension, int instance_index,
                                    uint64_t seed, cs_instance** out);
CS_API cs_status cs_instance_dimension(const cs_instance* inst, int* dimension);
CS_API cs_status cs_instance_optimum(const cs_instance* inst, double* f_opt, double* x_opt,
                                     size_t x_len);
CS_API cs_status cs_instance_evaluate(const cs_instance* inst, const double* x, size_t n, double* f);
CS_API cs_status cs_instance_evaluate_moo(const cs_instance* inst, const double* x, size_t n,
                                          double* f1, double* f2);
CS_API void cs_instance_free(cs_instance* inst);

/* Contour stacks of a single-objective config (views from instances 0..4). */
CS_API cs_status cs_stack_probe(const char* function, int dimension, uint64_t master_seed,
                                int r_probe, int r_out, int levels, cs_stack** out);
CS_API cs_status cs_stack_read(const char* path, cs_stack** out);
CS_API cs_status cs_stack_write(const cs_stack* stack, const char* path);
CS_API cs_status cs_stack_shape(const cs_stack* stack, int* views, int* resolution);
CS_API cs_status cs_stack_evaluations(const cs_stack* stack, int64_t* evaluations);
/* Copies view v (resolution^2 values, row-major) into out. */
CS_API cs_status cs_stack_view(const cs_stack* stack, int view, double* out, size_t len);
CS_API void cs_stack_free(cs_stack* stack);

/* Models. spec_json uses the same keys as the "model" config section. */
CS_API cs_status cs_model_create(const char* spec_json, uint64_t seed, cs_model** out);
CS_API cs_status cs_model_load(const char* path, cs_model** out);
CS_API cs_status cs_model_save(const cs_model* model, const char* path);
CS_API cs_status cs_model_parameter_count(const cs_model* model, size_t* count);
/* Predicts from objective_count stacks; out receives output_count values. */
CS_API cs_status cs_model_predict(const cs_model* model, const cs_stack* const* stacks,
                                  size_t stack_count, int dimension, double* out, size_t len);
/* Finite-difference gradient check of the reduced spec of the given variant. */
CS_API cs_status cs_gradcheck(const char* variant, int residual_blocks, uint64_t seed,
                              double* max_relative_error);
CS_API void cs_model_free(cs_model* model);

/* Metrics. points are interleaved (f1, f2) pairs. */
CS_API cs_status cs_hypervolume_2d(const double* points, size_t count, double ref1, double ref2,
                                   double* hv);
CS_API cs_status cs_wilcoxon(const double* a, const double* b, size_t n, cs_tie_policy ties,
                             double* w, double* p, size_t* n_effective);

#ifdef __cplusplus
}
#endif

#endif
