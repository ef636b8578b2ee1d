/*
 * C interface to the ksivi library.
 *
 * Objects are opaque handles released with the matching *_free function.
 * Every fallible call returns a ksivi_status; on failure the message is
 * available from ksivi_last_error() on the same thread until the next call.
 * Sample matrices cross the boundary row-major, one sample per row.
 */
#ifndef KSIVI_KSIVI_H
#define KSIVI_KSIVI_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(KSIVI_BUILDING_LIBRARY)
#    define KSIVI_API __declspec(dllexport)
#  else
#    define KSIVI_API __declspec(dllimport)
#  endif
#else
#  define KSIVI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ksivi_status {
  KSIVI_OK = 0,
  KSIVI_ERR_INVALID_ARGUMENT = 1,
  KSIVI_ERR_DIMENSION = 2,
  KSIVI_ERR_CONFIG = 3,
  KSIVI_ERR_IO = 4,
  KSIVI_ERR_NUMERIC = 5,
  KSIVI_ERR_INTERNAL = 6
} ksivi_status;

typedef struct ksivi_config ksivi_config;
typedef struct ksivi_target ksivi_target;
typedef struct ksivi_model ksivi_model;

KSIVI_API const char* ksivi_version(void);
KSIVI_API const char* ksivi_last_error(void);
KSIVI_API const char* ksivi_status_name(ksivi_status status);

/* Strings returned through char** are owned by the caller. */
KSIVI_API void ksivi_string_free(char* s);

/* ---- experiment configuration ------------------------------------------ */

KSIVI_API ksivi_status ksivi_config_load(const char* path, ksivi_config** out);
KSIVI_API ksivi_status ksivi_config_from_preset(const char* name, ksivi_config** out);
/* Overrides one dotted key (e.g. "train.iterations") with a raw value. */
KSIVI_API ksivi_status ksivi_config_set(ksivi_config* cfg, const char* key, const char* value);
/* Resolved configuration as config-file text. */
KSIVI_API ksivi_status ksivi_config_dump(const ksivi_config* cfg, char** out_text);
KSIVI_API ksivi_status ksivi_config_validate(const ksivi_config* cfg);
KSIVI_API void ksivi_config_free(ksivi_config* cfg);
/* Newline-separated preset names. */
KSIVI_API ksivi_status ksivi_preset_names(char** out_text);

/* ---- end-to-end commands ------------------------------------------------ */

/* Writes checkpoint, trace, samples and manifest under the config's output
 * directory; a non-null out_dir overrides it. */
KSIVI_API ksivi_status ksivi_train(const ksivi_config* cfg, const char* out_dir);
KSIVI_API ksivi_status ksivi_sample_ground_truth(const ksivi_config* cfg, const char* out_dir);
/* metrics: comma-separated subset of sliced_wd,mmd,kl_knn,corr. JSON result. */
KSIVI_API ksivi_status ksivi_evaluate(const char* samples_a, const char* samples_b, const char* metrics, int n_proj,
                                      int knn_k, uint64_t seed, char** out_json);
KSIVI_API ksivi_status ksivi_diagnose(const char* checkpoint, int n_probes, uint64_t seed, int zero_probes,
                                      char** out_json);
KSIVI_API ksivi_status ksivi_generate_waveform(const char* path, int n_rows, uint64_t seed);
KSIVI_API ksivi_status ksivi_generate_cd_observations(const char* path, int n_steps, uint64_t seed);

/* ---- targets ------------------------------------------------------------ */

KSIVI_API ksivi_status ksivi_target_from_config(const ksivi_config* cfg, ksivi_target** out);
KSIVI_API int ksivi_target_dim(const ksivi_target* t);
KSIVI_API ksivi_status ksivi_target_log_density(const ksivi_target* t, const double* x, double* out);
KSIVI_API ksivi_status ksivi_target_score(const ksivi_target* t, const double* x, double* out);
KSIVI_API ksivi_status ksivi_target_hvp(const ksivi_target* t, const double* x, const double* v, double* out);
KSIVI_API void ksivi_target_free(ksivi_target* t);

/* ---- trained variational models ---------------------------------------- */

KSIVI_API ksivi_status ksivi_model_load(const char* checkpoint, ksivi_model** out);
KSIVI_API int ksivi_model_dim(const ksivi_model* m);
KSIVI_API int ksivi_model_mixing_dim(const ksivi_model* m);
/* Writes n samples into out (n * dim doubles, row-major). */
KSIVI_API ksivi_status ksivi_model_sample(const ksivi_model* m, int n, uint64_t seed, double* out);
KSIVI_API ksivi_status ksivi_model_save(const ksivi_model* m, const char* checkpoint);
/* Monte Carlo squared KSD of the model against a target. */
KSIVI_API ksivi_status ksivi_model_ksd2(const ksivi_model* m, const ksivi_target* t, int n, uint64_t seed,
                                        int ustat, double* out);
KSIVI_API void ksivi_model_free(ksivi_model* m);

#ifdef __cplusplus
}
#endif

#endif /* KSIVI_KSIVI_H */
