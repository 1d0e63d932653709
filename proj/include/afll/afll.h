/* AFLL — adaptive feedback-loop load control, C API.
 *
 * The library simulates a broadcast game server with feedback-generating
 * clients, runs the adaptive throttler with background weight learning, and
 * reports per-second metrics plus summary statistics. All functions are
 * thread-compatible; handles must not be shared across threads without
 * external synchronization. Functions returning a pointer yield NULL on
 * failure; functions returning afll_status yield AFLL_OK (0) on success.
 * afll_last_error() describes the most recent failure on this thread.
 */

#ifndef AFLL_H
#define AFLL_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AFLL_API __declspec(dllexport)
#else
#define AFLL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum afll_status {
    AFLL_OK = 0,
    AFLL_ERR_INVALID_ARGUMENT = 1,
    AFLL_ERR_PARSE = 2,
    AFLL_ERR_IO = 3,
    AFLL_ERR_PRECONDITION = 4,
    AFLL_ERR_INTERNAL = 5
} afll_status;

#define AFLL_MESSAGE_TYPE_COUNT 6
#define AFLL_MAX_SPIKE_THRESHOLDS 3

AFLL_API const char* afll_status_str(afll_status status);
AFLL_API const char* afll_last_error(void);
AFLL_API void afll_version(int* major, int* minor, int* patch);

/* ---- configuration ---------------------------------------------------- */

typedef struct afll_config afll_config;

AFLL_API afll_config* afll_config_default(void);
AFLL_API afll_config* afll_config_load(const char* path);
AFLL_API afll_config* afll_config_parse(const char* json_text);
AFLL_API afll_status afll_config_save(const afll_config* cfg, const char* path);
AFLL_API char* afll_config_dump(const afll_config* cfg); /* free with afll_string_free */
AFLL_API void afll_string_free(char* s);
AFLL_API void afll_config_free(afll_config* cfg);

/* Field access by JSON pointer, e.g. "/learning/alpha" or
 * "/experiment/num_clients". Setting revalidates the whole config. */
AFLL_API afll_status afll_config_set_f64(afll_config* cfg, const char* key, double value);
AFLL_API afll_status afll_config_set_i64(afll_config* cfg, const char* key, int64_t value);
AFLL_API afll_status afll_config_set_bool(afll_config* cfg, const char* key, int value);
AFLL_API afll_status afll_config_set_str(afll_config* cfg, const char* key, const char* value);
AFLL_API afll_status afll_config_get_f64(const afll_config* cfg, const char* key, double* out);
AFLL_API afll_status afll_config_get_i64(const afll_config* cfg, const char* key, int64_t* out);

/* ---- kernels ----------------------------------------------------------- */

/* 0.6*min(Q/100,1) + 0.3*T + 0.1*M clamped to [0,1]; negative Q or
 * out-of-range T/M fail with AFLL_ERR_PRECONDITION. */
AFLL_API afll_status afll_load_score(int64_t queue_size, double contention,
                                     double memory_ratio, double* out);
AFLL_API afll_status afll_queue_penalty(int64_t queue_size, int64_t knee, int64_t divisor,
                                        double* out);

/* ---- experiments -------------------------------------------------------- */

typedef struct afll_run afll_run;

typedef struct afll_run_summary {
    double cost_mean;
    double cost_median;
    double cost_std;
    double cost_p95;
    double cost_p99;
    double contention_mean;
    double contention_median;
    double pct_contention_100;
    double load_mean;
    double blocking_rate;
    double final_weights[AFLL_MESSAGE_TYPE_COUNT];
    double spike_thresholds[AFLL_MAX_SPIKE_THRESHOLDS];
    int64_t spike_counts[AFLL_MAX_SPIKE_THRESHOLDS];
    double spike_fractions[AFLL_MAX_SPIKE_THRESHOLDS];
    int spike_threshold_count;
    int64_t seconds;
    uint64_t seed;
} afll_run_summary;

/* Runs `repetitions` simulations with derived seeds. `out_dir` may be NULL
 * to skip CSV output; otherwise rep<k>/records.csv, rep<k>/learn.csv,
 * rep<k>/impact.csv and summary.json are written beneath it. */
AFLL_API afll_run* afll_run_execute(const afll_config* cfg, int repetitions,
                                    const char* out_dir);
AFLL_API int afll_run_rep_count(const afll_run* run);
AFLL_API afll_status afll_run_summary_get(const afll_run* run, int rep,
                                          afll_run_summary* out);
/* Post-run invariant check (critical delivery, conservation, weight bounds,
 * hot-path purity). Returns AFLL_OK or AFLL_ERR_PRECONDITION; the report, when
 * requested, is newline-separated. */
AFLL_API afll_status afll_run_check(const afll_run* run, char* report, size_t report_cap);
AFLL_API void afll_run_free(afll_run* run);

/* ---- statistics --------------------------------------------------------- */

AFLL_API afll_status afll_percentile(const double* xs, size_t n, double q, double* out);
AFLL_API afll_status afll_welch_t_test(const double* a, size_t na, const double* b, size_t nb,
                                       double* t, double* p);
AFLL_API afll_status afll_cohens_d(const double* a, size_t na, const double* b, size_t nb,
                                   double* d);
AFLL_API afll_status afll_cv_percent(const double* xs, size_t n, double* out);

/* ---- CSV access ---------------------------------------------------------- */

typedef struct afll_series afll_series;

/* Loads one numeric column from a CSV file written by this library. */
AFLL_API afll_series* afll_series_load(const char* csv_path, const char* column);
AFLL_API size_t afll_series_len(const afll_series* s);
AFLL_API const double* afll_series_data(const afll_series* s);
AFLL_API void afll_series_free(afll_series* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* AFLL_H */
