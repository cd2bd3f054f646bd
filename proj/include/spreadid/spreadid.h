/* SPDX-License-Identifier: Apache-2.0 */
/*
 * spreadid C API.
 *
 * Every object is an opaque handle owned by the caller and released with its
 * matching *_free function (passing NULL is a no-op). Functions return a
 * spid_status; on failure a human-readable message for the calling thread is
 * available from spid_last_error() until the next failing call.
 *
 * Complex arrays cross the boundary as interleaved doubles (re, im, re, im, ...)
 * in row-major order.
 */
#ifndef SPREADID_H
#define SPREADID_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPREADID_BUILDING_LIBRARY)
#define SPID_API __attribute__((visibility("default")))
#else
#define SPID_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spid_status {
    SPID_OK = 0,
    SPID_ERR_INVALID = 1,   /* violated precondition, malformed input or config */
    SPID_ERR_NUMERICAL = 2, /* rank deficiency, failed factorization, solver failure */
    SPID_ERR_BUDGET = 3,    /* exhaustive search would exceed the enumeration budget */
    SPID_ERR_IO = 4,        /* file cannot be read or written, or is malformed */
    SPID_ERR_INTERNAL = 5
} spid_status;

typedef enum spid_probing_kind {
    SPID_PROBING_RANDOM_DISC = 0,
    SPID_PROBING_ALLTOP = 1,
    SPID_PROBING_CUSTOM = 2
} spid_probing_kind;

typedef enum spid_solver_kind { SPID_SOLVER_MUSIC = 0, SPID_SOLVER_OMP = 1, SPID_SOLVER_ORACLE = 2 } spid_solver_kind;

typedef enum spid_rank_rule { SPID_RANK_RELATIVE = 0, SPID_RANK_NOISE_FLOOR = 1 } spid_rank_rule;

typedef struct spid_grid spid_grid;
typedef struct spid_matrix spid_matrix;
typedef struct spid_probing spid_probing;
typedef struct spid_spreading spid_spreading;
typedef struct spid_signal spid_signal;
typedef struct spid_result spid_result;
typedef struct spid_witness spid_witness;

/* Solver knobs. Zero/negative "optional" fields mean "use the default". */
typedef struct spid_solver_options {
    double rank_tol;              /* relative singular-value cutoff */
    spid_rank_rule rank_rule;
    int signal_dim;               /* > 0 overrides the rank estimate */
    int music_top_k;              /* > 0 selects the k best columns, else threshold */
    double music_threshold;
    double omp_residual_tol;
    int omp_max_support;          /* > 0 overrides the default (number of rows) */
    double reconstruction_tol;
    int oracle_max_cardinality;   /* > 0 overrides the default (number of rows) */
    double oracle_tol;
} spid_solver_options;

SPID_API const char* spid_version(void);
SPID_API const char* spid_last_error(void);
SPID_API const char* spid_status_string(spid_status status);

/* Receives every library warning; NULL restores the default (stderr). */
typedef void (*spid_warning_fn)(const char* message, void* user);
SPID_API void spid_set_warning_handler(spid_warning_fn fn, void* user);

/* Strings returned through char** are released with spid_string_free. */
SPID_API void spid_string_free(char* s);

/* ---- grid ---------------------------------------------------------------- */
SPID_API spid_status spid_grid_create(int L, int E, int D, double T, int require_prime_L, spid_grid** out);
SPID_API void spid_grid_free(spid_grid* g);
SPID_API int spid_grid_L(const spid_grid* g);
SPID_API int spid_grid_E(const spid_grid* g);
SPID_API int spid_grid_D(const spid_grid* g);

/* ---- dense complex matrices ------------------------------------------------ */
SPID_API spid_status spid_matrix_create(size_t rows, size_t cols, const double* interleaved, spid_matrix** out);
SPID_API void spid_matrix_free(spid_matrix* m);
SPID_API size_t spid_matrix_rows(const spid_matrix* m);
SPID_API size_t spid_matrix_cols(const spid_matrix* m);
/* Copies 2*rows*cols doubles into `interleaved`. */
SPID_API spid_status spid_matrix_copy_data(const spid_matrix* m, double* interleaved, size_t capacity);
SPID_API spid_status spid_matrix_save(const spid_matrix* m, const char* path);
SPID_API spid_status spid_matrix_load(const char* path, spid_matrix** out);

/* ---- probing sequences and the measurement matrix A_c ---------------------- */
SPID_API spid_status spid_probing_alltop(int L, spid_probing** out);
SPID_API spid_status spid_probing_random_disc(int L, uint64_t seed, spid_probing** out);
/* `c` is an L x 1 (or 1 x L) matrix. */
SPID_API spid_status spid_probing_custom(const spid_matrix* c, spid_probing** out);
SPID_API spid_status spid_probing_create(spid_probing_kind kind, int L, uint64_t seed, spid_probing** out);
SPID_API void spid_probing_free(spid_probing* p);
SPID_API int spid_probing_L(const spid_probing* p);
/* The L x L^2 matrix A_c. */
SPID_API spid_status spid_probing_matrix(const spid_probing* p, spid_matrix** out);
SPID_API spid_status spid_probing_sequence(const spid_probing* p, spid_matrix** out);
/* Exhaustive spark search up to `max_cardinality` columns; *spark = -1 if
 * every subset of that size is independent. */
SPID_API spid_status spid_spark(const spid_matrix* m, int max_cardinality, int* spark);

/* ---- spreading functions and the channel ----------------------------------- */
/* Random support of `cardinality` cells with CN(0,1) samples. */
SPID_API spid_status spid_spreading_random(const spid_grid* g, int cardinality, uint64_t seed, spid_spreading** out);
/* Samples are an (E*L) x (D*L) matrix; the support is every cell with a nonzero sample. */
SPID_API spid_status spid_spreading_from_samples(const spid_grid* g, const spid_matrix* samples, spid_spreading** out);
SPID_API void spid_spreading_free(spid_spreading* s);
SPID_API spid_status spid_spreading_samples(const spid_spreading* s, spid_matrix** out);
/* Unknown matrix S (L^2 x E*D) in column-index order k*L + m. */
SPID_API spid_status spid_spreading_unknowns(const spid_spreading* s, spid_matrix** out);
SPID_API size_t spid_spreading_support(const spid_spreading* s, int* column_indices, size_t capacity);

/* Noiseless response; snr_db = +INFINITY skips noise. */
SPID_API spid_status spid_simulate(const spid_spreading* s, const spid_probing* p, double snr_db, uint64_t noise_seed,
                                   spid_signal** out);
/* Wraps an (E*D*L) x 1 sample vector as a received signal on grid g. */
SPID_API spid_status spid_signal_from_samples(const spid_grid* g, const spid_matrix* y, spid_signal** out);
SPID_API void spid_signal_free(spid_signal* y);
SPID_API spid_status spid_signal_samples(const spid_signal* y, spid_matrix** out);
/* Discrete Zak transform followed by assembly into Z (L x E*D). */
SPID_API spid_status spid_measure(const spid_signal* y, spid_matrix** Z_out);

/* ---- recovery -------------------------------------------------------------- */
SPID_API void spid_solver_options_default(spid_solver_options* opts);
SPID_API spid_status spid_recover(const spid_grid* g, const spid_matrix* Z, const spid_probing* p,
                                  spid_solver_kind solver, const spid_solver_options* opts, spid_result** out);
/* Uses only the Zak rows listed in `rows` (P of them). */
SPID_API spid_status spid_recover_compressive(const spid_grid* g, const spid_matrix* Z, const spid_probing* p,
                                              const int* rows, size_t P, spid_solver_kind solver,
                                              const spid_solver_options* opts, spid_result** out);
SPID_API void spid_result_free(spid_result* r);
SPID_API size_t spid_result_support(const spid_result* r, int* column_indices, size_t capacity);
SPID_API int spid_result_rank(const spid_result* r);
/* 1 unique, 0 not unique, -1 not determined by this solver. */
SPID_API int spid_result_unique(const spid_result* r);
SPID_API int spid_result_failed(const spid_result* r);
/* Recovered S rows (|support| x E*D). */
SPID_API spid_status spid_result_coefficients(const spid_result* r, spid_matrix** out);
SPID_API spid_status spid_result_to_json(const spid_result* r, char** json);

/* ---- analysis -------------------------------------------------------------- */
SPID_API spid_status spid_stability(const spid_grid* g, const spid_probing* p, const int* column_indices, size_t n,
                                    double* alpha, double* beta);
SPID_API spid_status spid_counterexample(const spid_probing* p, int K, uint64_t seed, spid_witness** out);
SPID_API void spid_witness_free(spid_witness* w);
SPID_API spid_status spid_witness_to_json(const spid_witness* w, char** json);
SPID_API spid_status spid_relative_sq_error(const spid_matrix* estimate, const spid_matrix* truth, double* out);

/* ---- experiment harness ---------------------------------------------------- */
/* Parses and validates a JSON experiment config. */
SPID_API spid_status spid_config_check(const char* json_text);
/* Runs a sweep; threads <= 0 uses SPREADID_THREADS or the core count.
 * trials_csv_path may be NULL. include_timing adds runtime_ms to the trial CSV. */
SPID_API spid_status spid_sweep_run(const char* json_text, int threads, const char* sweep_csv_path,
                                    const char* trials_csv_path, int include_timing);
SPID_API int spid_default_threads(void);

#ifdef __cplusplus
}
#endif

#endif /* SPREADID_H */
