/* randlmi — randomized solving of uncertain LMI/BMI programs.
 *
 * C interface to the shared library. All functions return a status code from
 * randlmi_status; RANDLMI_OK means success. Functions that can fail in
 * interesting ways accept an optional char** which receives a malloc'd
 * message (free with randlmi_string_free). Returned strings and handles are
 * owned by the caller.
 */

#ifndef RANDLMI_H
#define RANDLMI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum randlmi_status {
    RANDLMI_OK = 0,
    RANDLMI_ERR_USAGE = 1,      /* bad arguments / parameter domain */
    RANDLMI_ERR_SCHEMA = 2,     /* problem file failed validation */
    RANDLMI_ERR_EVAL = 3,       /* expression evaluation error (e.g. division by zero) */
    RANDLMI_ERR_INFEASIBLE = 4, /* scenario program infeasible */
    RANDLMI_ERR_NUMERIC = 5,    /* solver numerical failure */
    RANDLMI_ERR_INTERNAL = 6
} randlmi_status;

typedef struct randlmi_problem randlmi_problem;
typedef struct randlmi_result randlmi_result;   /* one scenario solve */
typedef struct randlmi_outcome randlmi_outcome; /* one sequential run */

const char* randlmi_version(void);

void randlmi_string_free(char* s);

/* ---- problems ---------------------------------------------------------- */

int randlmi_problem_load_file(const char* path, randlmi_problem** out, char** err);
int randlmi_problem_load_json(const char* json_text, randlmi_problem** out, char** err);
void randlmi_problem_free(randlmi_problem* p);

/* JSON object with name, kind, m_theta, m_x, m_y, n_sum, strictness,
 * parameter and variable listings. */
int randlmi_problem_info_json(const randlmi_problem* p, char** out_json);

/* ---- closed-form bounds ------------------------------------------------ */

int randlmi_vc_bound(int m_theta, int n, int nonstrict, double* out_d);

/* one_sided = 0 gives the two-sided bound. Outputs the unrounded VC bound d
 * and the integer sample count N. */
int randlmi_sample_bound(double epsilon, double delta, double rho, int m_theta, int n,
                         int nonstrict, int one_sided, double* out_d, long long* out_n,
                         char** err);

/* Validation-sample bound M_k for iteration k of the sequential scheme.
 * Pass a <= 0 for "a = infinity" (admitted only with rho = 0). */
int randlmi_validation_bound(long long k, long long kt, double alpha, double a, double epsilon,
                             double delta, double rho, long long* out_m, char** err);

int randlmi_p_series(long long kt, double alpha, double* out, char** err);

/* ---- scenario solving --------------------------------------------------- */

/* options_json (all fields optional):
 *   {"samples": 100, "seed": 1, "epsilon":..., "delta":..., "rho":...,
 *    "auto_samples": true, "sigma":..., "box_radius":..., "restarts":...,
 *    "max_alt_rounds":..., "y_init":[...], "scenarios_csv": "..."}
 * auto_samples derives the count from the one-sided bound. scenarios_csv
 * supplies an explicit sample set instead of drawing one. */
int randlmi_solve(const randlmi_problem* p, const char* options_json, randlmi_result** out,
                  char** err);
void randlmi_result_free(randlmi_result* r);

int randlmi_result_json(const randlmi_result* r, char** out_json);
int randlmi_result_status(const randlmi_result* r); /* randlmi_status of the solve */
double randlmi_result_objective(const randlmi_result* r);
int randlmi_result_theta(const randlmi_result* r, double* buf, size_t buf_len,
                         size_t* out_len);

/* ---- sequential runs ---------------------------------------------------- */

/* config_json:
 *   {"epsilon":0.2, "delta":0.01, "rho":0, "kt":10, "bound_kt":0,
 *    "alpha":-1, "a":-1, "seed":1, "solver": {...solver options...}}
 */
int randlmi_sequential_run(const randlmi_problem* p, const char* config_json,
                           randlmi_outcome** out, char** err);
void randlmi_outcome_free(randlmi_outcome* o);

/* include_volatile = 0 omits wall-clock fields so reruns hash identically */
int randlmi_outcome_json(const randlmi_outcome* o, int include_volatile, char** out_json);
int randlmi_outcome_status(const randlmi_outcome* o); /* 0 certified, 1 infeasible, 2 loop cap */

/* Loads an outcome back from its JSON form (for auditing saved runs). */
int randlmi_outcome_load_json(const char* json_text, randlmi_outcome** out, char** err);

/* Fresh a-posteriori violation estimate with an exact binomial interval. */
int randlmi_audit(const randlmi_problem* p, const randlmi_outcome* o, long long samples,
                  uint64_t seed, double epsilon, double delta, double rho, double confidence,
                  char** out_json, char** err);

/* ---- sampling ----------------------------------------------------------- */

/* Deterministic child-stream seed from (master, purpose tag, index). The same
 * derivation drives design/validation/audit draws inside the library. */
uint64_t randlmi_derive_seed(uint64_t master, const char* purpose, uint64_t k);

/* CSV with one header row of parameter names and one row per sample. */
int randlmi_scenarios_csv(const randlmi_problem* p, long long n, uint64_t seed,
                          const char* purpose, long long k, char** out_csv, char** err);

/* Empirical violation of theta over an explicit scenario CSV. */
int randlmi_empirical_violation(const randlmi_problem* p, const double* theta, size_t theta_len,
                                const char* scenarios_csv, double* out, char** err);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* RANDLMI_H */
