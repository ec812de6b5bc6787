/* prophetsec: static threshold policies for k-unit sequential selection with
 * known value distributions and random arrival order.
 *
 * C API over the C++ core. All functions return ps_status; on PS_ERR_* the
 * thread-local message from ps_last_error() describes the failure. Strings
 * returned through char** out-parameters are owned by the caller and must be
 * released with ps_string_free(). Instances are opaque handles released with
 * ps_instance_free().
 */
#ifndef PROPHETSEC_H
#define PROPHETSEC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PS_API __declspec(dllexport)
#else
#define PS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ps_status {
  PS_OK = 0,
  PS_ERR_INVALID_ARGUMENT = 1,
  PS_ERR_PARSE = 2,
  PS_ERR_VALIDATION = 3,
  PS_ERR_UNATTAINABLE = 4,
  PS_ERR_INFEASIBLE = 5,
  PS_ERR_CAP_EXCEEDED = 6,
  PS_ERR_IO = 7,
  PS_ERR_CONVERGENCE = 8,
  PS_ERR_INTERNAL = 9
} ps_status;

typedef enum ps_stat_kind {
  PS_STAT_EXPECTED_DEMAND = 0,
  PS_STAT_EXPECTED_UTILIZATION = 1,
  PS_STAT_ACCEPTANCE_RATE = 2,
  PS_STAT_STOCKOUT_PROBABILITY = 3
} ps_stat_kind;

typedef struct ps_instance ps_instance;

PS_API const char* ps_version(void);

/* Message for the most recent failure on this thread. */
PS_API const char* ps_last_error(void);

PS_API void ps_string_free(char* s);

/* --- scalar constants ------------------------------------------------- */

/* gamma_k = 1 - e^{-k} k^k / k! */
PS_API ps_status ps_gamma(int k, double* out);

/* W_k = k P(Pois(k) < k) / P(Pois(k) > k) */
PS_API ps_status ps_w_constant(int k, double* out);

/* P(Pois(k) >= k), the designated stockout calibration target */
PS_API ps_status ps_pois_stockout(int k, double* out);

/* --- instances --------------------------------------------------------- */

PS_API ps_status ps_instance_load(const char* path, ps_instance** out);
PS_API ps_status ps_instance_save(const ps_instance* inst, const char* path);
PS_API ps_status ps_instance_from_json(const char* json, ps_instance** out);
PS_API ps_status ps_instance_to_json(const ps_instance* inst, char** out_json);

/* IID worst-case family: value n*W_k with probability 1/n^2, else 1. */
PS_API ps_status ps_instance_hard_iid(int k, int n, ps_instance** out);

/* k near-certain unit values plus one rare value 1/eps^2. */
PS_API ps_status ps_instance_demand_bad(int k, double eps, ps_instance** out);

PS_API ps_status ps_instance_random(uint64_t seed, int n_max, int atoms_max, int k_max,
                                    ps_instance** out);

PS_API void ps_instance_free(ps_instance* inst);
PS_API int ps_instance_applicants(const ps_instance* inst);
PS_API int ps_instance_supply(const ps_instance* inst);

/* --- statistics and calibration ---------------------------------------- */

/* E[g(D^{t,p})] for the statistic kind, with supply taken from the instance. */
PS_API ps_status ps_statistic_value(const ps_instance* inst, double t, double p, ps_stat_kind kind,
                                    double* out);

/* Designated calibration target for the kind at supply k. */
PS_API ps_status ps_calibration_target(ps_stat_kind kind, int k, double* out);

/* Solve for (t, p) with the statistic equal to target (within 1e-10). */
PS_API ps_status ps_calibrate(const ps_instance* inst, ps_stat_kind kind, double target,
                              double* t_out, double* p_out, double* achieved_out);

/* --- evaluation --------------------------------------------------------- */

PS_API ps_status ps_exact_performance(const ps_instance* inst, double t, double p, double* out);

PS_API ps_status ps_simulate_performance(const ps_instance* inst, double t, double p,
                                         int64_t trials, uint64_t seed, double* estimate,
                                         double* std_error);

/* Exact prophet value; fails with PS_ERR_CAP_EXCEEDED beyond 1e7 joint
 * outcomes, in which case use ps_prophet_monte_carlo. */
PS_API ps_status ps_prophet_exact(const ps_instance* inst, double* out);
PS_API ps_status ps_prophet_monte_carlo(const ps_instance* inst, int64_t trials, uint64_t seed,
                                        double* estimate, double* std_error);

PS_API ps_status ps_lp_value(const ps_instance* inst, double* out);

/* Full report (performance, benchmarks, statistics, ratio certificates) as a
 * JSON document. When with_benchmarks is 0 the prophet/LP fields are omitted.
 * The prophet benchmark is exact when it fits the enumeration cap, otherwise
 * Monte Carlo with the given trials and seed. */
PS_API ps_status ps_guarantee_report_json(const ps_instance* inst, double t, double p,
                                          int with_benchmarks, int64_t prophet_trials,
                                          uint64_t seed, char** out_json);

/* --- reproduction series ------------------------------------------------ */

/* E[AR_k(Bin(n,k/n))] for n = k..n_max; CSV plus a JSON summary. */
PS_API ps_status ps_reproduce_ar_curve(int k, int64_t n_max, char** out_csv, char** out_summary);

/* Guarantee as a function of the expected-utilization level. */
PS_API ps_status ps_reproduce_ut_curve(int k, char** out_csv, char** out_summary);

/* varphi_k(k+ell) table, k = 9..30, ell = 1..11, 4 decimals. */
PS_API ps_status ps_reproduce_varphi_table(char** out_csv);

/* Tie-break sweep on the hard IID instance with a Monte Carlo prophet. */
PS_API ps_status ps_reproduce_hard_sweep(int k, int n, int64_t mc_trials, uint64_t seed,
                                         char** out_csv, char** out_summary);

/* Demand-calibrated ratio on the bad example at the given eps. */
PS_API ps_status ps_reproduce_demand_bad(int k, double eps, char** out_csv, char** out_summary);

/* --- verification -------------------------------------------------------- */

/* Runs the full assertion suite; out_json receives the summary document and
 * failures the number of failed checks. fast != 0 trims corpus sizes. */
PS_API ps_status ps_verify_all(int fast, char** out_json, int* failures);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PROPHETSEC_H */
