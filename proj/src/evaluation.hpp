#pragma once

#include <cstdint>

#include "instances.hpp"
#include "probcore.hpp"

namespace prophetsec {

// Exact policy performance sum_i m_i E[AR_k(D_{-i})], where (q, m) is the
// eligibility summary and D_{-i} the Poisson-Binomial over q_j, j != i.
// No sampling; leave-one-out pmfs are computed by independent convolutions,
// one per distinct eligibility probability.
double exact_performance(const Instance& inst, const ThresholdPolicy& pol);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

// Simulates the policy on random arrival orders. Deterministic for a given
// (seed, trials) regardless of thread count: each trial draws from its own
// counter-derived substream of the master seed.
MonteCarloEstimate simulate_performance(const Instance& inst, const ThresholdPolicy& pol,
                                        std::int64_t trials, std::uint64_t seed);

enum class ProphetMode { exact, monte_carlo };

// Hard bound on the joint-outcome enumeration in exact mode.
inline constexpr double kProphetEnumerationCap = 1e7;

struct ProphetValue {
  double value = 0.0;
  double std_error = 0.0;  // 0 in exact mode
  ProphetMode mode = ProphetMode::exact;
};

// Expected sum of the k largest values. Exact mode enumerates the product
// space of atoms (guarded by kProphetEnumerationCap); monte_carlo samples.
ProphetValue prophet_value(const Instance& inst, ProphetMode mode, std::int64_t trials = 0,
                           std::uint64_t seed = 0);

struct LpSolution {
  double value = 0.0;             // ex-ante optimum LP_k(F)
  std::vector<double> weights;    // per-applicant acceptance probabilities
  double dual = 0.0;              // threshold price at which quantile mass is cut
};

// Water-filling solution of the ex-ante relaxation. The marginal atom is
// split across applicants pro rata to their mass at the dual price.
LpSolution lp_relaxation(const Instance& inst);

struct GuaranteeReport {
  ThresholdPolicy policy;
  double performance = 0.0;
  double prophet = 0.0;
  double prophet_std_error = 0.0;
  ProphetMode prophet_mode = ProphetMode::exact;
  double lp = 0.0;
  double expected_ut = 0.0;
  double expected_ar = 0.0;
  double expected_demand = 0.0;
  double ratio_prophet = 0.0;
  double ratio_lp = 0.0;
  double lb_bound = 0.0;  // min(expected_ut, expected_ar)
};

// Assembles performance, benchmarks, demand statistics and ratio certificates
// for one (instance, policy) pair. The prophet benchmark is exact when the
// enumeration fits the cap, otherwise Monte Carlo with the given trials/seed.
GuaranteeReport guarantee_report(const Instance& inst, const ThresholdPolicy& pol,
                                 std::int64_t prophet_trials = 200000, std::uint64_t seed = 1);

}  // namespace prophetsec
