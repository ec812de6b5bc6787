#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evaluation.hpp"
#include "instances.hpp"

namespace prophetsec {

struct SeriesPoint {
  std::int64_t n = 0;
  double value = 0.0;
};

struct ArCurve {
  std::vector<SeriesPoint> series;  // E[AR_k(Bin(n,k/n))] for n = k..n_max
  double min_value = 0.0;
  std::int64_t argmin = 0;
};

ArCurve ar_curve(int k, std::int64_t n_max);

struct InfimumResult {
  double inf_value = 0.0;      // min over the scan and the Poisson limit
  double min_finite = 0.0;     // running minimum over n <= n_cap
  std::int64_t argmin_finite = 0;
};

// inf_{n >= k} E[AR_k(Bin(n,k/n))] with the tail beyond n_cap covered by the
// analytic limit gamma_k. For k <= 30 the result is cross-checked against the
// identity min(k/(k+1), gamma_k) within 1e-3.
InfimumResult infimum_ar(int k, std::int64_t n_cap);

// varphi_k(n) = (1 - k/(n+1)) P[Bin(n,k/n) = k] + 1/(2(n+1)).
double varphi(int k, std::int64_t n);

struct VarphiTable {
  int k_lo = 0, k_hi = 0, ell_lo = 0, ell_hi = 0;
  std::vector<std::vector<double>> values;  // rounded to 4 decimals; [k][ell]
};

VarphiTable varphi_table(int k_lo = 9, int k_hi = 30, int ell_lo = 1, int ell_hi = 11);

// Reference values the published varphi table is checked against; laid out
// like varphi_table(9, 30, 1, 11).
const VarphiTable& varphi_reference();

// k (e^{-k} k^k / k!) (1 - 1/n - 1/(n-k) - 1/(n(n-k))) - 1; the sign witness
// for the derivative bound. Requires n >= k+2.
double deriv_rhs(int k, double n);

struct HardSweepPoint {
  double accept_prob = 0.0;
  double performance = 0.0;
  double ratio = 0.0;
};

struct HardSweepResult {
  double best_ratio = 0.0;
  double best_accept_prob = 0.0;
  double prophet_estimate = 0.0;
  double prophet_std_error = 0.0;
  std::vector<HardSweepPoint> series;
};

// On example_hard_iid(k, n), sweeps the tie-break acceptance probability for
// value-1 applicants (the only free choice) over {0} plus a geometric grid,
// evaluating exact performance against a Monte Carlo prophet estimate.
HardSweepResult hard_instance_sweep(int k, int n, std::int64_t mc_trials, std::uint64_t seed);

struct DemandBadResult {
  double ratio = 0.0;
  ThresholdPolicy policy;
  double performance = 0.0;
  double prophet = 0.0;
};

// On example_demand_bad(k, eps), calibrates expected demand to k and returns
// exact performance / exact prophet value.
DemandBadResult demand_bad_sweep(int k, double eps);

struct WitnessReport {
  std::string branch;  // "below_supply", "above_supply" or "at_supply"
  Instance instance;
  ThresholdPolicy policy;
  std::int64_t n_used = 0;
  double ratio = 0.0;
  double gamma = 0.0;
  bool conclusive = false;  // ratio < gamma_k
};

// Witness construction showing that calibrating expected demand to phi cannot
// guarantee gamma_k for k < 5, for any phi.
WitnessReport fixed_demand_insufficiency(int k, double phi);

struct IidCheckReport {
  ThresholdPolicy policy;
  double performance = 0.0;
  double prophet = 0.0;
  double prophet_std_error = 0.0;
  double ratio = 0.0;
  double gamma = 0.0;
  double binom_ut_ratio = 0.0;  // E[min(Bin(n,k/n),k)]/k
  bool performance_ok = false;  // performance >= gamma * prophet - tolerance
  bool inner_inequality_ok = false;  // binom_ut_ratio >= gamma
};

// For an IID instance (n copies of dist), demand calibration to k guarantees
// gamma_k; checks both the end-to-end ratio and the proof's inner inequality.
IidCheckReport iid_demand_check(int k, int n, const ValueDistribution& dist,
                                std::int64_t trials, std::uint64_t seed);

struct UtCurvePoint {
  double level = 0.0;
  double bound = 0.0;
};

struct UtCurve {
  std::vector<UtCurvePoint> series;
  double peak_level = 0.0;
  double peak_bound = 0.0;
};

// Tight guarantee as a function of the expected-utilization level a:
// bound(a) = min(a, E[AR_k(Bin(n,p))] at the p with E[UT_k(Bin(n,p))] = a),
// evaluated at n = 10^4. Peaks at a = gamma_k.
UtCurve ut_guarantee_curve(int k, std::span<const double> levels);

struct StockoutProbe {
  double target = 0.0;  // P(Pois(k) >= k)
  double min_ratio_lp = 0.0;
  std::vector<double> ratios;          // ratio_lp per calibrated instance
  std::vector<std::size_t> flagged;    // indices with ratio < gamma_k
  std::vector<std::size_t> skipped;    // indices where the target is unattainable
};

// Calibrates stockout probability to P(Pois(k) >= k) on each corpus instance
// and records the observed LP ratios. Gathers evidence only; asserts nothing.
StockoutProbe stockout_conjecture_probe(int k, std::span<const Instance> corpus);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifySummary {
  std::vector<CheckResult> checks;
  int failures = 0;
};

// Full assertion suite over the library's reproducible claims. `fast` trims
// corpus sizes and Monte Carlo budgets.
VerifySummary run_all_checks(bool fast);

std::string verify_summary_to_json(const VerifySummary& summary);

// CSV emitters used by the command-line front end (12 significant digits,
// header row; the varphi table keeps its 4-decimal rounding).
std::string ar_curve_csv(const ArCurve& curve);
std::string ut_curve_csv(const UtCurve& curve);
std::string varphi_table_csv(const VarphiTable& table);
std::string hard_sweep_csv(const HardSweepResult& sweep);
std::string demand_bad_csv(int k, double eps, const DemandBadResult& result);

}  // namespace prophetsec
