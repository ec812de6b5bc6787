#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace prophetsec {

// gamma_k = 1 - e^{-k} k^k / k!, the tight static-threshold guarantee.
// Evaluated in log space so large k (e.g. k=100) stays accurate.
double gamma_k(int k);

// W_k = k * P(Pois(k) < k) / P(Pois(k) > k), the high-value scale used by the
// worst-case IID instance family.
double w_constant(int k);

// UT_k(d) = min(1, d/k): fraction of the k items allocated at demand d.
double utilization(int k, std::int64_t d);

// AR_k(d) = min(1, k/(d+1)): acceptance probability against d competitors
// under uniformly random arrival order.
double acceptance_rate(int k, std::int64_t d);

// --- Poisson kernels (truncated sums; truncation tail below 1e-16) ---

double poisson_pmf(double lambda, std::int64_t j);
double poisson_cdf_below(double lambda, std::int64_t k);   // P(Pois < k)
double poisson_tail_above(double lambda, std::int64_t k);  // P(Pois > k)
double poisson_stockout(double lambda, std::int64_t k);    // P(Pois >= k)
double expect_ut_poisson(double lambda, int k);            // E[UT_k(Pois(lambda))]
double expect_ar_poisson(double lambda, int k);            // E[AR_k(Pois(lambda))]

// --- Binomial kernels (log-gamma based; O(k) tail forms) ---

double binomial_pmf(std::int64_t n, double p, std::int64_t j);
double binomial_cdf_below(std::int64_t n, double p, std::int64_t k);  // P(Bin < k)
double expect_ut_binomial(std::int64_t n, double p, int k);
double expect_ar_binomial(std::int64_t n, double p, int k);

// E[AR_k(Bin(n, k/n))] via the closed form
//   P[Bin(n,k/n) < k] + (n/(n+1)) * P[Bin(n+1,k/n) > k].
// Requires n >= k >= 1.
double binomial_ar_closed(std::int64_t n, int k);

// Law of a sum of independent Bernoulli variables with the given means.
// pmf computed by iterative convolution; all values immutable afterwards.
class PoissonBinomial {
 public:
  explicit PoissonBinomial(std::vector<double> probs);

  const std::vector<double>& probs() const { return probs_; }
  const std::vector<double>& pmf() const { return pmf_; }
  const std::vector<double>& cdf() const { return cdf_; }
  double mean() const { return mean_; }
  std::int64_t count() const { return static_cast<std::int64_t>(probs_.size()); }

 private:
  std::vector<double> probs_;
  std::vector<double> pmf_;
  std::vector<double> cdf_;
  double mean_ = 0.0;
};

enum class StatKind {
  expected_demand,
  expected_utilization,
  acceptance_rate,
  stockout_probability,
};

struct DemandStatistic {
  StatKind kind = StatKind::expected_demand;
  int k = 0;  // supply; unused by expected_demand
};

// E[g(D)] for the statistic's g over a demand law.
double expect_statistic(const PoissonBinomial& demand, const DemandStatistic& stat);

const char* stat_kind_name(StatKind kind);
StatKind stat_kind_from_name(const std::string& name);

}  // namespace prophetsec
