#include "probcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "errors.hpp"
#include "rng.hpp"

namespace prophetsec {

int thread_cap() {
  static const int cap = [] {
    unsigned hw = std::thread::hardware_concurrency();
    int n = hw == 0 ? 1 : static_cast<int>(hw);
    if (const char* env = std::getenv("PROPHET_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v >= 1) n = static_cast<int>(std::min<long>(v, 1024));
    }
    return n;
  }();
  return cap;
}

static void require_supply(int k) {
  if (k < 1) fail(errc::invalid_argument, "supply k must be a positive integer, got " + std::to_string(k));
}

double gamma_k(int k) {
  require_supply(k);
  double kk = static_cast<double>(k);
  double log_term = -kk + kk * std::log(kk) - std::lgamma(kk + 1.0);
  return 1.0 - std::exp(log_term);
}

double utilization(int k, std::int64_t d) {
  require_supply(k);
  if (d < 0) fail(errc::invalid_argument, "demand must be nonnegative");
  return std::min(1.0, static_cast<double>(d) / static_cast<double>(k));
}

double acceptance_rate(int k, std::int64_t d) {
  require_supply(k);
  if (d < 0) fail(errc::invalid_argument, "demand must be nonnegative");
  return std::min(1.0, static_cast<double>(k) / static_cast<double>(d + 1));
}

// Support bound m such that P(Pois(lambda) > m) < 1e-16.
static std::int64_t poisson_trunc_bound(double lambda) {
  return static_cast<std::int64_t>(std::ceil(lambda + 40.0 * std::sqrt(lambda + 1.0) + 40.0));
}

double poisson_pmf(double lambda, std::int64_t j) {
  if (lambda < 0 || j < 0) fail(errc::invalid_argument, "poisson_pmf requires lambda >= 0, j >= 0");
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  double jd = static_cast<double>(j);
  return std::exp(-lambda + jd * std::log(lambda) - std::lgamma(jd + 1.0));
}

double poisson_cdf_below(double lambda, std::int64_t k) {
  double s = 0.0;
  for (std::int64_t j = 0; j < k; ++j) s += poisson_pmf(lambda, j);
  return std::min(s, 1.0);
}

double poisson_tail_above(double lambda, std::int64_t k) {
  double s = 0.0;
  std::int64_t m = poisson_trunc_bound(lambda);
  for (std::int64_t j = k + 1; j <= m; ++j) s += poisson_pmf(lambda, j);
  return std::min(s, 1.0);
}

double poisson_stockout(double lambda, std::int64_t k) {
  if (k <= 0) return 1.0;
  return std::min(1.0, poisson_pmf(lambda, k) + poisson_tail_above(lambda, k));
}

double expect_ut_poisson(double lambda, int k) {
  require_supply(k);
  double s = 0.0;
  std::int64_t m = poisson_trunc_bound(lambda);
  for (std::int64_t j = 0; j <= m; ++j) s += utilization(k, j) * poisson_pmf(lambda, j);
  return std::min(s, 1.0);
}

double expect_ar_poisson(double lambda, int k) {
  require_supply(k);
  double s = 0.0;
  std::int64_t m = poisson_trunc_bound(lambda);
  for (std::int64_t j = 0; j <= m; ++j) s += acceptance_rate(k, j) * poisson_pmf(lambda, j);
  return std::min(s, 1.0);
}

double w_constant(int k) {
  require_supply(k);
  double below = poisson_cdf_below(k, k);
  double above = poisson_tail_above(k, k);
  return static_cast<double>(k) * below / above;
}

double binomial_pmf(std::int64_t n, double p, std::int64_t j) {
  if (n < 0 || j < 0 || p < 0.0 || p > 1.0) fail(errc::invalid_argument, "binomial_pmf: bad arguments");
  if (j > n) return 0.0;
  if (p == 0.0) return j == 0 ? 1.0 : 0.0;
  if (p == 1.0) return j == n ? 1.0 : 0.0;
  double nd = static_cast<double>(n), jd = static_cast<double>(j);
  double log_pmf = std::lgamma(nd + 1.0) - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0) +
                   jd * std::log(p) + (nd - jd) * std::log1p(-p);
  return std::exp(log_pmf);
}

double binomial_cdf_below(std::int64_t n, double p, std::int64_t k) {
  double s = 0.0;
  for (std::int64_t j = 0; j < k && j <= n; ++j) s += binomial_pmf(n, p, j);
  return std::min(s, 1.0);
}

double expect_ut_binomial(std::int64_t n, double p, int k) {
  require_supply(k);
  // min(d,k) = k - sum_{j<k} (k-j) 1(d=j), so only k pmf terms are needed.
  double deficit = 0.0;
  for (std::int64_t j = 0; j < k && j <= n; ++j)
    deficit += static_cast<double>(k - j) * binomial_pmf(n, p, j);
  return 1.0 - deficit / static_cast<double>(k);
}

double expect_ar_binomial(std::int64_t n, double p, int k) {
  require_supply(k);
  if (n < 0) fail(errc::invalid_argument, "expect_ar_binomial: n must be nonnegative");
  if (p == 0.0) return 1.0;
  // Index shift on the upper sum turns it into a Bin(n+1,p) tail:
  //   sum_{d>=k} k/(d+1) pmf(n,p,d) = k/((n+1)p) * P[Bin(n+1,p) > k].
  double below = binomial_cdf_below(n, p, k);
  double at_most_k = binomial_cdf_below(n + 1, p, k) + binomial_pmf(n + 1, p, k);
  double tail = std::max(0.0, 1.0 - at_most_k);
  return below + static_cast<double>(k) / (static_cast<double>(n + 1) * p) * tail;
}

double binomial_ar_closed(std::int64_t n, int k) {
  require_supply(k);
  if (n < k) fail(errc::invalid_argument, "binomial_ar_closed requires n >= k, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  double p = static_cast<double>(k) / static_cast<double>(n);
  double below = binomial_cdf_below(n, p, k);
  double at_most_k = binomial_cdf_below(n + 1, p, k) + binomial_pmf(n + 1, p, k);
  double tail = std::max(0.0, 1.0 - at_most_k);
  return below + static_cast<double>(n) / static_cast<double>(n + 1) * tail;
}

PoissonBinomial::PoissonBinomial(std::vector<double> probs) : probs_(std::move(probs)) {
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    double q = probs_[i];
    if (!(q >= 0.0 && q <= 1.0))
      fail(errc::invalid_argument, "Bernoulli mean out of [0,1] at index " + std::to_string(i));
    mean_ += q;
  }
  pmf_.assign(probs_.size() + 1, 0.0);
  pmf_[0] = 1.0;
  std::size_t len = 1;
  for (double q : probs_) {
    for (std::size_t j = len; j-- > 0;) {
      double h = pmf_[j];
      pmf_[j + 1] += h * q;
      pmf_[j] = h * (1.0 - q);
    }
    ++len;
  }
  cdf_.resize(pmf_.size());
  double run = 0.0;
  for (std::size_t j = 0; j < pmf_.size(); ++j) {
    run += pmf_[j];
    cdf_[j] = run;
  }
}

double expect_statistic(const PoissonBinomial& demand, const DemandStatistic& stat) {
  if (stat.kind == StatKind::expected_demand) return demand.mean();
  require_supply(stat.k);
  const auto& h = demand.pmf();
  double s = 0.0;
  switch (stat.kind) {
    case StatKind::expected_utilization:
      for (std::size_t j = 0; j < h.size(); ++j) s += utilization(stat.k, static_cast<std::int64_t>(j)) * h[j];
      break;
    case StatKind::acceptance_rate:
      for (std::size_t j = 0; j < h.size(); ++j) s += acceptance_rate(stat.k, static_cast<std::int64_t>(j)) * h[j];
      break;
    case StatKind::stockout_probability:
      for (std::size_t j = static_cast<std::size_t>(stat.k); j < h.size(); ++j) s += h[j];
      break;
    default:
      fail(errc::invalid_argument, "unknown statistic kind");
  }
  return s;
}

const char* stat_kind_name(StatKind kind) {
  switch (kind) {
    case StatKind::expected_demand: return "expected_demand";
    case StatKind::expected_utilization: return "expected_utilization";
    case StatKind::acceptance_rate: return "acceptance_rate";
    case StatKind::stockout_probability: return "stockout_probability";
  }
  return "unknown";
}

StatKind stat_kind_from_name(const std::string& name) {
  if (name == "expected_demand") return StatKind::expected_demand;
  if (name == "expected_utilization") return StatKind::expected_utilization;
  if (name == "acceptance_rate") return StatKind::acceptance_rate;
  if (name == "stockout_probability") return StatKind::stockout_probability;
  fail(errc::invalid_argument, "unknown statistic kind: " + name);
}

}  // namespace prophetsec
