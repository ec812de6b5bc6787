#include "evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>
#include <numeric>

#include "calibration.hpp"
#include "errors.hpp"
#include "rng.hpp"

namespace prophetsec {

namespace {

// Cumulative atom masses per applicant, for inverse-cdf sampling.
struct Sampler {
  std::vector<std::vector<double>> cumulative;
  std::vector<std::vector<double>> values;

  explicit Sampler(const Instance& inst) {
    cumulative.reserve(inst.applicants.size());
    values.reserve(inst.applicants.size());
    for (const ValueDistribution& dist : inst.applicants) {
      std::vector<double> cum, val;
      double run = 0.0;
      for (const Atom& a : dist.atoms()) {
        run += a.mass;
        cum.push_back(run);
        val.push_back(a.value);
      }
      cum.back() = 1.0;
      cumulative.push_back(std::move(cum));
      values.push_back(std::move(val));
    }
  }

  double sample(std::size_t i, std::mt19937_64& rng) const {
    double u = uniform01(rng);
    const std::vector<double>& cum = cumulative[i];
    std::size_t j = 0;
    while (j + 1 < cum.size() && u >= cum[j]) ++j;
    return values[i][j];
  }
};

// Deterministic chunked Monte Carlo driver: trial i always lands in chunk
// i/kChunk and chunks are reduced in index order, so the result is identical
// for any thread count.
constexpr std::int64_t kChunk = 4096;

template <typename TrialFn>
MonteCarloEstimate run_trials(std::int64_t trials, TrialFn&& trial_value) {
  if (trials < 1) fail(errc::invalid_argument, "trials must be >= 1");
  std::int64_t chunks = (trials + kChunk - 1) / kChunk;
  std::vector<std::pair<double, double>> partial(static_cast<std::size_t>(chunks));

  auto run_chunk = [&](std::int64_t c) {
    double sum = 0.0, sumsq = 0.0;
    std::int64_t lo = c * kChunk;
    std::int64_t hi = std::min(trials, lo + kChunk);
    for (std::int64_t t = lo; t < hi; ++t) {
      double v = trial_value(t);
      sum += v;
      sumsq += v * v;
    }
    partial[static_cast<std::size_t>(c)] = {sum, sumsq};
  };

  int workers = std::min<std::int64_t>(thread_cap(), chunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::future<void>> futs;
    futs.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, [&] {
        for (std::int64_t c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) run_chunk(c);
      }));
    }
    for (auto& f : futs) f.get();
  }

  double sum = 0.0, sumsq = 0.0;
  for (const auto& [s, s2] : partial) {
    sum += s;
    sumsq += s2;
  }
  double n = static_cast<double>(trials);
  double mean = sum / n;
  double stderr_ = 0.0;
  if (trials > 1) {
    double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    stderr_ = std::sqrt(var / n);
  }
  return {mean, stderr_};
}

double expect_ar_over_pmf(const std::vector<double>& pmf, int k) {
  double s = 0.0;
  for (std::size_t j = 0; j < pmf.size(); ++j) s += acceptance_rate(k, static_cast<std::int64_t>(j)) * pmf[j];
  return s;
}

double top_k_sum(std::vector<double>& scratch, int k) {
  int n = static_cast<int>(scratch.size());
  if (k >= n) return std::accumulate(scratch.begin(), scratch.end(), 0.0);
  std::nth_element(scratch.begin(), scratch.begin() + (n - k), scratch.end());
  return std::accumulate(scratch.end() - k, scratch.end(), 0.0);
}

}  // namespace

double exact_performance(const Instance& inst, const ThresholdPolicy& pol) {
  EligibilitySummary el = eligibility(inst, pol);
  std::size_t n = el.q.size();

  // Applicants sharing an eligibility probability share the leave-one-out
  // demand law, so one convolution per distinct q suffices.
  std::map<double, double> mass_by_q;
  for (std::size_t i = 0; i < n; ++i) {
    if (el.m[i] > 0.0) mass_by_q[el.q[i]] += el.m[i];
  }

  double total = 0.0;
  for (const auto& [q, m_total] : mass_by_q) {
    std::vector<double> rest;
    rest.reserve(n - 1);
    bool removed = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (!removed && el.q[j] == q) {
        removed = true;
        continue;
      }
      rest.push_back(el.q[j]);
    }
    PoissonBinomial demand(std::move(rest));
    total += m_total * expect_ar_over_pmf(demand.pmf(), inst.k);
  }
  return total;
}

MonteCarloEstimate simulate_performance(const Instance& inst, const ThresholdPolicy& pol,
                                        std::int64_t trials, std::uint64_t seed) {
  validate_instance(inst);
  validate_policy(pol);
  Sampler sampler(inst);
  std::size_t n = inst.applicants.size();
  int k = inst.k;

  return run_trials(trials, [&](std::int64_t trial) {
    std::mt19937_64 rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = sampler.sample(i, rng);
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n; i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(rng, i));
      std::swap(order[i - 1], order[j]);
    }
    int remaining = k;
    double total = 0.0;
    for (std::uint32_t idx : order) {
      if (remaining == 0) break;
      double v = values[idx];
      bool eligible = v > pol.t || (v == pol.t && uniform01(rng) < pol.p);
      if (eligible) {
        total += v;
        --remaining;
      }
    }
    return total;
  });
}

ProphetValue prophet_value(const Instance& inst, ProphetMode mode, std::int64_t trials,
                           std::uint64_t seed) {
  validate_instance(inst);
  std::size_t n = inst.applicants.size();
  int k = inst.k;

  if (mode == ProphetMode::exact) {
    double outcomes = 1.0;
    for (const ValueDistribution& dist : inst.applicants) outcomes *= static_cast<double>(dist.atoms().size());
    if (outcomes > kProphetEnumerationCap)
      fail(errc::cap_exceeded,
           "exact prophet enumeration needs " + std::to_string(outcomes) +
               " joint outcomes (cap 1e7); use monte_carlo mode");

    std::vector<std::size_t> idx(n, 0);
    std::vector<double> values(n), scratch;
    for (std::size_t i = 0; i < n; ++i) values[i] = inst.applicants[i].atoms()[0].value;
    double total = 0.0;
    bool done = false;
    while (!done) {
      double weight = 1.0;
      for (std::size_t i = 0; i < n; ++i) weight *= inst.applicants[i].atoms()[idx[i]].mass;
      scratch = values;
      total += weight * top_k_sum(scratch, k);
      // odometer step
      std::size_t pos = 0;
      while (pos < n) {
        if (++idx[pos] < inst.applicants[pos].atoms().size()) {
          values[pos] = inst.applicants[pos].atoms()[idx[pos]].value;
          break;
        }
        idx[pos] = 0;
        values[pos] = inst.applicants[pos].atoms()[0].value;
        ++pos;
      }
      done = (pos == n);
    }
    return {total, 0.0, ProphetMode::exact};
  }

  Sampler sampler(inst);
  MonteCarloEstimate est = run_trials(trials, [&](std::int64_t trial) {
    std::mt19937_64 rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = sampler.sample(i, rng);
    return top_k_sum(values, k);
  });
  return {est.estimate, est.std_error, ProphetMode::monte_carlo};
}

LpSolution lp_relaxation(const Instance& inst) {
  validate_instance(inst);
  std::size_t n = inst.applicants.size();
  double kd = static_cast<double>(inst.k);

  double positive_mass = 0.0;
  for (const ValueDistribution& dist : inst.applicants) positive_mass += dist.mass_above(0.0);

  LpSolution sol;
  sol.weights.assign(n, 0.0);
  if (positive_mass <= kd) {
    // Slack capacity: accept all positive mass at price zero.
    sol.dual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sol.weights[i] = inst.applicants[i].mass_above(0.0);
      sol.value += inst.applicants[i].value_mass_above(0.0);
    }
    return sol;
  }

  std::vector<double> prices;
  for (const ValueDistribution& dist : inst.applicants)
    for (const Atom& a : dist.atoms())
      if (a.value > 0.0) prices.push_back(a.value);
  std::sort(prices.begin(), prices.end(), std::greater<double>());
  prices.erase(std::unique(prices.begin(), prices.end()), prices.end());

  for (double tau : prices) {
    double above = 0.0, at = 0.0;
    for (const ValueDistribution& dist : inst.applicants) {
      above += dist.mass_above(tau);
      at += dist.mass_at(tau);
    }
    if (above <= kd && above + at > kd) {
      double residual = kd - above;
      sol.dual = tau;
      for (std::size_t i = 0; i < n; ++i) {
        const ValueDistribution& dist = inst.applicants[i];
        double share = at > 0.0 ? residual * dist.mass_at(tau) / at : 0.0;
        sol.weights[i] = dist.mass_above(tau) + share;
        sol.value += dist.value_mass_above(tau) + share * tau;
      }
      return sol;
    }
  }
  fail(errc::convergence, "water-filling scan failed to locate the marginal price");
}

GuaranteeReport guarantee_report(const Instance& inst, const ThresholdPolicy& pol,
                                 std::int64_t prophet_trials, std::uint64_t seed) {
  GuaranteeReport rep;
  rep.policy = pol;
  rep.performance = exact_performance(inst, pol);

  double outcomes = 1.0;
  for (const ValueDistribution& dist : inst.applicants) outcomes *= static_cast<double>(dist.atoms().size());
  ProphetValue pht = outcomes <= kProphetEnumerationCap
                         ? prophet_value(inst, ProphetMode::exact)
                         : prophet_value(inst, ProphetMode::monte_carlo, prophet_trials, seed);
  rep.prophet = pht.value;
  rep.prophet_std_error = pht.std_error;
  rep.prophet_mode = pht.mode;
  rep.lp = lp_relaxation(inst).value;

  rep.expected_ut = statistic_value(inst, pol, {StatKind::expected_utilization, inst.k});
  rep.expected_ar = statistic_value(inst, pol, {StatKind::acceptance_rate, inst.k});
  rep.expected_demand = statistic_value(inst, pol, {StatKind::expected_demand, inst.k});

  rep.ratio_prophet = rep.prophet > 0.0 ? rep.performance / rep.prophet : 0.0;
  rep.ratio_lp = rep.lp > 0.0 ? rep.performance / rep.lp : 0.0;
  rep.lb_bound = std::min(rep.expected_ut, rep.expected_ar);
  return rep;
}

}  // namespace prophetsec
