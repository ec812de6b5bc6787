#include "verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bernoulli_opt.hpp"
#include "calibration.hpp"
#include "errors.hpp"
#include "probcore.hpp"
#include "rng.hpp"

namespace prophetsec {

ArCurve ar_curve(int k, std::int64_t n_max) {
  if (k < 1 || n_max < k) fail(errc::invalid_argument, "ar_curve requires n_max >= k >= 1");
  ArCurve out;
  out.min_value = std::numeric_limits<double>::infinity();
  out.series.reserve(static_cast<std::size_t>(n_max - k + 1));
  for (std::int64_t n = k; n <= n_max; ++n) {
    double v = binomial_ar_closed(n, k);
    out.series.push_back({n, v});
    if (v < out.min_value) {
      out.min_value = v;
      out.argmin = n;
    }
  }
  return out;
}

InfimumResult infimum_ar(int k, std::int64_t n_cap) {
  ArCurve curve = ar_curve(k, n_cap);
  InfimumResult out;
  out.min_finite = curve.min_value;
  out.argmin_finite = curve.argmin;
  out.inf_value = std::min(curve.min_value, gamma_k(k));
  if (k <= 30) {
    double expected = std::min(static_cast<double>(k) / (k + 1), gamma_k(k));
    if (std::abs(out.inf_value - expected) > 1e-3)
      fail(errc::validation, "infimum identity violated for k=" + std::to_string(k));
  }
  return out;
}

double varphi(int k, std::int64_t n) {
  if (k < 1 || n < k) fail(errc::invalid_argument, "varphi requires n >= k >= 1");
  double p = static_cast<double>(k) / static_cast<double>(n);
  return (1.0 - static_cast<double>(k) / static_cast<double>(n + 1)) * binomial_pmf(n, p, k) +
         0.5 / static_cast<double>(n + 1);
}

VarphiTable varphi_table(int k_lo, int k_hi, int ell_lo, int ell_hi) {
  if (k_lo < 1 || k_hi < k_lo || ell_lo < 0 || ell_hi < ell_lo)
    fail(errc::invalid_argument, "varphi_table: bad ranges");
  VarphiTable t;
  t.k_lo = k_lo;
  t.k_hi = k_hi;
  t.ell_lo = ell_lo;
  t.ell_hi = ell_hi;
  for (int k = k_lo; k <= k_hi; ++k) {
    std::vector<double> row;
    for (int ell = ell_lo; ell <= ell_hi; ++ell)
      row.push_back(std::round(varphi(k, k + ell) * 1e4) / 1e4);
    t.values.push_back(std::move(row));
  }
  return t;
}

const VarphiTable& varphi_reference() {
  static const VarphiTable table = [] {
    // Published reference values of varphi_k(k+ell), rows k = 9..30,
    // columns ell = 1..11, rounded to 4 decimals.
    static constexpr std::array<std::array<double, 11>, 22> rows = {{
        {0.1159, 0.1164, 0.1179, 0.1193, 0.1206, 0.1216, 0.1225, 0.1233, 0.1239, 0.1245, 0.1250},
        {0.1059, 0.1068, 0.1086, 0.1102, 0.1116, 0.1128, 0.1138, 0.1147, 0.1154, 0.1161, 0.1167},
        {0.0975, 0.0987, 0.1006, 0.1024, 0.1039, 0.1052, 0.1063, 0.1073, 0.1081, 0.1088, 0.1095},
        {0.0904, 0.0917, 0.0938, 0.0956, 0.0973, 0.0986, 0.0998, 0.1008, 0.1017, 0.1025, 0.1032},
        {0.0842, 0.0857, 0.0878, 0.0897, 0.0914, 0.0928, 0.0941, 0.0951, 0.0961, 0.0969, 0.0976},
        {0.0788, 0.0804, 0.0826, 0.0845, 0.0862, 0.0877, 0.0890, 0.0901, 0.0910, 0.0919, 0.0927},
        {0.0741, 0.0758, 0.0779, 0.0799, 0.0816, 0.0831, 0.0844, 0.0855, 0.0865, 0.0874, 0.0882},
        {0.0699, 0.0716, 0.0738, 0.0758, 0.0775, 0.0790, 0.0803, 0.0814, 0.0825, 0.0834, 0.0842},
        {0.0662, 0.0679, 0.0701, 0.0720, 0.0738, 0.0753, 0.0766, 0.0777, 0.0788, 0.0797, 0.0805},
        {0.0628, 0.0645, 0.0667, 0.0687, 0.0704, 0.0719, 0.0732, 0.0744, 0.0754, 0.0763, 0.0772},
        {0.0597, 0.0615, 0.0636, 0.0656, 0.0673, 0.0688, 0.0701, 0.0713, 0.0723, 0.0733, 0.0741},
        {0.0570, 0.0588, 0.0609, 0.0628, 0.0645, 0.0660, 0.0673, 0.0684, 0.0695, 0.0704, 0.0713},
        {0.0545, 0.0562, 0.0583, 0.0602, 0.0619, 0.0633, 0.0647, 0.0658, 0.0669, 0.0678, 0.0687},
        {0.0522, 0.0539, 0.0560, 0.0578, 0.0595, 0.0609, 0.0622, 0.0634, 0.0644, 0.0654, 0.0662},
        {0.0501, 0.0518, 0.0538, 0.0556, 0.0573, 0.0587, 0.0600, 0.0612, 0.0622, 0.0631, 0.0640},
        {0.0481, 0.0498, 0.0518, 0.0536, 0.0552, 0.0567, 0.0579, 0.0591, 0.0601, 0.0610, 0.0619},
        {0.0463, 0.0480, 0.0499, 0.0517, 0.0533, 0.0547, 0.0560, 0.0571, 0.0581, 0.0591, 0.0599},
        {0.0446, 0.0463, 0.0482, 0.0500, 0.0515, 0.0529, 0.0542, 0.0553, 0.0563, 0.0572, 0.0581},
        {0.0431, 0.0447, 0.0466, 0.0483, 0.0499, 0.0512, 0.0525, 0.0536, 0.0546, 0.0555, 0.0564},
        {0.0416, 0.0432, 0.0451, 0.0468, 0.0483, 0.0497, 0.0509, 0.0520, 0.0530, 0.0539, 0.0547},
        {0.0403, 0.0419, 0.0437, 0.0453, 0.0468, 0.0482, 0.0494, 0.0505, 0.0515, 0.0524, 0.0532},
        {0.0390, 0.0406, 0.0423, 0.0440, 0.0455, 0.0468, 0.0480, 0.0491, 0.0500, 0.0509, 0.0517},
    }};
    VarphiTable t;
    t.k_lo = 9;
    t.k_hi = 30;
    t.ell_lo = 1;
    t.ell_hi = 11;
    for (const auto& row : rows) t.values.emplace_back(row.begin(), row.end());
    return t;
  }();
  return table;
}

double deriv_rhs(int k, double n) {
  if (k < 1) fail(errc::invalid_argument, "deriv_rhs requires k >= 1");
  if (!(n >= static_cast<double>(k) + 2.0))
    fail(errc::invalid_argument, "deriv_rhs requires n >= k + 2");
  double kd = static_cast<double>(k);
  double mode_mass = std::exp(-kd + kd * std::log(kd) - std::lgamma(kd + 1.0));  // e^{-k} k^k / k!
  double factor = 1.0 - 1.0 / n - 1.0 / (n - kd) - 1.0 / (n * (n - kd));
  return kd * mode_mass * factor - 1.0;
}

HardSweepResult hard_instance_sweep(int k, int n, std::int64_t mc_trials, std::uint64_t seed) {
  Instance inst = example_hard_iid(k, n);
  ProphetValue pht = prophet_value(inst, ProphetMode::monte_carlo, mc_trials, seed);

  // Accepting the high value is always right, so the only free choice is the
  // probability of accepting value-1 applicants: the policy (t=1, p). The
  // interesting region is p ~ k/n, hence the geometric grid.
  std::vector<double> grid = {0.0};
  constexpr int kGridPoints = 160;
  for (int i = 0; i <= kGridPoints; ++i)
    grid.push_back(std::pow(10.0, -8.0 + 8.0 * static_cast<double>(i) / kGridPoints));

  HardSweepResult out;
  out.prophet_estimate = pht.value;
  out.prophet_std_error = pht.std_error;
  out.best_ratio = -std::numeric_limits<double>::infinity();
  for (double p : grid) {
    double perf = exact_performance(inst, {1.0, p});
    double ratio = perf / pht.value;
    out.series.push_back({p, perf, ratio});
    if (ratio > out.best_ratio) {
      out.best_ratio = ratio;
      out.best_accept_prob = p;
    }
  }
  return out;
}

DemandBadResult demand_bad_sweep(int k, double eps) {
  if (!(eps > 0.0 && eps < 0.1)) fail(errc::invalid_argument, "demand_bad_sweep requires eps in (0, 0.1)");
  Instance inst = example_demand_bad(k, eps);
  ThresholdPolicy pol = calibrate(inst, {StatKind::expected_demand, k}, static_cast<double>(k));
  DemandBadResult out;
  out.policy = pol;
  out.performance = exact_performance(inst, pol);
  out.prophet = prophet_value(inst, ProphetMode::exact).value;
  out.ratio = out.performance / out.prophet;
  return out;
}

WitnessReport fixed_demand_insufficiency(int k, double phi) {
  if (k < 1 || k >= 5)
    fail(errc::invalid_argument, "fixed_demand_insufficiency is stated for 1 <= k < 5");
  if (!(phi > 0.0) || !std::isfinite(phi))
    fail(errc::invalid_argument, "demand target must be positive and finite");

  WitnessReport rep;
  rep.gamma = gamma_k(k);

  if (std::abs(phi - static_cast<double>(k)) <= 1e-12) {
    DemandBadResult bad = demand_bad_sweep(k, 1e-3);
    rep.branch = "at_supply";
    rep.instance = example_demand_bad(k, 1e-3);
    rep.policy = bad.policy;
    rep.n_used = k + 1;
    rep.ratio = bad.ratio;
    rep.conclusive = rep.ratio < rep.gamma;
    return rep;
  }

  for (std::int64_t n : {100, 1000, 10000}) {
    if (phi > static_cast<double>(n)) continue;  // target not attainable at this size
    Instance inst;
    inst.k = k;
    if (phi < static_cast<double>(k)) {
      // Degenerate all-ones instance: the policy accepts too few applicants.
      rep.branch = "below_supply";
      inst.applicants.assign(static_cast<std::size_t>(n), ValueDistribution({{1.0, 1.0}}));
    } else {
      // All mass worthless except one rare high value; the policy accepts too
      // many zero-value applicants and risks missing the high one.
      rep.branch = "above_supply";
      double rare = 1.0 / static_cast<double>(n);
      inst.applicants.assign(static_cast<std::size_t>(n) - 1, ValueDistribution({{0.0, 1.0}}));
      inst.applicants.push_back(
          ValueDistribution({{0.0, 1.0 - rare}, {static_cast<double>(n), rare}}));
    }
    ThresholdPolicy pol = calibrate(inst, {StatKind::expected_demand, k}, phi);
    double perf = exact_performance(inst, pol);
    double pht = prophet_value(inst, ProphetMode::exact).value;
    rep.n_used = n;
    rep.ratio = perf / pht;
    rep.policy = pol;
    if (rep.ratio < rep.gamma - 1e-9) {
      rep.conclusive = true;
      rep.instance = std::move(inst);
      return rep;
    }
  }
  rep.conclusive = false;
  return rep;
}

IidCheckReport iid_demand_check(int k, int n, const ValueDistribution& dist, std::int64_t trials,
                                std::uint64_t seed) {
  if (k < 1 || n < k) fail(errc::invalid_argument, "iid_demand_check requires n >= k >= 1");
  Instance inst;
  inst.k = k;
  inst.applicants.assign(static_cast<std::size_t>(n), dist);

  IidCheckReport rep;
  rep.gamma = gamma_k(k);
  rep.policy = calibrate(inst, {StatKind::expected_demand, k}, static_cast<double>(k));
  rep.performance = exact_performance(inst, rep.policy);

  double outcomes = std::pow(static_cast<double>(dist.atoms().size()), n);
  if (outcomes <= kProphetEnumerationCap) {
    rep.prophet = prophet_value(inst, ProphetMode::exact).value;
  } else {
    ProphetValue pht = prophet_value(inst, ProphetMode::monte_carlo, trials, seed);
    rep.prophet = pht.value;
    rep.prophet_std_error = pht.std_error;
  }
  rep.ratio = rep.performance / rep.prophet;

  double p = static_cast<double>(k) / static_cast<double>(n);
  rep.binom_ut_ratio = expect_ut_binomial(n, p, k);
  rep.inner_inequality_ok = rep.binom_ut_ratio >= rep.gamma - 1e-9;
  double tolerance = 1e-9 + 4.0 * rep.prophet_std_error * rep.gamma;
  rep.performance_ok = rep.performance >= rep.gamma * rep.prophet - tolerance;
  return rep;
}

UtCurve ut_guarantee_curve(int k, std::span<const double> levels) {
  if (k < 1) fail(errc::invalid_argument, "ut_guarantee_curve requires k >= 1");
  constexpr std::int64_t kLargeN = 10000;
  UtCurve out;
  out.peak_bound = -std::numeric_limits<double>::infinity();
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) fail(errc::invalid_argument, "utilization levels must lie in (0,1)");
    double bound = std::min(a, phi_ar_ut(kLargeN, k, a).value);
    out.series.push_back({a, bound});
    if (bound > out.peak_bound) {
      out.peak_bound = bound;
      out.peak_level = a;
    }
  }
  return out;
}

StockoutProbe stockout_conjecture_probe(int k, std::span<const Instance> corpus) {
  if (corpus.empty()) fail(errc::invalid_argument, "stockout probe needs a nonempty corpus");
  StockoutProbe probe;
  probe.target = poisson_stockout(k, k);
  probe.min_ratio_lp = std::numeric_limits<double>::infinity();
  double gamma = gamma_k(k);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    Instance inst = corpus[i];
    inst.k = k;
    ThresholdPolicy pol;
    try {
      pol = calibrate(inst, {StatKind::stockout_probability, k}, probe.target);
    } catch (const error&) {
      probe.skipped.push_back(i);
      continue;
    }
    double perf = exact_performance(inst, pol);
    double lp = lp_relaxation(inst).value;
    double ratio = lp > 0.0 ? perf / lp : 0.0;
    probe.ratios.push_back(ratio);
    probe.min_ratio_lp = std::min(probe.min_ratio_lp, ratio);
    if (ratio < gamma - 1e-9) probe.flagged.push_back(i);
  }
  return probe;
}

// ---------------------------------------------------------------------------
// Assertion suite
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CheckContext {
  VerifySummary summary;

  template <typename Fn>
  void run(const std::string& name, Fn&& body) {
    CheckResult res;
    res.name = name;
    try {
      std::ostringstream detail;
      res.passed = body(detail);
      res.detail = detail.str();
    } catch (const std::exception& e) {
      res.passed = false;
      res.detail = std::string("exception: ") + e.what();
    }
    if (!res.passed) ++summary.failures;
    summary.checks.push_back(std::move(res));
  }
};

Instance corpus_instance(std::uint64_t i) {
  return random_instance(0xC0FFEE + i, 8, 4, 4);
}

}  // namespace

VerifySummary run_all_checks(bool fast) {
  CheckContext ctx;

  ctx.run("gamma_identity", [&](std::ostringstream& detail) {
    double worst = 0.0;
    for (int k = 1; k <= 50; ++k) {
      double g = gamma_k(k);
      worst = std::max(worst, std::abs(expect_ut_poisson(k, k) - g));
      worst = std::max(worst, std::abs(expect_ar_poisson(k, k) - g));
    }
    detail << "max deviation " << fmt(worst);
    return worst <= 1e-10;
  });

  ctx.run("poisson_identity", [&](std::ostringstream& detail) {
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k) {
      for (double lambda : {0.5, 1.0, static_cast<double>(k), 3.0 * k}) {
        double lhs = k * expect_ut_poisson(lambda, k);
        double mid = lambda * poisson_cdf_below(lambda, k) + k * poisson_tail_above(lambda, k);
        double rhs = lambda * expect_ar_poisson(lambda, k);
        worst = std::max({worst, std::abs(lhs - mid), std::abs(mid - rhs)});
      }
    }
    detail << "max deviation " << fmt(worst);
    return worst <= 1e-10;
  });

  ctx.run("acceptance_identity", [&](std::ostringstream& detail) {
    int max_len = fast ? 10 : 12;
    for (int len = 1; len <= max_len; ++len) {
      for (std::uint32_t bits = 0; bits < (1u << len); ++bits) {
        int total = __builtin_popcount(bits);
        for (int k = 1; k <= 6; ++k) {
          double rhs = 0.0;
          for (int i = 0; i < len; ++i) {
            int d_i = (bits >> i) & 1u;
            if (d_i) rhs += acceptance_rate(k, total - 1);
          }
          double lhs = std::min(total, k);
          if (std::abs(lhs - rhs) > 1e-12) {
            detail << "violated at len=" << len << " bits=" << bits << " k=" << k;
            return false;
          }
        }
      }
    }
    detail << "exhaustive up to length " << max_len;
    return true;
  });

  ctx.run("pnk_upper_bound", [&](std::ostringstream& detail) {
    int n_hi = fast ? 80 : 200;
    for (int k = 1; k <= 10; ++k) {
      for (int n = k + 1; n <= n_hi; ++n) {
        double p = phi_ar_ut(n, k, gamma_k(k)).p_root;
        if (p > static_cast<double>(k) / n + 1e-9) {
          detail << "p_{n,k} > k/n at k=" << k << " n=" << n << " (p=" << fmt(p) << ")";
          return false;
        }
      }
    }
    detail << "p_{n,k} <= k/n up to n=" << n_hi;
    return true;
  });

  ctx.run("poisson_binomial_facts", [&](std::ostringstream& detail) {
    int vectors = fast ? 120 : 500;
    for (int c = 0; c < vectors; ++c) {
      std::mt19937_64 rng(mix64(0xFAC7 + static_cast<std::uint64_t>(c)));
      int n = 1 + static_cast<int>(uniform_below(rng, 12));
      std::vector<double> q(static_cast<std::size_t>(n));
      for (double& v : q) v = uniform01(rng);
      PoissonBinomial pb(q);
      const auto& h = pb.pmf();
      const auto& H = pb.cdf();
      double lambda = pb.mean();

      double mass = 0.0, mean = 0.0;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[j] < 0.0) { detail << "negative pmf entry"; return false; }
        mass += h[j];
        mean += static_cast<double>(j) * h[j];
      }
      if (std::abs(mass - 1.0) > 1e-12) { detail << "pmf does not sum to 1"; return false; }
      if (std::abs(H.back() - 1.0) > 1e-12) { detail << "cdf does not end at 1"; return false; }
      if (std::abs(mean - lambda) > 1e-10) { detail << "mean mismatch"; return false; }

      int first = -1, last = -1;
      for (std::size_t j = 0; j < h.size(); ++j) {
        if (h[j] > 0.0) {
          if (first < 0) first = static_cast<int>(j);
          last = static_cast<int>(j);
        }
      }
      for (int j = first; j <= last; ++j)
        if (!(h[static_cast<std::size_t>(j)] > 0.0)) { detail << "support not an interval"; return false; }

      for (std::size_t j = 1; j + 1 < h.size(); ++j) {
        double lhs = h[j] * h[j];
        if (lhs - h[j - 1] * h[j + 1] < -1e-14 * std::max(lhs, 1e-300)) {
          detail << "log-concavity violated";
          return false;
        }
      }

      std::size_t lo_mode = static_cast<std::size_t>(std::floor(lambda));
      std::size_t hi_mode = static_cast<std::size_t>(std::ceil(lambda));
      double hmax = *std::max_element(h.begin(), h.end());
      if (h[lo_mode] < hmax * (1.0 - 1e-12) && h[hi_mode] < hmax * (1.0 - 1e-12)) {
        detail << "mode outside {floor(lambda), ceil(lambda)}";
        return false;
      }
      for (std::size_t j = 0; j < lo_mode; ++j)
        if (h[j] > h[j + 1] * (1.0 + 1e-12) + 1e-300) { detail << "not nondecreasing below the mode"; return false; }
      for (std::size_t j = hi_mode; j + 1 < h.size(); ++j)
        if (h[j + 1] > h[j] * (1.0 + 1e-12) + 1e-300) { detail << "not nonincreasing above the mode"; return false; }

      for (std::size_t j = 2; j < h.size(); ++j) {
        double lhs = H[j - 2] * h[j - 1];
        double rhs = H[j - 1] * h[j - 2];
        if (lhs > rhs + 1e-14 * std::max(1.0, rhs)) {
          detail << "hazard inequality violated";
          return false;
        }
      }
    }
    detail << vectors << " random vectors";
    return true;
  });

  ctx.run("statistic_monotonicity", [&](std::ostringstream& detail) {
    for (int c = 0; c < 50; ++c) {
      std::mt19937_64 rng(mix64(0x517A7 + static_cast<std::uint64_t>(c)));
      int n = 2 + static_cast<int>(uniform_below(rng, 8));
      int k = 1 + static_cast<int>(uniform_below(rng, 4));
      std::vector<double> q(static_cast<std::size_t>(n));
      for (double& v : q) v = uniform01(rng) * 0.9;
      std::size_t i = static_cast<std::size_t>(uniform_below(rng, static_cast<std::uint64_t>(n)));
      std::vector<double> bumped = q;
      bumped[i] = std::min(1.0, bumped[i] + 0.05);
      PoissonBinomial base(q), up(bumped);
      for (StatKind kind : {StatKind::expected_demand, StatKind::expected_utilization,
                            StatKind::stockout_probability, StatKind::acceptance_rate}) {
        DemandStatistic stat{kind, k};
        double before = expect_statistic(base, stat);
        double after = expect_statistic(up, stat);
        bool increasing = kind != StatKind::acceptance_rate;
        double delta = increasing ? after - before : before - after;
        if (delta < -1e-12) {
          detail << "monotonicity violated for " << stat_kind_name(kind);
          return false;
        }
      }
    }
    detail << "coordinate perturbations on 50 vectors";
    return true;
  });

  ctx.run("binomial_closed_form_agreement", [&](std::ostringstream& detail) {
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k) {
      for (int n = k; n <= 60; ++n) {
        std::vector<double> q(static_cast<std::size_t>(n), static_cast<double>(k) / n);
        double via_pmf = expect_statistic(PoissonBinomial(q), {StatKind::acceptance_rate, k});
        worst = std::max(worst, std::abs(via_pmf - binomial_ar_closed(n, k)));
      }
    }
    detail << "max deviation " << fmt(worst);
    return worst <= 1e-12;
  });

  ctx.run("tail_closed_form", [&](std::ostringstream& detail) {
    int n_hi = fast ? 150 : 500;
    double worst = 0.0;
    for (int k = 1; k <= 10; ++k) {
      for (int n = k; n <= n_hi; ++n) {
        double p = static_cast<double>(k) / n;
        double above = std::max(0.0, 1.0 - binomial_cdf_below(n, p, k) - binomial_pmf(n, p, k));
        double alt = 1.0 - above / (n + 1.0) -
                     (1.0 - static_cast<double>(k) / (n + 1.0)) * binomial_pmf(n, p, k);
        worst = std::max(worst, std::abs(alt - binomial_ar_closed(n, k)));
      }
    }
    detail << "max deviation " << fmt(worst);
    return worst <= 1e-12;
  });

  ctx.run("varphi_reference_table", [&](std::ostringstream& detail) {
    VarphiTable got = varphi_table();
    const VarphiTable& want = varphi_reference();
    int mismatches = 0;
    for (std::size_t r = 0; r < want.values.size(); ++r)
      for (std::size_t c = 0; c < want.values[r].size(); ++c)
        if (std::abs(got.values[r][c] - want.values[r][c]) > 5e-5) ++mismatches;
    bool monotone = true;
    for (const auto& row : got.values)
      for (std::size_t c = 0; c + 1 < row.size(); ++c)
        if (row[c + 1] < row[c]) monotone = false;
    detail << "242 entries, " << mismatches << " mismatches; rows "
           << (monotone ? "nondecreasing" : "NOT nondecreasing");
    return mismatches == 0 && monotone;
  });

  ctx.run("derivative_bound_positivity", [&](std::ostringstream& detail) {
    if (!(deriv_rhs(31, 33) > 0.0)) { detail << "deriv_rhs(31,33) not positive"; return false; }
    if (!(deriv_rhs(9, 20) > 0.0)) { detail << "deriv_rhs(9,20) not positive"; return false; }
    for (int k : {9, 15, 31}) {
      double prev = deriv_rhs(k, k + 2.0);
      for (int step = 1; step <= 40; ++step) {
        double cur = deriv_rhs(k, k + 2.0 + step);
        if (cur < prev - 1e-12) { detail << "deriv_rhs not increasing in n at k=" << k; return false; }
        prev = cur;
      }
    }
    detail << "deriv_rhs(31,33)=" << fmt(deriv_rhs(31, 33)) << ", deriv_rhs(9,20)=" << fmt(deriv_rhs(9, 20));
    return true;
  });

  ctx.run("lemma8_infimum_identity", [&](std::ostringstream& detail) {
    std::int64_t cap = fast ? 1500 : 5000;
    for (int k = 1; k <= 30; ++k) {
      InfimumResult res = infimum_ar(k, cap);  // includes the identity assert
      if (k <= 4 && res.argmin_finite != k) {
        detail << "argmin != k for k=" << k;
        return false;
      }
      if (k >= 5 && k <= 8) {
        if (res.argmin_finite != cap) {
          detail << "running minimum not at the cap for k=" << k;
          return false;
        }
        if (std::abs(res.min_finite - gamma_k(k)) > 1e-3) {
          detail << "running minimum not within 1e-3 of gamma for k=" << k;
          return false;
        }
      }
    }
    detail << "k = 1..30, cap " << cap;
    return true;
  });

  ctx.run("utilization_calibration_guarantee", [&](std::ostringstream& detail) {
    int count = fast ? 50 : 200;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(static_cast<std::uint64_t>(i));
      double gamma = gamma_k(inst.k);
      ThresholdPolicy pol = calibrate(inst, {StatKind::expected_utilization, inst.k}, gamma);
      double perf = exact_performance(inst, pol);
      double lp = lp_relaxation(inst).value;
      double pht = prophet_value(inst, ProphetMode::exact).value;
      worst_margin = std::min({worst_margin, perf - gamma * lp, perf - gamma * pht});
      if (perf < gamma * lp - 1e-9 || perf < gamma * pht - 1e-9) {
        detail << "guarantee violated on instance " << i;
        return false;
      }
    }
    detail << count << " instances, worst margin " << fmt(worst_margin);
    return true;
  });

  ctx.run("demand_calibration_guarantee", [&](std::ostringstream& detail) {
    int count = fast ? 50 : 200;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(static_cast<std::uint64_t>(i));
      double bound = std::min(gamma_k(inst.k), static_cast<double>(inst.k) / (inst.k + 1));
      ThresholdPolicy pol = calibrate(inst, {StatKind::expected_demand, inst.k},
                                      static_cast<double>(inst.k));
      double perf = exact_performance(inst, pol);
      double pht = prophet_value(inst, ProphetMode::exact).value;
      worst_margin = std::min(worst_margin, perf - bound * pht);
      if (perf < bound * pht - 1e-9) {
        detail << "guarantee violated on instance " << i;
        return false;
      }
    }
    detail << count << " instances, worst margin " << fmt(worst_margin);
    return true;
  });

  ctx.run("calibration_fixed_point", [&](std::ostringstream& detail) {
    int count = fast ? 60 : 200;
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(0x9000 + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(mix64(0xF1D0 + static_cast<std::uint64_t>(i)));
      std::vector<double> atoms;
      for (const auto& dist : inst.applicants)
        for (const Atom& a : dist.atoms()) atoms.push_back(a.value);
      double t = atoms[uniform_below(rng, atoms.size())];
      double p = uniform01(rng);
      for (StatKind kind : {StatKind::expected_demand, StatKind::expected_utilization,
                            StatKind::stockout_probability}) {
        DemandStatistic stat{kind, inst.k};
        double target = statistic_value(inst, {t, p}, stat);
        ThresholdPolicy pol = calibrate(inst, stat, target);
        worst = std::max(worst, std::abs(statistic_value(inst, pol, stat) - target));
      }
    }
    detail << count << " instances x 3 statistics, worst residual " << fmt(worst);
    return worst <= 1e-10;
  });

  ctx.run("demand_bad_envelope", [&](std::ostringstream& detail) {
    for (int k = 1; k <= 4; ++k) {
      DemandBadResult res = demand_bad_sweep(k, 1e-3);
      double lo = std::min(gamma_k(k), static_cast<double>(k) / (k + 1)) - 1e-9;
      double hi = static_cast<double>(k) / (k + 1) + 0.01;
      if (res.ratio < lo || res.ratio > hi) {
        detail << "ratio " << fmt(res.ratio) << " outside [" << fmt(lo) << ", " << fmt(hi)
               << "] at k=" << k;
        return false;
      }
    }
    detail << "k = 1..4 at eps = 1e-3";
    return true;
  });

  ctx.run("demand_calibrated_ut_dominates_ar", [&](std::ostringstream& detail) {
    int count = fast ? 60 : 200;
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(static_cast<std::uint64_t>(i));
      ThresholdPolicy pol = calibrate(inst, {StatKind::expected_demand, inst.k},
                                      static_cast<double>(inst.k));
      double ut = statistic_value(inst, pol, {StatKind::expected_utilization, inst.k});
      double ar = statistic_value(inst, pol, {StatKind::acceptance_rate, inst.k});
      if (ut < ar - 1e-12) {
        detail << "E[UT] < E[AR] on instance " << i;
        return false;
      }
    }
    detail << count << " demand-calibrated instances";
    return true;
  });

  ctx.run("benchmark_ordering", [&](std::ostringstream& detail) {
    int count = fast ? 15 : 50;
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(0x2000 + static_cast<std::uint64_t>(i));
      double pht = prophet_value(inst, ProphetMode::exact).value;
      double lp = lp_relaxation(inst).value;
      if (pht > lp + 1e-9) {
        detail << "PHT > LP on instance " << i;
        return false;
      }
      std::mt19937_64 rng(mix64(0xBEEF + static_cast<std::uint64_t>(i)));
      for (int s = 0; s < 20; ++s) {
        double t = 12.0 * uniform01(rng);
        double cap = t * inst.k + surplus_mass(inst, t);
        if (lp > cap + 1e-9) {
          detail << "LP > t*k + U(t,F) on instance " << i;
          return false;
        }
      }
    }
    detail << count << " instances x 20 thresholds";
    return true;
  });

  ctx.run("performance_lower_bound", [&](std::ostringstream& detail) {
    int count = fast ? 30 : 100;
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(0x3000 + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(mix64(0x1EE7 + static_cast<std::uint64_t>(i)));
      ThresholdPolicy pol{10.5 * uniform01(rng), uniform01(rng)};
      double perf = exact_performance(inst, pol);
      double ut = statistic_value(inst, pol, {StatKind::expected_utilization, inst.k});
      double ar = statistic_value(inst, pol, {StatKind::acceptance_rate, inst.k});
      double lower = pol.t * inst.k * ut + surplus_mass(inst, pol.t) * ar;
      if (perf < lower - 1e-9) {
        detail << "performance below its decomposition bound on instance " << i;
        return false;
      }
      double lp = lp_relaxation(inst).value;
      double ratio_lp = lp > 0.0 ? perf / lp : 0.0;
      if (ratio_lp < std::min(ut, ar) - 1e-9) {
        detail << "ratio_lp below min(E[UT], E[AR]) on instance " << i;
        return false;
      }
    }
    detail << count << " instances with random policies";
    return true;
  });

  ctx.run("oracle_agreement", [&](std::ostringstream& detail) {
    int count = fast ? 10 : 50;
    std::int64_t trials = fast ? 20000 : 100000;
    double worst_sigma = 0.0;
    for (int i = 0; i < count; ++i) {
      Instance inst = corpus_instance(0x4000 + static_cast<std::uint64_t>(i));
      std::mt19937_64 rng(mix64(0xABBA + static_cast<std::uint64_t>(i)));
      std::vector<double> atoms;
      for (const auto& dist : inst.applicants)
        for (const Atom& a : dist.atoms()) atoms.push_back(a.value);
      ThresholdPolicy pol{atoms[uniform_below(rng, atoms.size())], uniform01(rng)};
      double exact = exact_performance(inst, pol);
      MonteCarloEstimate sim = simulate_performance(inst, pol, trials, 0x5EED + i);
      double sigma = sim.std_error > 0.0 ? std::abs(sim.estimate - exact) / sim.std_error : 0.0;
      worst_sigma = std::max(worst_sigma, sigma);
      if (std::abs(sim.estimate - exact) > 4.0 * sim.std_error + 1e-12) {
        detail << "simulation disagrees with exact value on instance " << i << " (" << fmt(sigma)
               << " sigma)";
        return false;
      }
    }
    detail << count << " instances at " << trials << " trials, worst " << fmt(worst_sigma)
           << " sigma";
    return true;
  });

  ctx.run("utilization_curve_peak", [&](std::ostringstream& detail) {
    for (int k = 1; k <= 3; ++k) {
      std::vector<double> levels;
      for (int i = 1; i <= 19; ++i) levels.push_back(0.05 * i);
      levels.push_back(gamma_k(k));
      std::sort(levels.begin(), levels.end());
      UtCurve curve = ut_guarantee_curve(k, levels);
      if (std::abs(curve.peak_level - gamma_k(k)) > 1e-9 ||
          std::abs(curve.peak_bound - gamma_k(k)) > 1e-3) {
        detail << "peak not at gamma_k for k=" << k << " (level " << fmt(curve.peak_level)
               << ", bound " << fmt(curve.peak_bound) << ")";
        return false;
      }
    }
    detail << "k = 1..3";
    return true;
  });

  ctx.run("binomial_ut_dominates_gamma", [&](std::ostringstream& detail) {
    for (int k = 1; k <= 10; ++k) {
      double gamma = gamma_k(k);
      for (int n = k; n <= 200; ++n) {
        if (expect_ut_binomial(n, static_cast<double>(k) / n, k) < gamma - 1e-9) {
          detail << "E[UT_k(Bin(n,k/n))] < gamma_k at k=" << k << " n=" << n;
          return false;
        }
      }
    }
    detail << "k <= 10, n <= 200";
    return true;
  });

  ctx.run("fixed_demand_witnesses", [&](std::ostringstream& detail) {
    for (int k = 2; k <= (fast ? 2 : 4); ++k) {
      for (double phi : {0.75 * k, static_cast<double>(k), 1.5 * k}) {
        WitnessReport rep = fixed_demand_insufficiency(k, phi);
        if (!rep.conclusive) {
          detail << "no conclusive witness for k=" << k << " phi=" << fmt(phi);
          return false;
        }
      }
    }
    detail << "every target branch produced a sub-gamma witness";
    return true;
  });

  ctx.run("iid_demand_guarantee", [&](std::ostringstream& detail) {
    ValueDistribution dist({{1.0, 1.0 / 3}, {2.0, 1.0 / 3}, {3.0, 1.0 / 3}});
    IidCheckReport rep = iid_demand_check(2, 6, dist, 50000, 7);
    if (!rep.inner_inequality_ok || !rep.performance_ok) {
      detail << "IID guarantee failed (ratio " << fmt(rep.ratio) << ", inner "
             << fmt(rep.binom_ut_ratio) << ")";
      return false;
    }
    detail << "ratio " << fmt(rep.ratio) << " >= gamma_2 = " << fmt(rep.gamma);
    return true;
  });

  ctx.run("bernoulli_structure_agreement", [&](std::ostringstream& detail) {
    int count = fast ? 25 : 100;
    double step = 0.02;
    for (int i = 0; i < count; ++i) {
      std::mt19937_64 rng(mix64(0x8EED + static_cast<std::uint64_t>(i)));
      BernoulliProgram prog;
      prog.n = 2 + static_cast<int>(uniform_below(rng, 3));
      prog.f.resize(static_cast<std::size_t>(prog.n) + 1);
      prog.g.resize(static_cast<std::size_t>(prog.n) + 1);
      for (double& v : prog.f) v = 2.0 * uniform01(rng) - 1.0;
      for (double& v : prog.g) v = 2.0 * uniform01(rng) - 1.0;
      // draw phi from the attainable range: E[g] at a random interior point
      std::vector<double> probe(static_cast<std::size_t>(prog.n));
      for (double& v : probe) v = uniform01(rng);
      PoissonBinomial pb(probe);
      double phi = 0.0;
      for (std::size_t j = 0; j < pb.pmf().size(); ++j) phi += prog.g[j] * pb.pmf()[j];
      prog.phi = phi;

      BruteResult brute = phi_brute(prog, step);
      StructuredResult structured = phi_structured(prog, 1e-9);
      double lf = 0.0;
      for (std::size_t j = 0; j + 1 < prog.f.size(); ++j)
        lf = std::max(lf, std::abs(prog.f[j + 1] - prog.f[j]));
      double slack = static_cast<double>(prog.n) * step * lf + 1e-6;
      if (structured.value > brute.value + slack) {
        detail << "structured optimum beaten by the grid on program " << i << " ("
               << fmt(structured.value) << " vs " << fmt(brute.value) << ")";
        return false;
      }
    }
    detail << count << " random programs";
    return true;
  });

  ctx.run("hard_instance_envelope", [&](std::ostringstream& detail) {
    int k = 1;
    int n = fast ? 2000 : 10000;
    std::int64_t trials = fast ? 20000 : 100000;
    HardSweepResult sweep = hard_instance_sweep(k, n, trials, 42);
    double w = w_constant(k);
    double rel_se = sweep.prophet_std_error / sweep.prophet_estimate;
    double envelope = gamma_k(k) +
                      2.0 * k * w * (std::pow(n, -2.0 / 3.0) + std::pow(n, -1.0 / 3.0)) +
                      4.0 * rel_se;
    if (sweep.best_ratio > envelope) {
      detail << "best ratio " << fmt(sweep.best_ratio) << " above envelope " << fmt(envelope);
      return false;
    }
    double prophet_lb = k + w - (1.0 + w) / (n + 1.0);
    if (sweep.prophet_estimate < prophet_lb - 4.0 * sweep.prophet_std_error) {
      detail << "prophet estimate " << fmt(sweep.prophet_estimate) << " below its lower bound "
             << fmt(prophet_lb);
      return false;
    }
    detail << "best ratio " << fmt(sweep.best_ratio) << " <= envelope " << fmt(envelope);
    return true;
  });

  ctx.run("stockout_probe_report", [&](std::ostringstream& detail) {
    std::vector<Instance> corpus;
    for (int i = 0; i < (fast ? 20 : 60); ++i) corpus.push_back(corpus_instance(0x6000 + static_cast<std::uint64_t>(i)));
    StockoutProbe one = stockout_conjecture_probe(1, corpus);
    // At k = 1 stockout equals expected utilization, so the guarantee holds.
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      Instance inst = corpus[i];
      inst.k = 1;
      ThresholdPolicy via_stockout = calibrate(inst, {StatKind::stockout_probability, 1}, one.target);
      ThresholdPolicy via_ut = calibrate(inst, {StatKind::expected_utilization, 1}, gamma_k(1));
      if (std::abs(via_stockout.t - via_ut.t) > 1e-12 || std::abs(via_stockout.p - via_ut.p) > 1e-9) {
        detail << "stockout and utilization calibration disagree at k=1";
        return false;
      }
    }
    if (!one.flagged.empty()) {
      detail << "ratio below gamma_1 at k=1 (contradiction)";
      return false;
    }
    StockoutProbe three = stockout_conjecture_probe(3, corpus);
    detail << "k=1 min ratio " << fmt(one.min_ratio_lp) << "; k=3 min ratio "
           << fmt(three.min_ratio_lp) << " over " << three.ratios.size() << " instances, "
           << three.flagged.size() << " flagged (evidence only)";
    return true;
  });

  return ctx.summary;
}

std::string verify_summary_to_json(const VerifySummary& summary) {
  nlohmann::ordered_json doc;
  doc["failures"] = summary.failures;
  doc["total"] = summary.checks.size();
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const CheckResult& c : summary.checks) {
    nlohmann::ordered_json item;
    item["name"] = c.name;
    item["passed"] = c.passed;
    item["detail"] = c.detail;
    checks.push_back(std::move(item));
  }
  doc["checks"] = std::move(checks);
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// CSV emitters
// ---------------------------------------------------------------------------

namespace {

std::string csv_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

std::string ar_curve_csv(const ArCurve& curve) {
  std::ostringstream os;
  os << "n,acceptance_rate\n";
  for (const SeriesPoint& pt : curve.series) os << pt.n << "," << csv_num(pt.value) << "\n";
  return os.str();
}

std::string ut_curve_csv(const UtCurve& curve) {
  std::ostringstream os;
  os << "utilization,bound\n";
  for (const UtCurvePoint& pt : curve.series)
    os << csv_num(pt.level) << "," << csv_num(pt.bound) << "\n";
  return os.str();
}

std::string varphi_table_csv(const VarphiTable& table) {
  std::ostringstream os;
  os << "k";
  for (int ell = table.ell_lo; ell <= table.ell_hi; ++ell) os << ",ell_" << ell;
  os << "\n";
  for (std::size_t r = 0; r < table.values.size(); ++r) {
    os << (table.k_lo + static_cast<int>(r));
    for (double v : table.values[r]) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.4f", v);
      os << "," << buf;
    }
    os << "\n";
  }
  return os.str();
}

std::string hard_sweep_csv(const HardSweepResult& sweep) {
  std::ostringstream os;
  os << "accept_prob,performance,ratio\n";
  for (const HardSweepPoint& pt : sweep.series)
    os << csv_num(pt.accept_prob) << "," << csv_num(pt.performance) << "," << csv_num(pt.ratio)
       << "\n";
  return os.str();
}

std::string demand_bad_csv(int k, double eps, const DemandBadResult& result) {
  std::ostringstream os;
  os << "k,eps,threshold,tie_break,performance,prophet,ratio\n";
  os << k << "," << csv_num(eps) << "," << csv_num(result.policy.t) << ","
     << csv_num(result.policy.p) << "," << csv_num(result.performance) << ","
     << csv_num(result.prophet) << "," << csv_num(result.ratio) << "\n";
  return os.str();
}

}  // namespace prophetsec
