#include "calibration.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace prophetsec {

double statistic_value(const Instance& inst, const ThresholdPolicy& pol, const DemandStatistic& stat) {
  EligibilitySummary el = eligibility(inst, pol);
  if (stat.kind == StatKind::expected_demand) {
    double s = 0.0;
    for (double q : el.q) s += q;
    return s;
  }
  return expect_statistic(PoissonBinomial(std::move(el.q)), stat);
}

double target_for(StatKind kind, int k) {
  if (k < 1) fail(errc::invalid_argument, "target_for requires k >= 1");
  switch (kind) {
    case StatKind::expected_utilization: return gamma_k(k);
    case StatKind::expected_demand: return static_cast<double>(k);
    case StatKind::stockout_probability: return poisson_stockout(k, k);
    case StatKind::acceptance_rate:
      fail(errc::invalid_argument, "acceptance_rate has no designated calibration target");
  }
  fail(errc::invalid_argument, "unknown statistic kind");
}

namespace {

constexpr double kAchieveTol = 1e-10;  // |achieved - target| postcondition
constexpr double kSnapTol = 1e-12;     // canonical p=0 / p=1 snapping
constexpr int kBisectIters = 200;

std::string format_range(double lo, double hi) {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo << ", " << hi << "]";
  return os.str();
}

}  // namespace

ThresholdPolicy calibrate(const Instance& inst, const DemandStatistic& stat, double target) {
  validate_instance(inst);
  if (stat.kind == StatKind::acceptance_rate)
    fail(errc::invalid_argument, "acceptance_rate is not a calibration statistic (monotone decreasing)");
  if (!std::isfinite(target)) fail(errc::invalid_argument, "calibration target must be finite");

  std::set<double, std::greater<double>> atom_values;
  for (const ValueDistribution& dist : inst.applicants)
    for (const Atom& a : dist.atoms()) atom_values.insert(a.value);
  std::vector<double> atoms(atom_values.begin(), atom_values.end());

  auto stat_at = [&](double t, double p) { return statistic_value(inst, {t, p}, stat); };
  double scale = std::max(1.0, std::abs(target));

  // Zero demand end of the range: everything above the largest atom.
  double lo_value = stat_at(atoms.front(), 0.0);
  if (target < lo_value - kAchieveTol)
    fail(errc::unattainable, "target " + std::to_string(target) + " below attainable range " +
                                 format_range(lo_value, stat_at(atoms.back(), 1.0)));
  if (std::abs(lo_value - target) <= kSnapTol * scale) return {atoms.front(), 0.0};

  double prev_hi = lo_value;
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    double t = atoms[j];
    double lo = stat_at(t, 0.0);
    double hi = stat_at(t, 1.0);
    // Monotone bracketing: values are nondecreasing as the scan descends.
    if (lo < prev_hi - 1e-9 * scale || hi < lo - 1e-9 * scale)
      fail(errc::convergence, "statistic not monotone along the atom scan");
    prev_hi = hi;

    if (std::abs(lo - target) <= kSnapTol * scale) return {t, 0.0};
    if (hi < target - kSnapTol * scale) continue;

    if (std::abs(hi - target) <= kSnapTol * scale) {
      // Prefer the p=0 form at the next atom when one exists.
      if (j + 1 < atoms.size()) return {atoms[j + 1], 0.0};
      return {t, 1.0};
    }

    // Bracketed: lo < target < hi. The statistic is continuous and monotone
    // nondecreasing in p, so bisection converges.
    double pl = 0.0, ph = 1.0;
    double achieved = lo;
    for (int it = 0; it < kBisectIters && ph - pl > 1e-12; ++it) {
      double pm = 0.5 * (pl + ph);
      achieved = stat_at(t, pm);
      if (achieved < target)
        pl = pm;
      else
        ph = pm;
    }
    double p = 0.5 * (pl + ph);
    achieved = stat_at(t, p);
    if (std::abs(achieved - target) > kAchieveTol)
      fail(errc::convergence, "bisection did not reach the target within tolerance (residual " +
                                  std::to_string(achieved - target) + ")");
    return {t, p};
  }

  double hi_value = stat_at(atoms.back(), 1.0);
  fail(errc::unattainable, "target " + std::to_string(target) + " above attainable range " +
                               format_range(lo_value, hi_value));
}

}  // namespace prophetsec
