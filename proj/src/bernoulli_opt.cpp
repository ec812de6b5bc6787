#include "bernoulli_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

#include "errors.hpp"
#include "probcore.hpp"

namespace prophetsec {

void validate_program(const BernoulliProgram& prog) {
  if (prog.n < 1) fail(errc::invalid_argument, "program needs n >= 1");
  auto check = [&](const std::vector<double>& table, const char* name) {
    if (table.size() != static_cast<std::size_t>(prog.n) + 1)
      fail(errc::invalid_argument, std::string(name) + " table must have length n+1");
    for (double v : table)
      if (!std::isfinite(v)) fail(errc::invalid_argument, std::string(name) + " table has a non-finite entry");
  };
  check(prog.f, "f");
  check(prog.g, "g");
  if (!std::isfinite(prog.phi)) fail(errc::invalid_argument, "phi must be finite");
}

namespace {

// pmf of Bin(j, p) by convolution; exact for the small j used here.
std::vector<double> binom_pmf_vector(int j, double p) {
  std::vector<double> pmf(static_cast<std::size_t>(j) + 1, 0.0);
  pmf[0] = 1.0;
  for (int i = 0; i < j; ++i) {
    for (int d = i; d >= 0; --d) {
      double h = pmf[static_cast<std::size_t>(d)];
      pmf[static_cast<std::size_t>(d) + 1] += h * p;
      pmf[static_cast<std::size_t>(d)] = h * (1.0 - p);
    }
  }
  return pmf;
}

double shifted_expectation(const std::vector<double>& table, int shift, const std::vector<double>& pmf) {
  double s = 0.0;
  for (std::size_t i = 0; i < pmf.size(); ++i) s += table[static_cast<std::size_t>(shift) + i] * pmf[i];
  return s;
}

double table_lipschitz(const std::vector<double>& table) {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < table.size(); ++j) m = std::max(m, std::abs(table[j + 1] - table[j]));
  return m;
}

}  // namespace

BruteResult phi_brute(const BernoulliProgram& prog, double grid_step) {
  validate_program(prog);
  if (prog.n > 5) fail(errc::invalid_argument, "phi_brute is limited to n <= 5");
  bool step_ok = false;
  for (double s : {0.05, 0.02, 0.01})
    if (std::abs(grid_step - s) < 1e-15) step_ok = true;
  if (!step_ok) fail(errc::invalid_argument, "grid_step must be one of 0.05, 0.02, 0.01");

  int steps = static_cast<int>(std::lround(1.0 / grid_step));
  double points_per_axis = static_cast<double>(steps + 1);
  double leaves = std::pow(points_per_axis, prog.n);
  if (leaves > 5e8) fail(errc::cap_exceeded, "grid too large for exhaustive search");

  int n = prog.n;
  // The constraint expectation moves by at most this much between adjacent
  // grid points, which is the resolution the oracle can match phi at.
  double slack = 0.5 * grid_step * static_cast<double>(n) * table_lipschitz(prog.g);

  std::vector<int> coord(static_cast<std::size_t>(n), 0);
  // pmf of the first d coordinates, maintained along the depth-first walk.
  std::vector<std::vector<double>> pmf_stack(static_cast<std::size_t>(n) + 1);
  for (int d = 0; d <= n; ++d) pmf_stack[static_cast<std::size_t>(d)].assign(static_cast<std::size_t>(d) + 1, 0.0);
  pmf_stack[0][0] = 1.0;

  double best_violation = std::numeric_limits<double>::infinity();
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<int> best_coord(static_cast<std::size_t>(n), 0);
  double best_value_violation = 0.0;

  // Two passes share this walker: pass 0 finds the minimal violation, pass 1
  // minimizes E[f] within the admitted band.
  for (int pass = 0; pass < 2; ++pass) {
    double band = pass == 0 ? 0.0 : best_violation + slack;
    std::fill(coord.begin(), coord.end(), 0);
    int depth = 0;
    while (true) {
      if (depth == n) {
        const std::vector<double>& pmf = pmf_stack[static_cast<std::size_t>(n)];
        double eg = 0.0;
        for (int j = 0; j <= n; ++j) eg += prog.g[static_cast<std::size_t>(j)] * pmf[static_cast<std::size_t>(j)];
        double violation = std::abs(eg - prog.phi);
        if (pass == 0) {
          best_violation = std::min(best_violation, violation);
        } else if (violation <= band) {
          double ef = 0.0;
          for (int j = 0; j <= n; ++j) ef += prog.f[static_cast<std::size_t>(j)] * pmf[static_cast<std::size_t>(j)];
          if (ef < best_value) {
            best_value = ef;
            best_coord = coord;
            best_value_violation = violation;
          }
        }
        // backtrack
        --depth;
        while (depth >= 0 && coord[static_cast<std::size_t>(depth)] == steps) {
          coord[static_cast<std::size_t>(depth)] = 0;
          --depth;
        }
        if (depth < 0) break;
        ++coord[static_cast<std::size_t>(depth)];
      }
      // extend pmf by coordinate `depth`
      double q = std::min(1.0, coord[static_cast<std::size_t>(depth)] * grid_step);
      const std::vector<double>& src = pmf_stack[static_cast<std::size_t>(depth)];
      std::vector<double>& dst = pmf_stack[static_cast<std::size_t>(depth) + 1];
      std::fill(dst.begin(), dst.end(), 0.0);
      for (std::size_t j = 0; j < src.size(); ++j) {
        dst[j] += src[j] * (1.0 - q);
        dst[j + 1] += src[j] * q;
      }
      ++depth;
    }
  }

  BruteResult out;
  out.value = best_value;
  out.argmin.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    out.argmin[static_cast<std::size_t>(i)] = std::min(1.0, best_coord[static_cast<std::size_t>(i)] * grid_step);
  out.violation = best_value_violation;
  out.feasibility_slack = best_violation + slack;
  return out;
}

StructuredResult phi_structured(const BernoulliProgram& prog, double tol) {
  validate_program(prog);
  int n = prog.n;

  bool found = false;
  StructuredResult best;
  double nearest_violation = std::numeric_limits<double>::infinity();
  int nearest_ones = 0, nearest_atp = 0;
  double nearest_p = 0.0;

  auto consider = [&](int ones, int at_p, double p, double violation) {
    std::vector<double> pmf = binom_pmf_vector(at_p, p);
    double value = shifted_expectation(prog.f, ones, pmf);
    bool better = false;
    if (!found) {
      better = true;
    } else if (value < best.value - 1e-15) {
      better = true;
    } else if (value <= best.value + 1e-15) {
      // canonical tie-break: fewer ones, then fewer at-p coordinates
      if (ones < best.ones || (ones == best.ones && at_p < best.at_p)) better = true;
    }
    if (better) {
      best = {value, ones, at_p, p, violation};
      found = true;
    }
  };

  for (int ones = 0; ones <= n; ++ones) {
    for (int at_p = 0; ones + at_p <= n; ++at_p) {
      auto residual = [&](double p) {
        std::vector<double> pmf = binom_pmf_vector(at_p, p);
        return shifted_expectation(prog.g, ones, pmf) - prog.phi;
      };
      if (at_p == 0) {
        double r = prog.g[static_cast<std::size_t>(ones)] - prog.phi;
        if (std::abs(r) < nearest_violation) {
          nearest_violation = std::abs(r);
          nearest_ones = ones;
          nearest_atp = 0;
          nearest_p = 0.0;
        }
        if (std::abs(r) <= tol) consider(ones, 0, 0.0, std::abs(r));
        continue;
      }
      // Dense scan: E[g(a + Bin(j,p))] need not be monotone in p for general
      // g, so bracket every sign change and refine.
      constexpr int kScan = 1000;
      double prev_p = 0.0;
      double prev_r = residual(0.0);
      for (int s = 0; s <= kScan; ++s) {
        double p = static_cast<double>(s) / kScan;
        double r = residual(p);
        if (std::abs(r) < nearest_violation) {
          nearest_violation = std::abs(r);
          nearest_ones = ones;
          nearest_atp = at_p;
          nearest_p = p;
        }
        if (std::abs(r) <= tol) {
          consider(ones, at_p, p, std::abs(r));
        } else if (s > 0 && prev_r * r < 0.0) {
          // secant polishing with bisection fallback
          double lo = prev_p, hi = p, rlo = prev_r, rhi = r;
          double root = lo, rroot = rlo;
          for (int it = 0; it < 200 && std::abs(rroot) > tol; ++it) {
            double cand = (std::abs(rhi - rlo) > 1e-300) ? lo - rlo * (hi - lo) / (rhi - rlo)
                                                         : 0.5 * (lo + hi);
            if (!(cand > lo && cand < hi)) cand = 0.5 * (lo + hi);
            double rc = residual(cand);
            root = cand;
            rroot = rc;
            if (rlo * rc <= 0.0) {
              hi = cand;
              rhi = rc;
            } else {
              lo = cand;
              rlo = rc;
            }
          }
          if (std::abs(rroot) < nearest_violation) {
            nearest_violation = std::abs(rroot);
            nearest_ones = ones;
            nearest_atp = at_p;
            nearest_p = root;
          }
          if (std::abs(rroot) <= tol) consider(ones, at_p, root, std::abs(rroot));
        }
        prev_p = p;
        prev_r = r;
      }
    }
  }

  if (!found) {
    std::ostringstream os;
    os.precision(12);
    os << "no {0,p,1} structure meets the constraint within " << tol
       << "; nearest violation " << nearest_violation << " at ones=" << nearest_ones
       << " at_p=" << nearest_atp << " p=" << nearest_p;
    fail(errc::infeasible, os.str());
  }
  return best;
}

ArUtResult phi_ar_ut(std::int64_t n, int k, double phi) {
  if (k < 1 || n <= k) fail(errc::invalid_argument, "phi_ar_ut requires n > k >= 1");
  if (!(phi > 0.0 && phi <= 1.0))
    fail(errc::unattainable, "utilization target must lie in (0, 1], got " + std::to_string(phi));
  double lo = 0.0, hi = 1.0;
  // E[UT_k(Bin(n,p))] increases from 0 to 1 over p in [0,1].
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    double mid = 0.5 * (lo + hi);
    if (expect_ut_binomial(n, mid, k) < phi)
      lo = mid;
    else
      hi = mid;
  }
  double p = 0.5 * (lo + hi);
  return {expect_ar_binomial(n, p, k), p};
}

ArDemandResult phi_ar_demand(std::int64_t n, int k) {
  if (k < 1 || n < k) fail(errc::invalid_argument, "phi_ar_demand requires n >= k >= 1");
  ArDemandResult out{std::numeric_limits<double>::infinity(), 0};
  for (std::int64_t m = k; m <= n; ++m) {
    double v = binomial_ar_closed(m, k);
    if (v < out.value) {
      out.value = v;
      out.argmin_m = m;
    }
  }
  return out;
}

namespace {

struct TwoOptCandidate {
  double p1, p2, value;
};

double objective(const TwoOptProblem& pr, double p1, double p2) {
  return pr.b0 + pr.b1 * (p1 + p2) + pr.b2 * p1 * p2;
}

double constraint(const TwoOptProblem& pr, double p1, double p2) {
  return pr.a0 + pr.a1 * (p1 + p2) + pr.a2 * p1 * p2;
}

}  // namespace

TwoOptResult two_opt_solve(const TwoOptProblem& pr, double feas_tol) {
  for (double v : {pr.a0, pr.a1, pr.a2, pr.b0, pr.b1, pr.b2, pr.phi})
    if (!std::isfinite(v)) fail(errc::invalid_argument, "two_opt_solve: non-finite coefficient");

  // The constraint is bilinear, so its range over the box is spanned by the
  // corner values.
  double cmin = std::numeric_limits<double>::infinity();
  double cmax = -cmin;
  for (double p1 : {0.0, 1.0})
    for (double p2 : {0.0, 1.0}) {
      double c = constraint(pr, p1, p2);
      cmin = std::min(cmin, c);
      cmax = std::max(cmax, c);
    }
  if (pr.phi < cmin - feas_tol || pr.phi > cmax + feas_tol) {
    std::ostringstream os;
    os.precision(12);
    os << "constraint target " << pr.phi << " outside attainable range [" << cmin << ", " << cmax << "]";
    fail(errc::infeasible, os.str());
  }

  std::optional<TwoOptCandidate> best;
  auto offer = [&](double p1, double p2) {
    p1 = std::clamp(p1, 0.0, 1.0);
    p2 = std::clamp(p2, 0.0, 1.0);
    if (std::abs(constraint(pr, p1, p2) - pr.phi) > std::max(feas_tol, 1e-9)) return;
    double v = objective(pr, p1, p2);
    if (!best || v < best->value - 1e-15) best = {p1, p2, v};
  };

  if (pr.a2 == 0.0 && pr.a1 == 0.0) {
    // Constraint is vacuous (feasibility already checked): bilinear objective
    // over the box attains its minimum at a corner.
    for (double p1 : {0.0, 1.0})
      for (double p2 : {0.0, 1.0}) offer(p1, p2);
    if (!best) fail(errc::infeasible, "vacuous constraint inconsistent with target");
    return {best->value, best->p1, best->p2, "1a"};
  }

  if (pr.a2 == 0.0) {
    // Linear constraint: p1 + p2 fixed at s; only B2 p1 p2 varies.
    double s = (pr.phi - pr.a0) / pr.a1;
    s = std::clamp(s, 0.0, 2.0);
    double lo = std::max(0.0, s - 1.0), hi = std::min(1.0, s);
    offer(0.5 * s, 0.5 * s);  // equal split (optimal when B2 < 0)
    offer(lo, s - lo);        // boundary splits (optimal when B2 > 0)
    offer(hi, s - hi);
    if (!best) fail(errc::infeasible, "no feasible split on the linear constraint");
    return {best->value, best->p1, best->p2, "1b"};
  }

  // Quadratic constraint: substitute q_i = p_i + r with r = A1/A2. Then
  // q1 q2 = gamma and the objective is affine in q1 + q2.
  double r = pr.a1 / pr.a2;
  double gamma = (pr.phi - pr.a0) / pr.a2 + r * r;
  double box_lo = r, box_hi = r + 1.0;

  if (std::abs(gamma) < 1e-30) {
    // One factor must vanish; the other coordinate is free in the box.
    if (!(box_lo <= 1e-12 && box_hi >= -1e-12))
      fail(errc::infeasible, "gamma = 0 requires 0 in the transformed box");
    for (double q2 : {box_lo, box_hi, 0.0}) {
      offer(0.0 - r, q2 - r);
      offer(q2 - r, 0.0 - r);
    }
    if (!best) fail(errc::infeasible, "no feasible point with a vanishing factor");
    return {best->value, best->p1, best->p2, "2a"};
  }

  // Candidates: stationary points of q + gamma/q (q = +-sqrt(gamma)) and the
  // points where a box constraint becomes active for either coordinate.
  std::vector<double> q1_candidates = {box_lo, box_hi};
  if (gamma > 0.0) {
    q1_candidates.push_back(std::sqrt(gamma));
    q1_candidates.push_back(-std::sqrt(gamma));
  }
  if (box_lo != 0.0) q1_candidates.push_back(gamma / box_lo);
  if (box_hi != 0.0) q1_candidates.push_back(gamma / box_hi);
  for (double q1 : q1_candidates) {
    if (!std::isfinite(q1) || std::abs(q1) < 1e-300) continue;
    if (q1 < box_lo - 1e-9 || q1 > box_hi + 1e-9) continue;
    double q2 = gamma / q1;
    if (q2 < box_lo - 1e-9 || q2 > box_hi + 1e-9) continue;
    offer(q1 - r, q2 - r);
  }
  if (!best) fail(errc::infeasible, "hyperbola does not intersect the box");
  return {best->value, best->p1, best->p2, "2b"};
}

}  // namespace prophetsec
