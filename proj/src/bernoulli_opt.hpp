#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prophetsec {

// Phi_n(f, g, phi): minimize E[f(D_p)] over p in [0,1]^n subject to
// E[g(D_p)] = phi, where D_p is the Poisson-Binomial sum.
struct BernoulliProgram {
  int n = 0;
  std::vector<double> f;  // tabulated on {0..n}
  std::vector<double> g;  // tabulated on {0..n}
  double phi = 0.0;
};

void validate_program(const BernoulliProgram& prog);

struct BruteResult {
  double value = 0.0;
  std::vector<double> argmin;
  double violation = 0.0;         // |E[g] - phi| at the returned point
  double feasibility_slack = 0.0; // violation band admitted by the grid
};

// Exhaustive grid oracle (n <= 5; grid_step in {0.05, 0.02, 0.01}). Keeps the
// points whose constraint violation is minimal up to the grid's attainable
// resolution and returns the minimal E[f] among them.
BruteResult phi_brute(const BernoulliProgram& prog, double grid_step);

struct StructuredResult {
  double value = 0.0;
  int ones = 0;    // coordinates fixed at 1
  int at_p = 0;    // coordinates at the common p
  double p = 0.0;
  double violation = 0.0;
};

// Structured solver: enumerates solutions in which every p_i lies in
// {0, p, 1}, solving E[g(a + Bin(j, p))] = phi for p by dense scan plus local
// refinement. Ties are broken toward fewer ones, then fewer at-p coordinates.
StructuredResult phi_structured(const BernoulliProgram& prog, double tol = 1e-9);

struct ArUtResult {
  double value = 0.0;   // E[AR_k(Bin(n, p_root))]
  double p_root = 0.0;  // solves E[UT_k(Bin(n, p))] = phi
};

// Specialization for f = AR_k, g = UT_k with all coordinates equal:
// solves E[UT_k(Bin(n,p))] = phi by bisection. Requires n > k >= 1.
ArUtResult phi_ar_ut(std::int64_t n, int k, double phi);

struct ArDemandResult {
  double value = 0.0;
  std::int64_t argmin_m = 0;
};

// Specialization for f = AR_k, g = identity with target k:
// min over m in {k..n} of E[AR_k(Bin(m, k/m))].
ArDemandResult phi_ar_demand(std::int64_t n, int k);

// Two-variable subproblem: minimize B0 + B1(p1+p2) + B2 p1 p2 subject to
// A0 + A1(p1+p2) + A2 p1 p2 = phi over [0,1]^2.
struct TwoOptProblem {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  double phi = 0.0;
};

struct TwoOptResult {
  double value = 0.0;
  double p1 = 0.0, p2 = 0.0;
  std::string case_tag;  // "1a", "1b", "2a" or "2b"
};

TwoOptResult two_opt_solve(const TwoOptProblem& prob, double feas_tol = 1e-9);

}  // namespace prophetsec
