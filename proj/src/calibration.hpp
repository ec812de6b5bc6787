#pragma once

#include "instances.hpp"
#include "probcore.hpp"

namespace prophetsec {

// E[g(D^{t,p})] for the statistic's g on this instance under the policy.
double statistic_value(const Instance& inst, const ThresholdPolicy& pol, const DemandStatistic& stat);

// The designated calibration target for a statistic kind:
// expected_utilization -> gamma_k, expected_demand -> k,
// stockout_probability -> P(Pois(k) >= k). acceptance_rate has none.
double target_for(StatKind kind, int k);

// Solve for the (t, p) policy with statistic_value(inst, pol, stat) = target
// (within 1e-10). Candidate thresholds are the distinct atom values in
// descending order; the statistic is piecewise-constant in t between atoms
// and continuous monotone in p at each atom, so the bracketing atom is
// located by scanning and p is then solved by bisection. When the target is
// attainable with p = 0 at some atom, that atom is returned with p = 0.
ThresholdPolicy calibrate(const Instance& inst, const DemandStatistic& stat, double target);

}  // namespace prophetsec
