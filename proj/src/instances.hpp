#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prophetsec {

struct Atom {
  double value = 0.0;
  double mass = 0.0;
  friend bool operator==(const Atom&, const Atom&) = default;
};

// Discrete value distribution given by atoms with strictly increasing values.
// Masses are positive and sum to 1 (within 1e-12).
class ValueDistribution {
 public:
  explicit ValueDistribution(std::vector<Atom> atoms);

  const std::vector<Atom>& atoms() const { return atoms_; }
  double mean() const;
  double mass_above(double t) const;        // P(V > t)
  double mass_at(double t) const;           // P(V = t), exact value compare
  double value_mass_above(double t) const;  // E[V 1(V > t)]
  double surplus(double t) const;           // E[max(V - t, 0)]
  double max_value() const { return atoms_.back().value; }

  friend bool operator==(const ValueDistribution& a, const ValueDistribution& b) {
    return a.atoms_ == b.atoms_;
  }

 private:
  std::vector<Atom> atoms_;
};

struct Instance {
  int k = 1;
  std::vector<ValueDistribution> applicants;

  int n() const { return static_cast<int>(applicants.size()); }
  friend bool operator==(const Instance&, const Instance&) = default;
};

void validate_instance(const Instance& inst);

// Static threshold policy: accept values above t, break ties at t with
// probability p.
struct ThresholdPolicy {
  double t = 0.0;
  double p = 0.0;
};

void validate_policy(const ThresholdPolicy& pol);

// Per-applicant eligibility probability q_i = P(V_i > t) + p P(V_i = t) and
// eligible value mass m_i = E[V_i 1(V_i > t)] + p t P(V_i = t).
struct EligibilitySummary {
  std::vector<double> q;
  std::vector<double> m;
};

EligibilitySummary eligibility(const Instance& inst, const ThresholdPolicy& pol);

// U(t,F) = sum_i E[max(V_i - t, 0)].
double surplus_mass(const Instance& inst, double t);

// IID worst-case family: each value is n*W_k w.p. 1/n^2 and 1 otherwise.
Instance example_hard_iid(int k, int n);

// Demand-calibration worst case: k near-certain value-1 applicants plus one
// applicant worth 1/eps^2 with probability eps.
Instance example_demand_bad(int k, double eps);

// Reproducible pseudo-random instance within the given bounds.
Instance random_instance(std::uint64_t seed, int n_max, int atoms_max, int k_max);

// JSON document form; values and masses are serialized as decimal strings so
// load(save(inst)) round-trips bit-exactly.
std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

}  // namespace prophetsec
