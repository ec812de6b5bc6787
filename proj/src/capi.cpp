#include "prophetsec.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>
#include <vector>

#include <json.hpp>

#include "calibration.hpp"
#include "errors.hpp"
#include "evaluation.hpp"
#include "instances.hpp"
#include "probcore.hpp"
#include "verify.hpp"

using namespace prophetsec;

struct ps_instance {
  Instance inst;
};

namespace {

thread_local std::string g_last_error;

ps_status status_from(errc code) {
  switch (code) {
    case errc::invalid_argument: return PS_ERR_INVALID_ARGUMENT;
    case errc::parse: return PS_ERR_PARSE;
    case errc::validation: return PS_ERR_VALIDATION;
    case errc::unattainable: return PS_ERR_UNATTAINABLE;
    case errc::infeasible: return PS_ERR_INFEASIBLE;
    case errc::cap_exceeded: return PS_ERR_CAP_EXCEEDED;
    case errc::io: return PS_ERR_IO;
    case errc::convergence: return PS_ERR_CONVERGENCE;
  }
  return PS_ERR_INTERNAL;
}

template <typename Fn>
ps_status guarded(Fn&& fn) {
  try {
    fn();
    return PS_OK;
  } catch (const error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PS_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PS_ERR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

ps_status require(bool ok, const char* msg) {
  if (ok) return PS_OK;
  g_last_error = msg;
  return PS_ERR_INVALID_ARGUMENT;
}

StatKind to_kind(ps_stat_kind kind) {
  switch (kind) {
    case PS_STAT_EXPECTED_DEMAND: return StatKind::expected_demand;
    case PS_STAT_EXPECTED_UTILIZATION: return StatKind::expected_utilization;
    case PS_STAT_ACCEPTANCE_RATE: return StatKind::acceptance_rate;
    case PS_STAT_STOCKOUT_PROBABILITY: return StatKind::stockout_probability;
  }
  fail(errc::invalid_argument, "unknown statistic kind code");
}

nlohmann::ordered_json report_to_json(const GuaranteeReport& rep, bool with_benchmarks) {
  nlohmann::ordered_json doc;
  doc["policy"] = {{"t", rep.policy.t}, {"p", rep.policy.p}};
  doc["performance"] = rep.performance;
  doc["expected_utilization"] = rep.expected_ut;
  doc["expected_acceptance_rate"] = rep.expected_ar;
  doc["expected_demand"] = rep.expected_demand;
  if (with_benchmarks) {
    doc["prophet"] = rep.prophet;
    doc["prophet_mode"] = rep.prophet_mode == ProphetMode::exact ? "exact" : "monte_carlo";
    if (rep.prophet_mode == ProphetMode::monte_carlo)
      doc["prophet_std_error"] = rep.prophet_std_error;
    doc["lp"] = rep.lp;
    doc["ratio_prophet"] = rep.ratio_prophet;
    doc["ratio_lp"] = rep.ratio_lp;
    doc["lb_bound"] = rep.lb_bound;
  }
  return doc;
}

}  // namespace

extern "C" {

const char* ps_version(void) { return "1.0.0"; }

const char* ps_last_error(void) { return g_last_error.c_str(); }

void ps_string_free(char* s) { delete[] s; }

ps_status ps_gamma(int k, double* out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = gamma_k(k); });
}

ps_status ps_w_constant(int k, double* out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = w_constant(k); });
}

ps_status ps_pois_stockout(int k, double* out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    if (k < 1) fail(errc::invalid_argument, "supply k must be >= 1");
    *out = poisson_stockout(k, k);
  });
}

ps_status ps_instance_load(const char* path, ps_instance** out) {
  if (ps_status st = require(path && out, "null argument")) return st;
  return guarded([&] { *out = new ps_instance{load_instance(path)}; });
}

ps_status ps_instance_save(const ps_instance* inst, const char* path) {
  if (ps_status st = require(inst && path, "null argument")) return st;
  return guarded([&] { save_instance(inst->inst, path); });
}

ps_status ps_instance_from_json(const char* json, ps_instance** out) {
  if (ps_status st = require(json && out, "null argument")) return st;
  return guarded([&] { *out = new ps_instance{instance_from_json(json)}; });
}

ps_status ps_instance_to_json(const ps_instance* inst, char** out_json) {
  if (ps_status st = require(inst && out_json, "null argument")) return st;
  return guarded([&] { *out_json = copy_string(instance_to_json(inst->inst)); });
}

ps_status ps_instance_hard_iid(int k, int n, ps_instance** out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = new ps_instance{example_hard_iid(k, n)}; });
}

ps_status ps_instance_demand_bad(int k, double eps, ps_instance** out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = new ps_instance{example_demand_bad(k, eps)}; });
}

ps_status ps_instance_random(uint64_t seed, int n_max, int atoms_max, int k_max,
                             ps_instance** out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = new ps_instance{random_instance(seed, n_max, atoms_max, k_max)}; });
}

void ps_instance_free(ps_instance* inst) { delete inst; }

int ps_instance_applicants(const ps_instance* inst) { return inst ? inst->inst.n() : 0; }

int ps_instance_supply(const ps_instance* inst) { return inst ? inst->inst.k : 0; }

ps_status ps_statistic_value(const ps_instance* inst, double t, double p, ps_stat_kind kind,
                             double* out) {
  if (ps_status st = require(inst && out, "null argument")) return st;
  return guarded([&] {
    *out = statistic_value(inst->inst, {t, p}, {to_kind(kind), inst->inst.k});
  });
}

ps_status ps_calibration_target(ps_stat_kind kind, int k, double* out) {
  if (ps_status st = require(out != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out = target_for(to_kind(kind), k); });
}

ps_status ps_calibrate(const ps_instance* inst, ps_stat_kind kind, double target, double* t_out,
                       double* p_out, double* achieved_out) {
  if (ps_status st = require(inst && t_out && p_out, "null argument")) return st;
  return guarded([&] {
    DemandStatistic stat{to_kind(kind), inst->inst.k};
    ThresholdPolicy pol = calibrate(inst->inst, stat, target);
    *t_out = pol.t;
    *p_out = pol.p;
    if (achieved_out) *achieved_out = statistic_value(inst->inst, pol, stat);
  });
}

ps_status ps_exact_performance(const ps_instance* inst, double t, double p, double* out) {
  if (ps_status st = require(inst && out, "null argument")) return st;
  return guarded([&] { *out = exact_performance(inst->inst, {t, p}); });
}

ps_status ps_simulate_performance(const ps_instance* inst, double t, double p, int64_t trials,
                                  uint64_t seed, double* estimate, double* std_error) {
  if (ps_status st = require(inst && estimate, "null argument")) return st;
  return guarded([&] {
    MonteCarloEstimate est = simulate_performance(inst->inst, {t, p}, trials, seed);
    *estimate = est.estimate;
    if (std_error) *std_error = est.std_error;
  });
}

ps_status ps_prophet_exact(const ps_instance* inst, double* out) {
  if (ps_status st = require(inst && out, "null argument")) return st;
  return guarded([&] { *out = prophet_value(inst->inst, ProphetMode::exact).value; });
}

ps_status ps_prophet_monte_carlo(const ps_instance* inst, int64_t trials, uint64_t seed,
                                 double* estimate, double* std_error) {
  if (ps_status st = require(inst && estimate, "null argument")) return st;
  return guarded([&] {
    ProphetValue pht = prophet_value(inst->inst, ProphetMode::monte_carlo, trials, seed);
    *estimate = pht.value;
    if (std_error) *std_error = pht.std_error;
  });
}

ps_status ps_lp_value(const ps_instance* inst, double* out) {
  if (ps_status st = require(inst && out, "null argument")) return st;
  return guarded([&] { *out = lp_relaxation(inst->inst).value; });
}

ps_status ps_guarantee_report_json(const ps_instance* inst, double t, double p,
                                   int with_benchmarks, int64_t prophet_trials, uint64_t seed,
                                   char** out_json) {
  if (ps_status st = require(inst && out_json, "null argument")) return st;
  return guarded([&] {
    ThresholdPolicy pol{t, p};
    if (with_benchmarks) {
      GuaranteeReport rep = guarantee_report(inst->inst, pol, prophet_trials, seed);
      *out_json = copy_string(report_to_json(rep, true).dump(2) + "\n");
      return;
    }
    GuaranteeReport rep;
    rep.policy = pol;
    rep.performance = exact_performance(inst->inst, pol);
    rep.expected_ut = statistic_value(inst->inst, pol, {StatKind::expected_utilization, inst->inst.k});
    rep.expected_ar = statistic_value(inst->inst, pol, {StatKind::acceptance_rate, inst->inst.k});
    rep.expected_demand = statistic_value(inst->inst, pol, {StatKind::expected_demand, inst->inst.k});
    *out_json = copy_string(report_to_json(rep, false).dump(2) + "\n");
  });
}

ps_status ps_reproduce_ar_curve(int k, int64_t n_max, char** out_csv, char** out_summary) {
  if (ps_status st = require(out_csv != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    ArCurve curve = ar_curve(k, n_max);
    *out_csv = copy_string(ar_curve_csv(curve));
    if (out_summary) {
      nlohmann::ordered_json doc;
      doc["k"] = k;
      doc["n_max"] = n_max;
      doc["min_value"] = curve.min_value;
      doc["argmin"] = curve.argmin;
      doc["gamma_k"] = gamma_k(k);
      *out_summary = copy_string(doc.dump(2) + "\n");
    }
  });
}

ps_status ps_reproduce_ut_curve(int k, char** out_csv, char** out_summary) {
  if (ps_status st = require(out_csv != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    std::vector<double> levels;
    for (int i = 1; i <= 99; ++i) levels.push_back(0.01 * i);
    levels.push_back(gamma_k(k));
    std::sort(levels.begin(), levels.end());
    UtCurve curve = ut_guarantee_curve(k, levels);
    *out_csv = copy_string(ut_curve_csv(curve));
    if (out_summary) {
      nlohmann::ordered_json doc;
      doc["k"] = k;
      doc["peak_level"] = curve.peak_level;
      doc["peak_bound"] = curve.peak_bound;
      doc["gamma_k"] = gamma_k(k);
      *out_summary = copy_string(doc.dump(2) + "\n");
    }
  });
}

ps_status ps_reproduce_varphi_table(char** out_csv) {
  if (ps_status st = require(out_csv != nullptr, "out pointer is null")) return st;
  return guarded([&] { *out_csv = copy_string(varphi_table_csv(varphi_table())); });
}

ps_status ps_reproduce_hard_sweep(int k, int n, int64_t mc_trials, uint64_t seed, char** out_csv,
                                  char** out_summary) {
  if (ps_status st = require(out_csv != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    HardSweepResult sweep = hard_instance_sweep(k, n, mc_trials, seed);
    *out_csv = copy_string(hard_sweep_csv(sweep));
    if (out_summary) {
      nlohmann::ordered_json doc;
      doc["k"] = k;
      doc["n"] = n;
      doc["best_ratio"] = sweep.best_ratio;
      doc["best_accept_prob"] = sweep.best_accept_prob;
      doc["prophet_estimate"] = sweep.prophet_estimate;
      doc["prophet_std_error"] = sweep.prophet_std_error;
      doc["gamma_k"] = gamma_k(k);
      *out_summary = copy_string(doc.dump(2) + "\n");
    }
  });
}

ps_status ps_reproduce_demand_bad(int k, double eps, char** out_csv, char** out_summary) {
  if (ps_status st = require(out_csv != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    DemandBadResult res = demand_bad_sweep(k, eps);
    *out_csv = copy_string(demand_bad_csv(k, eps, res));
    if (out_summary) {
      nlohmann::ordered_json doc;
      doc["k"] = k;
      doc["eps"] = eps;
      doc["ratio"] = res.ratio;
      doc["bound"] = static_cast<double>(k) / (k + 1);
      doc["gamma_k"] = gamma_k(k);
      *out_summary = copy_string(doc.dump(2) + "\n");
    }
  });
}

ps_status ps_verify_all(int fast, char** out_json, int* failures) {
  if (ps_status st = require(out_json != nullptr, "out pointer is null")) return st;
  return guarded([&] {
    VerifySummary summary = run_all_checks(fast != 0);
    *out_json = copy_string(verify_summary_to_json(summary));
    if (failures) *failures = summary.failures;
  });
}

}  // extern "C"
