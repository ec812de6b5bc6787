// Command-line front end for the prophetsec shared library. Talks to the core
// exclusively through the C API in prophetsec.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "prophetsec.h"

namespace {

struct StringDeleter {
  void operator()(char* s) const { ps_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct InstanceDeleter {
  void operator()(ps_instance* h) const { ps_instance_free(h); }
};
using OwnedInstance = std::unique_ptr<ps_instance, InstanceDeleter>;

[[noreturn]] void die(ps_status status) {
  std::cerr << "error: " << ps_last_error() << "\n";
  std::exit(status == PS_OK ? 1 : 1);
}

void check(ps_status status) {
  if (status != PS_OK) die(status);
}

OwnedInstance load(const std::string& path) {
  ps_instance* raw = nullptr;
  check(ps_instance_load(path.c_str(), &raw));
  return OwnedInstance(raw);
}

ps_stat_kind parse_stat(const std::string& name) {
  if (name == "expected_demand") return PS_STAT_EXPECTED_DEMAND;
  if (name == "expected_utilization") return PS_STAT_EXPECTED_UTILIZATION;
  if (name == "acceptance_rate") return PS_STAT_ACCEPTANCE_RATE;
  if (name == "stockout_probability") return PS_STAT_STOCKOUT_PROBABILITY;
  std::cerr << "error: unknown statistic: " << name << "\n";
  std::exit(2);
}

void emit_csv(const std::string& out_path, const char* csv) {
  if (out_path.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot open " << out_path << " for writing\n";
    std::exit(1);
  }
  out << csv;
}

std::string json_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"static threshold policies for k-unit selection under random arrival order"};
  app.require_subcommand(1);

  // gamma
  auto* cmd_gamma = app.add_subcommand("gamma", "print gamma_k");
  int gamma_k_arg = 1;
  cmd_gamma->add_option("--k", gamma_k_arg, "supply")->required();

  // constants
  auto* cmd_constants = app.add_subcommand("constants", "print gamma_k, W_k and P(Pois(k) >= k)");
  int const_k = 1;
  cmd_constants->add_option("--k", const_k, "supply")->required();

  // calibrate
  auto* cmd_cal = app.add_subcommand("calibrate", "solve for the (t, p) policy hitting a target");
  std::string cal_instance, cal_stat = "expected_utilization";
  double cal_target = 0.0;
  bool cal_paper_target = false;
  cmd_cal->add_option("--instance", cal_instance, "instance JSON file")->required();
  cmd_cal->add_option("--statistic", cal_stat, "expected_demand | expected_utilization | stockout_probability");
  auto* target_opt = cmd_cal->add_option("--target", cal_target, "statistic target");
  cmd_cal->add_flag("--paper-target", cal_paper_target, "use the designated target for the statistic");

  // evaluate
  auto* cmd_eval = app.add_subcommand("evaluate", "guarantee report for an (instance, policy) pair");
  std::string eval_instance;
  double eval_t = 0.0, eval_p = 0.0;
  bool eval_benchmarks = false;
  std::int64_t eval_trials = 200000;
  std::uint64_t eval_seed = 1;
  cmd_eval->add_option("--instance", eval_instance, "instance JSON file")->required();
  cmd_eval->add_option("--t", eval_t, "threshold")->required();
  cmd_eval->add_option("--p", eval_p, "tie-break probability")->required();
  cmd_eval->add_flag("--benchmarks", eval_benchmarks, "include prophet/LP benchmarks and ratios");
  cmd_eval->add_option("--trials", eval_trials, "Monte Carlo trials when the prophet needs sampling");
  cmd_eval->add_option("--seed", eval_seed, "Monte Carlo seed");

  // simulate
  auto* cmd_sim = app.add_subcommand("simulate", "Monte Carlo estimate of policy performance");
  std::string sim_instance;
  double sim_t = 0.0, sim_p = 0.0;
  std::int64_t sim_trials = 100000;
  std::uint64_t sim_seed = 1;
  cmd_sim->add_option("--instance", sim_instance, "instance JSON file")->required();
  cmd_sim->add_option("--t", sim_t, "threshold")->required();
  cmd_sim->add_option("--p", sim_p, "tie-break probability")->required();
  cmd_sim->add_option("--trials", sim_trials, "number of trials")->required();
  cmd_sim->add_option("--seed", sim_seed, "master seed")->required();

  // reproduce
  auto* cmd_rep = app.add_subcommand("reproduce", "emit the library's reference data series");
  cmd_rep->require_subcommand(1);
  std::string rep_out;

  auto* rep_fig2 = cmd_rep->add_subcommand("figure2", "acceptance-rate curve E[AR_k(Bin(n,k/n))]");
  int fig2_k = 1;
  std::int64_t fig2_nmax = 200;
  rep_fig2->add_option("--k", fig2_k, "supply")->required();
  rep_fig2->add_option("--n-max", fig2_nmax, "largest n");
  rep_fig2->add_option("--out", rep_out, "CSV destination (default stdout)");

  auto* rep_fig3 = cmd_rep->add_subcommand("figure3", "guarantee vs expected-utilization level");
  int fig3_k = 1;
  rep_fig3->add_option("--k", fig3_k, "supply")->required();
  rep_fig3->add_option("--out", rep_out, "CSV destination (default stdout)");

  auto* rep_varphi = cmd_rep->add_subcommand("table-varphi", "varphi_k(k+ell) table at 4 decimals");
  rep_varphi->add_option("--out", rep_out, "CSV destination (default stdout)");

  auto* rep_ex1 = cmd_rep->add_subcommand("example1", "tie-break sweep on the hard IID instance");
  int ex1_k = 1, ex1_n = 10000;
  std::int64_t ex1_trials = 100000;
  std::uint64_t ex1_seed = 42;
  rep_ex1->add_option("--k", ex1_k, "supply")->required();
  rep_ex1->add_option("--n", ex1_n, "applicants")->required();
  rep_ex1->add_option("--trials", ex1_trials, "prophet Monte Carlo trials");
  rep_ex1->add_option("--seed", ex1_seed, "prophet Monte Carlo seed");
  rep_ex1->add_option("--out", rep_out, "CSV destination (default stdout)");

  auto* rep_ex2 = cmd_rep->add_subcommand("example2", "demand-calibrated ratio on the bad example");
  int ex2_k = 1;
  double ex2_eps = 1e-3;
  rep_ex2->add_option("--k", ex2_k, "supply")->required();
  rep_ex2->add_option("--eps", ex2_eps, "rare-value probability")->required();
  rep_ex2->add_option("--out", rep_out, "CSV destination (default stdout)");

  // verify
  auto* cmd_verify = app.add_subcommand("verify", "run the verification suite");
  std::string verify_what;
  bool verify_fast = false;
  cmd_verify->add_option("what", verify_what, "what to verify (only: all)")->required();
  cmd_verify->add_flag("--fast", verify_fast, "reduced corpus sizes and Monte Carlo budgets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (cmd_gamma->parsed()) {
    double g = 0.0;
    check(ps_gamma(gamma_k_arg, &g));
    std::cout << "{\"k\": " << gamma_k_arg << ", \"gamma\": " << json_number(g) << "}\n";
    return 0;
  }

  if (cmd_constants->parsed()) {
    double g = 0.0, w = 0.0, so = 0.0;
    check(ps_gamma(const_k, &g));
    check(ps_w_constant(const_k, &w));
    check(ps_pois_stockout(const_k, &so));
    std::cout << "{\"k\": " << const_k << ", \"gamma\": " << json_number(g)
              << ", \"w\": " << json_number(w) << ", \"pois_stockout\": " << json_number(so)
              << "}\n";
    return 0;
  }

  if (cmd_cal->parsed()) {
    if (cal_paper_target == (target_opt->count() > 0)) {
      std::cerr << "error: provide exactly one of --target and --paper-target\n";
      return 2;
    }
    OwnedInstance inst = load(cal_instance);
    ps_stat_kind kind = parse_stat(cal_stat);
    double target = cal_target;
    if (cal_paper_target) check(ps_calibration_target(kind, ps_instance_supply(inst.get()), &target));
    double t = 0.0, p = 0.0, achieved = 0.0;
    check(ps_calibrate(inst.get(), kind, target, &t, &p, &achieved));
    std::cout << "{\"statistic\": \"" << cal_stat << "\", \"target\": " << json_number(target)
              << ", \"t\": " << json_number(t) << ", \"p\": " << json_number(p)
              << ", \"achieved\": " << json_number(achieved) << "}\n";
    return 0;
  }

  if (cmd_eval->parsed()) {
    OwnedInstance inst = load(eval_instance);
    char* json = nullptr;
    check(ps_guarantee_report_json(inst.get(), eval_t, eval_p, eval_benchmarks ? 1 : 0,
                                   eval_trials, eval_seed, &json));
    OwnedString owned(json);
    std::cout << owned.get();
    return 0;
  }

  if (cmd_sim->parsed()) {
    OwnedInstance inst = load(sim_instance);
    double estimate = 0.0, std_error = 0.0;
    check(ps_simulate_performance(inst.get(), sim_t, sim_p, sim_trials, sim_seed, &estimate,
                                  &std_error));
    std::cout << "{\"estimate\": " << json_number(estimate)
              << ", \"std_error\": " << json_number(std_error) << ", \"trials\": " << sim_trials
              << ", \"seed\": " << sim_seed << "}\n";
    return 0;
  }

  if (cmd_rep->parsed()) {
    char* csv = nullptr;
    char* summary = nullptr;
    if (rep_fig2->parsed()) {
      check(ps_reproduce_ar_curve(fig2_k, fig2_nmax, &csv, &summary));
    } else if (rep_fig3->parsed()) {
      check(ps_reproduce_ut_curve(fig3_k, &csv, &summary));
    } else if (rep_varphi->parsed()) {
      check(ps_reproduce_varphi_table(&csv));
    } else if (rep_ex1->parsed()) {
      check(ps_reproduce_hard_sweep(ex1_k, ex1_n, ex1_trials, ex1_seed, &csv, &summary));
    } else if (rep_ex2->parsed()) {
      check(ps_reproduce_demand_bad(ex2_k, ex2_eps, &csv, &summary));
    }
    OwnedString owned_csv(csv);
    OwnedString owned_summary(summary);
    emit_csv(rep_out, owned_csv.get());
    if (owned_summary && !rep_out.empty()) std::cout << owned_summary.get();
    return 0;
  }

  if (cmd_verify->parsed()) {
    if (verify_what != "all") {
      std::cerr << "error: unknown verification target: " << verify_what << "\n";
      return 2;
    }
    char* json = nullptr;
    int failures = 0;
    check(ps_verify_all(verify_fast ? 1 : 0, &json, &failures));
    OwnedString owned(json);
    std::cout << owned.get();
    if (failures > 0) {
      std::cerr << failures << " check(s) failed\n";
      return 1;
    }
    return 0;
  }

  return 2;
}
