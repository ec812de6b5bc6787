#include "instances.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"
#include "probcore.hpp"
#include "rng.hpp"

namespace prophetsec {

namespace {

constexpr double kMassSumTol = 1e-12;

std::string double_to_string(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

ValueDistribution::ValueDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) fail(errc::validation, "value distribution needs at least one atom");
  double total = 0.0;
  double prev = -1.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!std::isfinite(a.value) || a.value < 0.0)
      fail(errc::validation, "atom value must be finite and nonnegative (atom " + std::to_string(i) + ")");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass))
      fail(errc::validation, "atom mass must be positive (atom " + std::to_string(i) + ")");
    if (i > 0 && !(a.value > prev))
      fail(errc::validation, "atom values must be strictly increasing (atom " + std::to_string(i) + ")");
    prev = a.value;
    total += a.mass;
  }
  if (std::abs(total - 1.0) > kMassSumTol)
    fail(errc::validation, "atom masses must sum to 1, got " + double_to_string(total));
}

double ValueDistribution::mean() const {
  double s = 0.0;
  for (const Atom& a : atoms_) s += a.value * a.mass;
  return s;
}

double ValueDistribution::mass_above(double t) const {
  double s = 0.0;
  for (const Atom& a : atoms_)
    if (a.value > t) s += a.mass;
  return s;
}

double ValueDistribution::mass_at(double t) const {
  for (const Atom& a : atoms_)
    if (a.value == t) return a.mass;
  return 0.0;
}

double ValueDistribution::value_mass_above(double t) const {
  double s = 0.0;
  for (const Atom& a : atoms_)
    if (a.value > t) s += a.value * a.mass;
  return s;
}

double ValueDistribution::surplus(double t) const {
  double s = 0.0;
  for (const Atom& a : atoms_)
    if (a.value > t) s += (a.value - t) * a.mass;
  return s;
}

void validate_instance(const Instance& inst) {
  if (inst.k < 1) fail(errc::validation, "instance supply k must be >= 1");
  if (inst.applicants.empty()) fail(errc::validation, "instance needs at least one applicant");
}

void validate_policy(const ThresholdPolicy& pol) {
  if (!(pol.t >= 0.0) || !std::isfinite(pol.t)) fail(errc::invalid_argument, "threshold t must be finite and >= 0");
  if (!(pol.p >= 0.0 && pol.p <= 1.0)) fail(errc::invalid_argument, "tie-break probability p must lie in [0,1]");
}

EligibilitySummary eligibility(const Instance& inst, const ThresholdPolicy& pol) {
  validate_instance(inst);
  validate_policy(pol);
  EligibilitySummary out;
  out.q.reserve(inst.applicants.size());
  out.m.reserve(inst.applicants.size());
  for (const ValueDistribution& dist : inst.applicants) {
    double at = dist.mass_at(pol.t);
    out.q.push_back(dist.mass_above(pol.t) + pol.p * at);
    out.m.push_back(dist.value_mass_above(pol.t) + pol.p * pol.t * at);
  }
  return out;
}

double surplus_mass(const Instance& inst, double t) {
  validate_instance(inst);
  if (!(t >= 0.0)) fail(errc::invalid_argument, "threshold t must be >= 0");
  double s = 0.0;
  for (const ValueDistribution& dist : inst.applicants) s += dist.surplus(t);
  return s;
}

Instance example_hard_iid(int k, int n) {
  if (k < 1 || n < k) fail(errc::invalid_argument, "example_hard_iid requires n >= k >= 1");
  double high = static_cast<double>(n) * w_constant(k);
  double rare = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  std::vector<Atom> atoms;
  if (rare < 1.0) atoms.push_back({1.0, 1.0 - rare});
  atoms.push_back({high, rare});
  ValueDistribution dist(std::move(atoms));
  Instance inst;
  inst.k = k;
  inst.applicants.assign(static_cast<std::size_t>(n), dist);
  return inst;
}

Instance example_demand_bad(int k, double eps) {
  if (k < 1) fail(errc::invalid_argument, "example_demand_bad requires k >= 1");
  if (!(eps > 0.0 && eps < 1.0)) fail(errc::invalid_argument, "example_demand_bad requires eps in (0,1)");
  Instance inst;
  inst.k = k;
  ValueDistribution common({{0.0, eps / k}, {1.0, 1.0 - eps / k}});
  inst.applicants.assign(static_cast<std::size_t>(k), common);
  inst.applicants.push_back(ValueDistribution({{0.0, 1.0 - eps}, {1.0 / (eps * eps), eps}}));
  return inst;
}

Instance random_instance(std::uint64_t seed, int n_max, int atoms_max, int k_max) {
  if (n_max < 1 || atoms_max < 1 || k_max < 1)
    fail(errc::invalid_argument, "random_instance bounds must be >= 1");
  std::mt19937_64 rng(mix64(seed));
  int n = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n_max)));
  int k = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(std::min(k_max, n))));
  Instance inst;
  inst.k = k;
  inst.applicants.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int count = 1 + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(atoms_max)));
    std::vector<double> values;
    while (static_cast<int>(values.size()) < count) {
      double v = 0.05 + 9.95 * uniform01(rng);
      bool distinct = true;
      for (double w : values)
        if (std::abs(w - v) < 1e-6) distinct = false;
      if (distinct) values.push_back(v);
    }
    std::sort(values.begin(), values.end());
    std::vector<double> weights(values.size());
    double total = 0.0;
    for (double& w : weights) {
      w = 0.1 + 0.9 * uniform01(rng);
      total += w;
    }
    std::vector<Atom> atoms;
    atoms.reserve(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) atoms.push_back({values[j], weights[j] / total});
    inst.applicants.emplace_back(std::move(atoms));
  }
  return inst;
}

namespace {

using nlohmann::ordered_json;

double parse_decimal(const nlohmann::json& node, const std::string& where) {
  if (node.is_string()) {
    const std::string& s = node.get_ref<const std::string&>();
    const char* begin = s.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
      fail(errc::parse, where + ": not a decimal number: \"" + s + "\"");
    return v;
  }
  if (node.is_number()) return node.get<double>();
  fail(errc::parse, where + ": expected a decimal string");
}

}  // namespace

std::string instance_to_json(const Instance& inst) {
  validate_instance(inst);
  ordered_json doc;
  doc["k"] = inst.k;
  ordered_json applicants = ordered_json::array();
  for (const ValueDistribution& dist : inst.applicants) {
    ordered_json atoms = ordered_json::array();
    for (const Atom& a : dist.atoms()) {
      ordered_json atom;
      atom["value"] = double_to_string(a.value);
      atom["mass"] = double_to_string(a.mass);
      atoms.push_back(std::move(atom));
    }
    ordered_json applicant;
    applicant["atoms"] = std::move(atoms);
    applicants.push_back(std::move(applicant));
  }
  doc["applicants"] = std::move(applicants);
  return doc.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(errc::parse, std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(errc::parse, "top level: expected an object");
  if (!doc.contains("k")) fail(errc::parse, "missing field \"k\"");
  if (!doc["k"].is_number_integer()) fail(errc::parse, "field \"k\": expected an integer");
  if (!doc.contains("applicants") || !doc["applicants"].is_array())
    fail(errc::parse, "field \"applicants\": expected an array");

  Instance inst;
  inst.k = doc["k"].get<int>();
  std::size_t i = 0;
  for (const auto& applicant : doc["applicants"]) {
    std::string base = "applicants[" + std::to_string(i) + "]";
    if (!applicant.is_object() || !applicant.contains("atoms") || !applicant["atoms"].is_array())
      fail(errc::parse, base + ".atoms: expected an array");
    std::vector<Atom> atoms;
    std::size_t j = 0;
    for (const auto& atom : applicant["atoms"]) {
      std::string where = base + ".atoms[" + std::to_string(j) + "]";
      if (!atom.is_object()) fail(errc::parse, where + ": expected an object");
      if (!atom.contains("value")) fail(errc::parse, where + ".value: missing");
      if (!atom.contains("mass")) fail(errc::parse, where + ".mass: missing");
      double value = parse_decimal(atom["value"], where + ".value");
      double mass = parse_decimal(atom["mass"], where + ".mass");
      atoms.push_back({value, mass});
      ++j;
    }
    try {
      inst.applicants.emplace_back(std::move(atoms));
    } catch (const error& e) {
      fail(e.code(), base + ": " + e.what());
    }
    ++i;
  }
  validate_instance(inst);
  return inst;
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(errc::io, "cannot open instance file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return instance_from_json(buf.str());
}

void save_instance(const Instance& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(errc::io, "cannot open destination for writing: " + path);
  out << instance_to_json(inst);
  if (!out) fail(errc::io, "write failed: " + path);
}

}  // namespace prophetsec
