#include "commands.hpp"

#include <sstream>

#include "riskenv/version.hpp"

namespace riskenv::cli {

namespace {

std::string sole_name(const std::vector<std::string>& names,
                      const std::string& what) {
  if (names.size() == 1) return names.front();
  if (names.empty()) throw InputError("model declares no " + what);
  std::ostringstream os;
  os << "model declares several " << what << "s (";
  for (size_t i = 0; i < names.size(); ++i)
    os << (i ? ", " : "") << names[i];
  os << "); pick one with the flag";
  throw InputError(os.str());
}

}  // namespace

std::string resolve_measure(const Model& model, const Options& opt) {
  if (opt.measure) return *opt.measure;
  return sole_name(model.measure_names(), "measure");
}

std::string resolve_payoff(const Model& model, const Options& opt) {
  if (opt.payoff) return *opt.payoff;
  return sole_name(model.payoff_names(), "payoff");
}

json report_envelope(const Model& model, const std::string& command,
                     std::uint64_t seed) {
  json rep;
  rep["command"] = command;
  rep["inputs_digest"] = digest_hex(model.raw);
  rep["seed"] = seed;
  rep["tool_version"] = kToolVersion;
  return rep;
}

CommandResult run_eval(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  std::string payoff_name = resolve_payoff(model, opt);
  RandomVariable x = model.payoff(payoff_name);

  std::vector<std::string> names;
  if (opt.measure)
    names.push_back(*opt.measure);
  else
    names = model.measure_names();
  if (names.empty()) throw InputError("model declares no measure");

  CommandResult out;
  out.report = report_envelope(model, "eval", opt.seed);
  out.report["payoff"] = payoff_name;
  out.report["t"] = opt.t;
  json results;
  std::ostringstream csv;
  csv.precision(17);
  csv << "measure,node,value\n";
  for (const std::string& name : names) {
    RiskMeasurePtr rho = model.measure(name);
    Profile p = rho->evaluate(tree, x, opt.t);
    results[name] = profile_to_json(p);
    if (auto* fam = dynamic_cast<const SupOfFamilyMeasure*>(rho.get())) {
      // finiteness gate: the family sup at the zero payoff
      SupFamilyResult gate = sup_of_family(fam->members(), tree, x, opt.t);
      results[name]["at_zero"] = gate.at_zero.values;
    }
    for (size_t i = 0; i < p.values.size(); ++i)
      csv << name << ',' << i << ',' << p.values[i] << '\n';
  }
  out.report["results"] = std::move(results);
  if (opt.format == "csv") out.csv = csv.str();
  return out;
}

CommandResult run_envelope(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  std::string measure_name = resolve_measure(model, opt);
  std::string payoff_name = resolve_payoff(model, opt);
  RiskMeasurePtr rho = model.measure(measure_name);
  RandomVariable x = model.payoff(payoff_name);
  auto kind = member_kind_from_name(opt.kind);
  if (!kind) throw InputError("unknown member kind '" + opt.kind + "'");

  AttainmentReport att = verify_attainment(*rho, *kind, tree, x, opt.t,
                                           opt.budget, opt.seed, opt.tol);

  CommandResult out;
  out.report = report_envelope(model, "envelope", opt.seed);
  out.report["measure"] = measure_name;
  out.report["payoff"] = payoff_name;
  out.report["kind"] = opt.kind;
  out.report["t"] = opt.t;
  json checks = json::array();
  checks.push_back(attainment_report_to_json(att));
  out.checks_passed = att.passed;

  // the duality check runs on the attainment anchor
  if (att.anchor_acceptable) {
    RandomVariable z0 = add(x, lift(tree, rho->evaluate(tree, x, opt.t)));
    DualCheckReport dual = dual_check(tree, z0, x, opt.t);
    checks.push_back(dual_report_to_json(dual));
    out.checks_passed = out.checks_passed && dual.passed;
  }
  out.report["checks"] = std::move(checks);
  return out;
}

CommandResult run_bsde(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  if (!opt.generator) throw InputError("bsde needs --generator");
  Generator gen = model.generator(*opt.generator);
  std::string payoff_name = resolve_payoff(model, opt);
  RandomVariable xi = model.payoff(payoff_name);

  BsdeSolution sol = solve_bsde(tree, gen, negate(xi));
  CommandResult out;
  out.report = report_envelope(model, "bsde", opt.seed);
  out.report["generator"] = gen.name();
  out.report["payoff"] = payoff_name;
  out.report["t"] = opt.t;
  tree.require_level(opt.t);
  out.report["results"] =
      json{{"risk_profile", profile_to_json(Profile{opt.t, sol.y.levels[opt.t]})},
           {"slope_margin", sol.slope_margin},
           {"comparison_verified", sol.comparison_verified}};
  return out;
}

CommandResult run_convergence(const Model& model, const Options& opt) {
  if (!opt.generator) throw InputError("convergence needs --generator");
  Generator gen = model.generator(*opt.generator);
  if (opt.n_list.empty()) throw InputError("convergence needs --N-list");

  double horizon = 1.0;
  PayoffKind payoff = PayoffKind::terminal_sum;
  std::optional<double> gamma = opt.gamma;
  if (model.raw.contains("params")) {
    const json& p = model.raw["params"];
    if (p.contains("T")) horizon = p["T"].get<double>();
    if (!gamma && p.contains("gamma")) gamma = p["gamma"].get<double>();
    if (p.contains("payoff")) {
      std::string kind = p["payoff"].get<std::string>();
      if (kind == "of_path_max")
        payoff = PayoffKind::path_max;
      else if (kind != "of_terminal_sum")
        throw InputError("unknown refinement payoff '" + kind + "'");
    }
  }

  ConvergenceStudy study =
      convergence_study(gen, payoff, opt.n_list, horizon, gamma);
  CommandResult out;
  out.report = report_envelope(model, "convergence", opt.seed);
  out.report["generator"] = gen.name();
  if (gamma) out.report["gamma"] = *gamma;
  out.report["results"] = convergence_to_json(study);
  if (opt.format == "csv") out.csv = convergence_csv(study);
  return out;
}

CommandResult run_axioms(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  std::string measure_name = resolve_measure(model, opt);
  RiskMeasurePtr rho = model.measure(measure_name);

  std::vector<Axiom> which;
  if (opt.axioms.empty()) {
    which = all_axioms();
  } else {
    for (const std::string& name : opt.axioms) {
      auto a = axiom_from_name(name);
      if (!a) throw InputError("unknown axiom '" + name + "'");
      which.push_back(*a);
    }
  }

  auto reports = check_axioms(*rho, tree, opt.t, which, opt.budget, opt.seed,
                              opt.tol);
  CommandResult out;
  out.report = report_envelope(model, "axioms", opt.seed);
  out.report["measure"] = measure_name;
  out.report["t"] = opt.t;
  out.report["budget"] = opt.budget;
  json checks = json::array();
  for (const auto& r : reports) {
    checks.push_back(axiom_report_to_json(r));
    out.checks_passed = out.checks_passed && r.passed;
  }
  out.report["checks"] = std::move(checks);
  return out;
}

CommandResult run_consistency(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  std::string measure_name = resolve_measure(model, opt);
  RiskMeasurePtr rho = model.measure(measure_name);

  CommandResult out;
  out.report = report_envelope(model, "consistency", opt.seed);
  out.report["measure"] = measure_name;
  out.report["mode"] = opt.mode;
  out.report["tol"] = opt.tol;

  if (opt.mode == "search") {
    auto witness = find_inconsistency_witness(*rho, tree, opt.grid, opt.tol);
    out.checks_passed = witness.has_value();
    out.report["results"] =
        witness ? json{{"witness_found", true},
                       {"entry", consistency_entry_to_json(*witness)}}
                : json{{"witness_found", false}};
    return out;
  }
  if (opt.mode != "check")
    throw InputError("consistency mode must be check or search");

  ConsistencyReport rep;
  if (opt.payoff) {
    RandomVariable x = model.payoff(*opt.payoff);
    for (int t = 0; t <= tree.levels(); ++t)
      for (int s = t; s <= tree.levels(); ++s) {
        ConsistencyEntry e = check_time_consistency(*rho, tree, x, t, s,
                                                    opt.tol);
        rep.max_gap = std::max(rep.max_gap, e.gap);
        if (!e.passed) {
          rep.passed = false;
          rep.entries.push_back(std::move(e));
        }
      }
  } else {
    rep = check_time_consistency_all(*rho, tree, opt.budget, opt.seed,
                                     opt.tol);
  }
  out.checks_passed = rep.passed;
  out.report["results"] = consistency_report_to_json(rep);
  return out;
}

CommandResult run_sensitivity(const Model& model, const Options& opt) {
  const ScenarioTree& tree = model.require_tree();
  std::string measure_name = resolve_measure(model, opt);
  RiskMeasurePtr rho = model.measure(measure_name);
  MeasureChange probe = opt.scenario ? model.scenario(*opt.scenario)
                                     : MeasureChange::reference(tree);

  SensitivityReport rep = check_sensitivity(*rho, tree, opt.t, probe,
                                            opt.budget, opt.seed,
                                            opt.coherent, opt.tol);
  CommandResult out;
  out.report = report_envelope(model, "sensitivity", opt.seed);
  out.report["measure"] = measure_name;
  out.report["t"] = opt.t;
  out.report["Q"] = opt.scenario ? *opt.scenario : "P";
  out.report["results"] = sensitivity_report_to_json(rep);
  out.checks_passed = rep.verdict == SensitivityVerdict::sensitive_evidence;
  return out;
}

}  // namespace riskenv::cli
