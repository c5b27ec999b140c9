#include "riskenv/model.hpp"

#include <fstream>
#include <sstream>

namespace riskenv {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InputError(where + ": " + what);
}

double need_number(const json& j, const std::string& key,
                   const std::string& where) {
  if (!j.contains(key) || !j[key].is_number())
    fail(where, "missing numeric field '" + key + "'");
  return j[key].get<double>();
}

int need_int(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key) || !j[key].is_number_integer())
    fail(where, "missing integer field '" + key + "'");
  return j[key].get<int>();
}

std::string need_string(const json& j, const std::string& key,
                        const std::string& where) {
  if (!j.contains(key) || !j[key].is_string())
    fail(where, "missing string field '" + key + "'");
  return j[key].get<std::string>();
}

}  // namespace

json tree_to_json(const ScenarioTree& tree) {
  json nodes = json::array();
  for (int l = 0; l <= tree.levels(); ++l)
    for (int i = 0; i < tree.node_count(l); ++i) {
      json node;
      node["level"] = l;
      node["index"] = i;
      if (l < tree.levels()) {
        json children = json::array();
        json probs = json::array();
        for (int s = 0; s < tree.child_count(l, i); ++s) {
          children.push_back(tree.child(l, i, s));
          probs.push_back(tree.prob(l, i, s));
        }
        node["children"] = std::move(children);
        node["probs"] = std::move(probs);
      }
      if (l > 0) {
        int par = tree.parent(l, i);
        for (int s = 0; s < tree.child_count(l - 1, par); ++s)
          if (tree.child(l - 1, par, s) == i)
            node["increment"] = tree.edge_increment(l - 1, par, s);
      }
      nodes.push_back(std::move(node));
    }
  return json{{"kind", tree.is_binomial() ? "binomial" : "explicit"},
              {"N", tree.levels()},
              {"dt", tree.dt()},
              {"nodes", std::move(nodes)}};
}

ScenarioTree tree_from_json(const json& j) {
  if (!j.is_object()) fail("tree", "expected an object");
  std::string kind = need_string(j, "kind", "tree");
  if (!j.contains("nodes")) {
    if (kind != "binomial")
      fail("tree", "only binomial trees can be generated without nodes");
    int n = need_int(j, "N", "tree");
    double horizon = j.contains("T") ? need_number(j, "T", "tree")
                                     : need_number(j, "dt", "tree") * n;
    return ScenarioTree::binomial(n, horizon);
  }
  int n = need_int(j, "N", "tree");
  double dt = need_number(j, "dt", "tree");
  std::vector<ExplicitNode> nodes;
  for (const auto& nj : j["nodes"]) {
    ExplicitNode node;
    node.level = need_int(nj, "level", "tree.nodes");
    node.index = need_int(nj, "index", "tree.nodes");
    if (nj.contains("children")) {
      for (const auto& c : nj["children"]) node.children.push_back(c.get<int>());
      if (!nj.contains("probs")) fail("tree.nodes", "children without probs");
      for (const auto& p : nj["probs"]) node.probs.push_back(p.get<double>());
    }
    if (nj.contains("increment")) node.increment = nj["increment"].get<double>();
    nodes.push_back(std::move(node));
  }
  TreeKind k = kind == "binomial" ? TreeKind::binomial
             : kind == "explicit" ? TreeKind::explicit_tree
                                  : throw InputError("tree: unknown kind '" +
                                                     kind + "'");
  return ScenarioTree::from_nodes(k, n, dt, std::move(nodes));
}

RandomVariable payoff_from_json(const ScenarioTree& tree, const json& j) {
  if (!j.is_object()) fail("payoff", "expected an object");
  if (j.contains("leaf_values")) {
    RandomVariable x;
    for (const auto& v : j["leaf_values"]) x.leaf_values.push_back(v.get<double>());
    check_payoff(tree, x);
    return x;
  }
  if (j.contains("functional")) {
    std::string fn = j["functional"].get<std::string>();
    double sc = 1.0, off = 0.0;
    if (j.contains("params")) {
      const json& p = j["params"];
      if (p.contains("scale")) sc = p["scale"].get<double>();
      if (p.contains("offset")) off = p["offset"].get<double>();
    }
    if (fn == "of_terminal_sum") return payoff_of_terminal_sum(tree, sc, off);
    if (fn == "of_path_max") return payoff_of_path_max(tree, sc, off);
    fail("payoff", "unknown functional '" + fn + "'");
  }
  fail("payoff", "need leaf_values or functional");
}

json payoff_to_json(const RandomVariable& x) {
  return json{{"leaf_values", x.leaf_values}};
}

MeasureChange measure_change_from_json(const ScenarioTree& tree,
                                       const json& j) {
  if (!j.is_object()) fail("scenario", "expected an object");
  std::string kind = j.contains("kind") ? j["kind"].get<std::string>()
                                        : std::string("explicit");
  if (kind == "binomial_drift")
    return MeasureChange::binomial_drift(tree, need_number(j, "theta", "scenario"));
  if (kind == "reference") return MeasureChange::reference(tree);
  if (kind != "explicit") fail("scenario", "unknown kind '" + kind + "'");
  if (!j.contains("rows")) fail("scenario", "explicit scenario needs rows");
  // start from the reference rows so sparse overrides are allowed
  std::vector<std::vector<std::vector<double>>> rows(tree.levels());
  for (int l = 0; l < tree.levels(); ++l) {
    rows[l].resize(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      rows[l][i].resize(tree.child_count(l, i));
      for (int s = 0; s < tree.child_count(l, i); ++s)
        rows[l][i][s] = tree.prob(l, i, s);
    }
  }
  for (const auto& rj : j["rows"]) {
    int l = need_int(rj, "level", "scenario.rows");
    int i = need_int(rj, "index", "scenario.rows");
    if (l < 0 || l >= tree.levels() || i < 0 || i >= tree.node_count(l))
      fail("scenario.rows", "row address out of range");
    std::vector<double> probs;
    for (const auto& p : rj["probs"]) probs.push_back(p.get<double>());
    rows[l][i] = std::move(probs);
  }
  return MeasureChange(tree, std::move(rows));
}

Generator generator_from_json(const json& j) {
  if (j.is_string()) return generator_from_json(json{{"name", j.get<std::string>()}});
  std::string name = need_string(j, "name", "generator");
  if (name == "zero") return Generator::zero();
  if (name == "abs") return Generator::abs(need_number(j, "kappa", "generator"));
  if (name == "asymmetric")
    return Generator::asymmetric(need_number(j, "k1", "generator"),
                                 need_number(j, "k2", "generator"));
  if (name == "example41") return Generator::quartic_quadratic();
  if (name == "quadratic")
    return Generator::quadratic(need_number(j, "gamma", "generator"));
  if (name == "quadratic_entropic") {
    Generator base = j.contains("base") ? generator_from_json(j["base"])
                                        : Generator::zero();
    return Generator::quadratic_entropic(need_number(j, "gamma", "generator"),
                                         base);
  }
  if (name == "capped_abs")
    return Generator::capped_abs(need_number(j, "kappa", "generator"),
                                 need_number(j, "cap", "generator"));
  fail("generator", "unknown generator '" + name + "'");
}

Utility utility_from_json(const json& j) {
  if (j.is_string()) return utility_from_json(json{{"name", j.get<std::string>()}});
  std::string name = need_string(j, "name", "utility");
  if (name == "linear") return Utility::linear();
  if (name == "exp")
    return Utility::exponential(j.contains("gamma") ? j["gamma"].get<double>()
                                                    : 1.0);
  if (name == "two_piece")
    return Utility::two_piece(need_number(j, "gain_slope", "utility"),
                              need_number(j, "loss_slope", "utility"));
  fail("utility", "unknown utility '" + name + "'");
}

const ScenarioTree& Model::require_tree() const {
  if (!tree) throw InputError("model has no tree section");
  return *tree;
}

RandomVariable Model::payoff(const std::string& name) const {
  if (!raw.contains("payoffs") || !raw["payoffs"].contains(name))
    throw InputError("model has no payoff named '" + name + "'");
  return payoff_from_json(require_tree(), raw["payoffs"][name]);
}

MeasureChange Model::scenario(const std::string& name) const {
  if (!raw.contains("scenarios") || !raw["scenarios"].contains(name))
    throw InputError("model has no scenario named '" + name + "'");
  return measure_change_from_json(require_tree(), raw["scenarios"][name]);
}

Generator Model::generator(const std::string& name) const {
  if (raw.contains("generators") && raw["generators"].contains(name))
    return generator_from_json(raw["generators"][name]);
  // catalogue names are usable directly
  return generator_from_json(json{{"name", name}});
}

RiskMeasurePtr Model::measure(const std::string& name) const {
  if (!raw.contains("measures") || !raw["measures"].contains(name))
    throw InputError("model has no measure named '" + name + "'");
  return measure_from_json(*this, raw["measures"][name]);
}

std::vector<std::string> Model::payoff_names() const {
  std::vector<std::string> names;
  if (raw.contains("payoffs"))
    for (auto it = raw["payoffs"].begin(); it != raw["payoffs"].end(); ++it)
      names.push_back(it.key());
  return names;
}

std::vector<std::string> Model::measure_names() const {
  std::vector<std::string> names;
  if (raw.contains("measures"))
    for (auto it = raw["measures"].begin(); it != raw["measures"].end(); ++it)
      names.push_back(it.key());
  return names;
}

std::vector<std::string> Model::generator_names() const {
  std::vector<std::string> names;
  if (raw.contains("generators"))
    for (auto it = raw["generators"].begin(); it != raw["generators"].end(); ++it)
      names.push_back(it.key());
  return names;
}

Model parse_model(const json& j) {
  if (!j.is_object()) throw InputError("model: expected a JSON object");
  Model m;
  m.raw = j;
  if (j.contains("tree")) m.tree = tree_from_json(j["tree"]);
  return m;
}

Model load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InputError("model file '" + path + "' is not valid JSON: " +
                     e.what());
  }
  return parse_model(j);
}

namespace {

std::optional<MeasureChange> optional_scenario(const Model& model,
                                               const json& j,
                                               const std::string& key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (j[key].is_string()) return model.scenario(j[key].get<std::string>());
  return measure_change_from_json(model.require_tree(), j[key]);
}

RandomVariable payoff_ref(const Model& model, const json& j) {
  if (j.is_string()) return model.payoff(j.get<std::string>());
  return payoff_from_json(model.require_tree(), j);
}

}  // namespace

RiskMeasurePtr measure_from_json(const Model& model, const json& j) {
  if (j.is_string()) return model.measure(j.get<std::string>());
  std::string type = need_string(j, "type", "measure");
  if (type == "linear")
    return std::make_shared<LinearMeasure>(optional_scenario(model, j, "Q"));
  if (type == "worst_case") return std::make_shared<WorstCaseMeasure>();
  if (type == "conditional_var")
    return std::make_shared<ConditionalVaRMeasure>(
        need_number(j, "lambda", "measure"),
        optional_scenario(model, j, "base"));
  if (type == "robust_var") {
    if (!j.contains("scenarios") || !j["scenarios"].is_array())
      fail("measure", "robust_var needs a scenario array");
    std::vector<MeasureChange> scenarios;
    for (const auto& sj : j["scenarios"]) {
      if (sj.is_string())
        scenarios.push_back(model.scenario(sj.get<std::string>()));
      else
        scenarios.push_back(
            measure_change_from_json(model.require_tree(), sj));
    }
    return std::make_shared<RobustVaRMeasure>(
        need_number(j, "lambda", "measure"), std::move(scenarios));
  }
  if (type == "entropic")
    return std::make_shared<EntropicMeasure>(
        need_number(j, "gamma", "measure"),
        optional_scenario(model, j, "base"));
  if (type == "utility_shortfall") {
    if (!j.contains("utility")) fail("measure", "utility_shortfall needs a utility");
    double tol = j.contains("tol") ? j["tol"].get<double>() : 1e-10;
    return std::make_shared<UtilityShortfallMeasure>(
        utility_from_json(j["utility"]), tol);
  }
  if (type == "g_expectation") {
    if (!j.contains("generator")) fail("measure", "g_expectation needs a generator");
    const json& gj = j["generator"];
    Generator gen = gj.is_string() ? model.generator(gj.get<std::string>())
                                   : generator_from_json(gj);
    return std::make_shared<GExpectationMeasure>(std::move(gen));
  }
  if (type == "alpha_maxmin")
    return std::make_shared<AlphaMaxminMeasure>(
        need_number(j, "kappa", "measure"), need_number(j, "alpha", "measure"));
  if (type == "shifted") {
    if (!j.contains("inner") || !j.contains("Z"))
      fail("measure", "shifted needs inner and Z");
    return std::make_shared<ShiftedMeasure>(measure_from_json(model, j["inner"]),
                                            payoff_ref(model, j["Z"]));
  }
  if (type == "envelope_member") {
    auto kind = member_kind_from_name(need_string(j, "kind", "measure"));
    if (!kind) fail("measure", "unknown member kind");
    if (!j.contains("anchor")) fail("measure", "envelope_member needs an anchor");
    return std::make_shared<AnchorMemberMeasure>(
        *kind, payoff_ref(model, j["anchor"]), need_int(j, "t", "measure"));
  }
  if (type == "lower_envelope" || type == "envelope" ||
      type == "sup_of_family") {
    if (!j.contains("members") || !j["members"].is_array() ||
        j["members"].empty())
      fail("measure", type + " needs a non-empty member array");
    std::vector<RiskMeasurePtr> members;
    for (const auto& mj : j["members"])
      members.push_back(measure_from_json(model, mj));
    if (type == "sup_of_family")
      return std::make_shared<SupOfFamilyMeasure>(std::move(members));
    return std::make_shared<LowerEnvelopeMeasure>(std::move(members));
  }
  fail("measure", "unknown measure type '" + type + "'");
}

json profile_to_json(const Profile& p) {
  return json{{"level", p.level}, {"values", p.values}};
}

namespace {

json witness_to_json(const AxiomWitness& w) {
  json j;
  j["X"] = w.x.leaf_values;
  if (w.y) j["Y"] = w.y->leaf_values;
  if (w.alpha) j["alpha"] = w.alpha->values;
  j["node"] = w.node;
  j["lhs"] = w.lhs;
  j["rhs"] = w.rhs;
  j["margin"] = w.margin;
  return j;
}

}  // namespace

json axiom_report_to_json(const AxiomReport& r) {
  json j;
  j["axiom"] = axiom_name(r.axiom);
  j["status"] = r.passed ? "pass" : "fail";
  j["samples"] = r.samples;
  j["margin"] = r.worst_margin;
  if (r.witness) j["witness"] = witness_to_json(*r.witness);
  return j;
}

json attainment_report_to_json(const AttainmentReport& r) {
  json j;
  j["check"] = "attainment";
  j["status"] = r.passed ? "pass" : "fail";
  j["anchor_acceptable"] = r.anchor_acceptable;
  j["equality_gap"] = r.equality_gap;
  j["domination_margin"] = r.domination_margin;
  j["anchors_tested"] = r.anchors_tested;
  if (!r.failure.empty()) j["failure"] = r.failure;
  if (r.witness_anchor) {
    j["witness"] = json{{"anchor", r.witness_anchor->leaf_values},
                        {"node", r.witness_node}};
  }
  return j;
}

json dual_report_to_json(const DualCheckReport& r) {
  json j;
  j["check"] = "penalty_duality";
  j["status"] = r.passed ? "pass" : "fail";
  j["max_gap"] = r.max_gap;
  j["interior_violation"] = r.interior_violation;
  j["nodes"] = r.nodes;
  j["exhaustive"] = r.exhaustive;
  j["coverage"] = r.coverage;
  if (r.witness_node >= 0) {
    j["node"] = r.witness_node;
    j["lhs"] = r.witness_lhs;
    j["rhs"] = r.witness_rhs;
  }
  return j;
}

json generator_report_to_json(const GeneratorReport& r) {
  json j;
  j["check"] = "generator_flags";
  j["status"] = r.all_declared_consistent ? "pass" : "fail";
  j["normalization_gap"] = r.normalization_gap;
  j["star_violation"] = r.star_violation;
  if (r.star_witness)
    j["star_witness"] = json{{"t", (*r.star_witness)[0]},
                             {"z", (*r.star_witness)[1]},
                             {"alpha", (*r.star_witness)[2]}};
  j["lipschitz_estimate"] = r.lipschitz_estimate;
  j["growth_estimate"] = r.growth_estimate;
  j["convexity_violation"] = r.convexity_violation;
  if (r.convexity_witness)
    j["convexity_witness"] = json{{"t", (*r.convexity_witness)[0]},
                                  {"z1", (*r.convexity_witness)[1]},
                                  {"z2", (*r.convexity_witness)[2]}};
  j["homogeneity_gap"] = r.homogeneity_gap;
  return j;
}

json consistency_entry_to_json(const ConsistencyEntry& e) {
  json j;
  j["t"] = e.t;
  j["s"] = e.s;
  j["gap"] = e.gap;
  j["status"] = e.passed ? "pass" : "fail";
  if (e.witness) j["witness"] = e.witness->leaf_values;
  return j;
}

json consistency_report_to_json(const ConsistencyReport& r) {
  json j;
  j["check"] = "time_consistency";
  j["status"] = r.passed ? "pass" : "fail";
  j["max_gap"] = r.max_gap;
  json entries = json::array();
  for (const auto& e : r.entries) entries.push_back(consistency_entry_to_json(e));
  j["violations"] = std::move(entries);
  return j;
}

json sensitivity_report_to_json(const SensitivityReport& r) {
  json j;
  j["check"] = "sensitivity";
  j["verdict"] = sensitivity_verdict_name(r.verdict);
  j["atom_test"] = r.atom_test_passed ? "pass" : "fail";
  j["atoms_failed"] = r.atoms_failed;
  j["coherent_certificate"] = r.coherent_certificate;
  j["rays_tried"] = r.rays_tried;
  if (r.ray_witness) {
    j["witness"] = json{{"direction", r.ray_witness->direction.leaf_values},
                        {"final_scale", r.ray_witness->final_scale},
                        {"final_expectation", r.ray_witness->final_expectation}};
  }
  return j;
}

json convergence_to_json(const ConvergenceStudy& s) {
  json rows = json::array();
  for (const auto& r : s.rows)
    rows.push_back(json{{"N", r.levels},
                        {"value", r.value},
                        {"oracle", r.oracle},
                        {"abs_error", r.abs_error},
                        {"ratio", r.ratio}});
  return json{{"rows", std::move(rows)}};
}

json bsde_solution_to_json(const BsdeSolution& s) {
  return json{{"Y", s.y.levels},
              {"Z", s.z.levels},
              {"slope_margin", s.slope_margin},
              {"comparison_verified", s.comparison_verified}};
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

std::string digest_hex(const json& j) {
  std::ostringstream os;
  os << std::hex << fnv1a64(j.dump());
  return os.str();
}

}  // namespace riskenv
