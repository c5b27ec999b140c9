#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "riskenv/axioms.hpp"
#include "riskenv/bsde.hpp"
#include "riskenv/dynamics.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/generators.hpp"
#include "riskenv/measures.hpp"

namespace riskenv {

using json = nlohmann::json;

// Tree serialization: {kind, N, dt, nodes:[{level,index,children,probs,increment}]}
// plus the generator shorthand {kind:"binomial", N, T} without nodes.
json tree_to_json(const ScenarioTree& tree);
ScenarioTree tree_from_json(const json& j);

// Payoffs: {leaf_values:[...]} or {functional:"of_terminal_sum"|"of_path_max",
// params:{scale, offset}}.
RandomVariable payoff_from_json(const ScenarioTree& tree, const json& j);
json payoff_to_json(const RandomVariable& x);

// Scenarios: {kind:"explicit", rows:[{level,index,probs:[...]}]} or
// {kind:"binomial_drift", theta}.
MeasureChange measure_change_from_json(const ScenarioTree& tree, const json& j);

Generator generator_from_json(const json& j);
Utility utility_from_json(const json& j);

// Parsed model file. Payoffs/scenarios/measures resolve lazily so models
// without a tree section (refinement studies) stay valid.
struct Model {
  std::optional<ScenarioTree> tree;
  json raw;

  const ScenarioTree& require_tree() const;
  RandomVariable payoff(const std::string& name) const;
  MeasureChange scenario(const std::string& name) const;
  Generator generator(const std::string& name) const;
  RiskMeasurePtr measure(const std::string& name) const;
  std::vector<std::string> payoff_names() const;
  std::vector<std::string> measure_names() const;
  std::vector<std::string> generator_names() const;
};

Model parse_model(const json& j);
Model load_model(const std::string& path);

// Measure specs mirror the tagged union; named payoff/scenario references
// are resolved against the model.
RiskMeasurePtr measure_from_json(const Model& model, const json& j);

json profile_to_json(const Profile& p);
json axiom_report_to_json(const AxiomReport& r);
json attainment_report_to_json(const AttainmentReport& r);
json dual_report_to_json(const DualCheckReport& r);
json generator_report_to_json(const GeneratorReport& r);
json consistency_entry_to_json(const ConsistencyEntry& e);
json consistency_report_to_json(const ConsistencyReport& r);
json sensitivity_report_to_json(const SensitivityReport& r);
json convergence_to_json(const ConvergenceStudy& s);
json bsde_solution_to_json(const BsdeSolution& s);

// FNV-1a over the canonical dump; keyed reports carry it as inputs_digest.
std::uint64_t fnv1a64(std::string_view data);
std::string digest_hex(const json& j);

}  // namespace riskenv
