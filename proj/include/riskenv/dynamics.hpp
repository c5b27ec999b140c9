#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/measures.hpp"

namespace riskenv {

// One nesting check: rho_{t,s}(-rho_{s,T}(X)) against rho_{t,T}(X).
struct ConsistencyEntry {
  int t = 0;
  int s = 0;
  double gap = 0.0;      // max nodewise |difference|
  bool passed = true;
  std::optional<RandomVariable> witness;  // stored when gap > tol
};

struct ConsistencyReport {
  std::vector<ConsistencyEntry> entries;
  double max_gap = 0.0;
  bool passed = true;
};

ConsistencyEntry check_time_consistency(const RiskMeasure& rho,
                                        const ScenarioTree& tree,
                                        const RandomVariable& x, int t, int s,
                                        double tol);

// All pairs 0 <= t <= s <= N over `payoff_budget` seeded payoffs.
ConsistencyReport check_time_consistency_all(const RiskMeasure& rho,
                                             const ScenarioTree& tree,
                                             int payoff_budget,
                                             std::uint64_t seed, double tol);

// Exhaustive search over payoffs with values drawn from `grid` (small trees
// only); returns the first nesting violation above tol.
std::optional<ConsistencyEntry> find_inconsistency_witness(
    const RiskMeasure& rho, const ScenarioTree& tree,
    const std::vector<double>& grid, double tol);

enum class SensitivityVerdict {
  sensitive_evidence,
  insensitive_witness,
  inconclusive,
};

std::string sensitivity_verdict_name(SensitivityVerdict v);

// Acceptable ray along which E_Qtilde decays without bound.
struct RayWitness {
  RandomVariable direction;
  double final_scale = 0.0;
  double final_expectation = 0.0;
};

struct SensitivityReport {
  SensitivityVerdict verdict = SensitivityVerdict::inconclusive;
  // atom test: rho_t(-1_B) > rho_t(0) at some node, for every leaf atom B
  bool atom_test_passed = false;
  int atoms_failed = 0;
  // the atom test certifies sensitivity only for coherent measures
  // continuous from above; the caller declares that regime
  bool coherent_certificate = false;
  int rays_tried = 0;
  std::optional<RayWitness> ray_witness;
};

SensitivityReport check_sensitivity(const RiskMeasure& rho,
                                    const ScenarioTree& tree, int t,
                                    const MeasureChange& q_tilde, int budget,
                                    std::uint64_t seed,
                                    bool coherent_continuous = false,
                                    double tol = kSoftTol);

}  // namespace riskenv
