#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/measures.hpp"

namespace riskenv {

enum class Axiom { A1, A2, A3, A4, A5, A6 };

std::string axiom_name(Axiom a);
std::optional<Axiom> axiom_from_name(const std::string& s);

// A violating sample: the payoffs and profile that broke the inequality,
// the node where it broke, and both sides of the comparison.
struct AxiomWitness {
  RandomVariable x;
  std::optional<RandomVariable> y;
  std::optional<Profile> alpha;
  int node = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // amount by which the axiom inequality failed
};

struct AxiomReport {
  Axiom axiom = Axiom::A1;
  bool passed = true;
  int samples = 0;
  double worst_margin = 0.0;  // largest violation seen (0 when passed)
  std::optional<AxiomWitness> witness;
};

// Randomized falsification of the axioms at level t: structured corner cases
// first (constants, indicator losses, and for tiny trees an exhaustive coarse
// payoff grid), then seeded random samples until the budget runs out.
// Reports the first violating sample per axiom; never throws on a violation.
std::vector<AxiomReport> check_axioms(const RiskMeasure& rho,
                                      const ScenarioTree& tree, int t,
                                      const std::vector<Axiom>& which,
                                      int budget, std::uint64_t seed,
                                      double tol = kSoftTol);

std::vector<Axiom> all_axioms();

}  // namespace riskenv
