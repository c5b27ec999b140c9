#include "riskenv/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "riskenv/sampling.hpp"

namespace riskenv {

ConsistencyEntry check_time_consistency(const RiskMeasure& rho,
                                        const ScenarioTree& tree,
                                        const RandomVariable& x, int t, int s,
                                        double tol) {
  if (!(0 <= t && t <= s && s <= tree.levels()))
    throw InputError("need 0 <= t <= s <= N");
  Profile inner = rho.evaluate(tree, x, s);
  RandomVariable nested = lift(tree, negate(inner));
  Profile lhs = rho.evaluate(tree, nested, t);
  Profile rhs = rho.evaluate(tree, x, t);

  ConsistencyEntry entry;
  entry.t = t;
  entry.s = s;
  entry.gap = max_abs_diff(lhs, rhs);
  entry.passed = entry.gap <= tol;
  if (!entry.passed) entry.witness = x;
  return entry;
}

ConsistencyReport check_time_consistency_all(const RiskMeasure& rho,
                                             const ScenarioTree& tree,
                                             int payoff_budget,
                                             std::uint64_t seed, double tol) {
  if (payoff_budget < 1) throw InputError("payoff budget must be >= 1");
  Rng rng(seed);
  ConsistencyReport report;
  for (int k = 0; k < payoff_budget; ++k) {
    RandomVariable x = sample_payoff(rng, tree);
    for (int t = 0; t <= tree.levels(); ++t)
      for (int s = t; s <= tree.levels(); ++s) {
        ConsistencyEntry e = check_time_consistency(rho, tree, x, t, s, tol);
        report.max_gap = std::max(report.max_gap, e.gap);
        if (!e.passed) {
          report.passed = false;
          report.entries.push_back(std::move(e));
        }
      }
  }
  return report;
}

std::optional<ConsistencyEntry> find_inconsistency_witness(
    const RiskMeasure& rho, const ScenarioTree& tree,
    const std::vector<double>& grid, double tol) {
  if (grid.empty()) throw InputError("payoff grid must be non-empty");
  int leaves = tree.leaf_count();
  constexpr long kComboCap = 1L << 20;
  long combos = 1;
  for (int i = 0; i < leaves; ++i) {
    combos *= static_cast<long>(grid.size());
    if (combos > kComboCap)
      throw InputError("exhaustive payoff search needs grid^leaves <= 2^20; "
                       "shrink the tree or the grid");
  }

  RandomVariable x;
  x.leaf_values.resize(leaves);
  for (long code = 0; code < combos; ++code) {
    long rest = code;
    for (int i = 0; i < leaves; ++i) {
      x.leaf_values[i] = grid[rest % grid.size()];
      rest /= static_cast<long>(grid.size());
    }
    for (int t = 0; t <= tree.levels(); ++t)
      for (int s = t; s <= tree.levels(); ++s) {
        ConsistencyEntry e = check_time_consistency(rho, tree, x, t, s, tol);
        if (!e.passed) return e;
      }
  }
  return std::nullopt;
}

std::string sensitivity_verdict_name(SensitivityVerdict v) {
  switch (v) {
    case SensitivityVerdict::sensitive_evidence: return "sensitive_evidence";
    case SensitivityVerdict::insensitive_witness: return "insensitive_witness";
    case SensitivityVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

// Ray search: scales 1, 2, ..., 2^16; a direction witnesses insensitivity
// when every scaled copy stays acceptable while E_Qtilde drops by at least
// one unit per doubling past the warm-up scales.
bool ray_descends(const RiskMeasure& rho, const ScenarioTree& tree, int t,
                  const MeasureChange& q_tilde, const RandomVariable& d,
                  double tol, RayWitness* out) {
  constexpr int kMaxDoublings = 16;
  constexpr int kWarmup = 4;
  double prev_e = 0.0;
  double scale_k = 1.0;
  for (int step = 0; step <= kMaxDoublings; ++step, scale_k *= 2.0) {
    RandomVariable kd = scale(d, scale_k);
    if (max_value(rho.evaluate(tree, kd, t)) > tol) return false;
    double e = expectation(tree, kd, &q_tilde);
    if (step > kWarmup && e > prev_e - 1.0) return false;
    prev_e = e;
  }
  out->direction = d;
  out->final_scale = scale_k / 2.0;
  out->final_expectation = prev_e;
  return true;
}

}  // namespace

SensitivityReport check_sensitivity(const RiskMeasure& rho,
                                    const ScenarioTree& tree, int t,
                                    const MeasureChange& q_tilde, int budget,
                                    std::uint64_t seed,
                                    bool coherent_continuous, double tol) {
  if (!q_tilde.equivalent())
    throw InputError("sensitivity needs an equivalent probe measure");
  tree.require_level(t);
  if (budget < 1) throw InputError("budget must be >= 1");

  SensitivityReport rep;
  rep.coherent_certificate = coherent_continuous;

  // Atom test over the leaf atoms.
  Profile rho0 = rho.evaluate(
      tree, RandomVariable{std::vector<double>(tree.leaf_count(), 0.0)}, t);
  rep.atom_test_passed = true;
  for (int leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    RandomVariable loss;
    loss.leaf_values.assign(tree.leaf_count(), 0.0);
    loss.leaf_values[leaf] = -1.0;
    Profile r = rho.evaluate(tree, loss, t);
    bool noticed = false;
    for (size_t n = 0; n < r.values.size(); ++n)
      if (r.values[n] > rho0.values[n] + tol) {
        noticed = true;
        break;
      }
    if (!noticed) {
      rep.atom_test_passed = false;
      ++rep.atoms_failed;
    }
  }

  // Ray search for an insensitivity witness.
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RayWitness witness;
  for (int k = 0; k < budget; ++k) {
    RandomVariable d;
    if (k % 2 == 0) {
      d = sample_payoff(rng, tree, -1.0, 1.0);
    } else {
      // loss concentrated on a small leaf set, small gain elsewhere
      int hits = 1 + static_cast<int>(unit(rng) * std::max(1, tree.leaf_count() / 4));
      double gain = 0.3 * unit(rng);
      d.leaf_values.assign(tree.leaf_count(), gain);
      for (int h = 0; h < hits; ++h) {
        int leaf = static_cast<int>(unit(rng) * tree.leaf_count());
        leaf = std::min(leaf, tree.leaf_count() - 1);
        d.leaf_values[leaf] = -1.0;
      }
    }
    ++rep.rays_tried;
    if (ray_descends(rho, tree, t, q_tilde, d, tol, &witness)) {
      rep.ray_witness = std::move(witness);
      rep.verdict = SensitivityVerdict::insensitive_witness;
      return rep;
    }
  }

  rep.verdict = rep.atom_test_passed ? SensitivityVerdict::sensitive_evidence
                                     : SensitivityVerdict::inconclusive;
  return rep;
}

}  // namespace riskenv
