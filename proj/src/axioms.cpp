#include "riskenv/axioms.hpp"

#include <algorithm>
#include <cmath>

#include "riskenv/sampling.hpp"

namespace riskenv {

namespace {

RandomVariable constant_payoff(const ScenarioTree& tree, double c) {
  RandomVariable x;
  x.leaf_values.assign(tree.leaf_count(), c);
  return x;
}

RandomVariable indicator_loss(const ScenarioTree& tree, int leaf,
                              double depth) {
  RandomVariable x = constant_payoff(tree, 0.0);
  x.leaf_values[leaf] = depth;
  return x;
}

Profile constant_profile(const ScenarioTree& tree, int t, double c) {
  Profile p;
  p.level = t;
  p.values.assign(tree.node_count(t), c);
  return p;
}

// Corner payoffs: constants, single-leaf losses/gains, and for tiny trees
// every {-2, 0}-valued payoff (these expose VaR-style quantile kinks).
std::vector<RandomVariable> corner_payoffs(const ScenarioTree& tree) {
  std::vector<RandomVariable> out;
  out.push_back(constant_payoff(tree, 0.0));
  out.push_back(constant_payoff(tree, 1.0));
  out.push_back(constant_payoff(tree, -1.0));
  int leaves = tree.leaf_count();
  for (int leaf = 0; leaf < std::min(leaves, 8); ++leaf) {
    out.push_back(indicator_loss(tree, leaf, -2.0));
    out.push_back(indicator_loss(tree, leaf, 1.0));
  }
  if (leaves <= 4) {
    for (int mask = 0; mask < (1 << leaves); ++mask) {
      RandomVariable x = constant_payoff(tree, 0.0);
      for (int leaf = 0; leaf < leaves; ++leaf)
        if (mask & (1 << leaf)) x.leaf_values[leaf] = -2.0;
      out.push_back(std::move(x));
    }
  }
  return out;
}

struct Checker {
  const RiskMeasure& rho;
  const ScenarioTree& tree;
  int t;
  double tol;
  AxiomReport report;

  bool budget_left(int budget) const { return report.samples < budget; }

  // Records the violation if `lhs <= rhs + tol` fails at some node.
  // Returns true when a witness was found.
  bool expect_le(const Profile& lhs, const Profile& rhs,
                 const RandomVariable& x,
                 const std::optional<RandomVariable>& y,
                 const std::optional<Profile>& alpha) {
    ++report.samples;
    for (size_t i = 0; i < lhs.values.size(); ++i) {
      double margin = lhs.values[i] - rhs.values[i];
      if (margin > tol) {
        report.passed = false;
        report.worst_margin = margin;
        AxiomWitness w;
        w.x = x;
        w.y = y;
        w.alpha = alpha;
        w.node = static_cast<int>(i);
        w.lhs = lhs.values[i];
        w.rhs = rhs.values[i];
        w.margin = margin;
        report.witness = std::move(w);
        return true;
      }
    }
    return false;
  }

  bool expect_eq(const Profile& lhs, const Profile& rhs,
                 const RandomVariable& x,
                 const std::optional<RandomVariable>& y,
                 const std::optional<Profile>& alpha) {
    ++report.samples;
    for (size_t i = 0; i < lhs.values.size(); ++i) {
      double margin = std::abs(lhs.values[i] - rhs.values[i]);
      if (margin > tol) {
        report.passed = false;
        report.worst_margin = margin;
        AxiomWitness w;
        w.x = x;
        w.y = y;
        w.alpha = alpha;
        w.node = static_cast<int>(i);
        w.lhs = lhs.values[i];
        w.rhs = rhs.values[i];
        w.margin = margin;
        report.witness = std::move(w);
        return true;
      }
    }
    return false;
  }
};

// A1: X <= Y implies rho(X) >= rho(Y).
void falsify_monotonicity(Checker& c, Rng& rng, int budget) {
  std::uniform_real_distribution<double> bump(0.0, 1.0);
  for (const auto& x : corner_payoffs(c.tree)) {
    if (!c.budget_left(budget)) return;
    RandomVariable y = x;
    for (double& v : y.leaf_values) v += 0.5;
    Profile rx = c.rho.evaluate(c.tree, x, c.t);
    Profile ry = c.rho.evaluate(c.tree, y, c.t);
    if (c.expect_le(ry, rx, x, y, std::nullopt)) return;
  }
  while (c.budget_left(budget)) {
    RandomVariable x = sample_payoff(rng, c.tree);
    RandomVariable y = x;
    for (double& v : y.leaf_values) v += bump(rng);
    Profile rx = c.rho.evaluate(c.tree, x, c.t);
    Profile ry = c.rho.evaluate(c.tree, y, c.t);
    if (c.expect_le(ry, rx, x, y, std::nullopt)) return;
  }
}

// A2: rho(X + m) = rho(X) - m for level-t m.
void falsify_translation(Checker& c, Rng& rng, int budget) {
  auto run = [&](const RandomVariable& x, const Profile& m) {
    Profile shifted = c.rho.evaluate(c.tree, add(x, lift(c.tree, m)), c.t);
    Profile base = c.rho.evaluate(c.tree, x, c.t);
    for (size_t i = 0; i < base.values.size(); ++i)
      base.values[i] -= m.values[i];
    return c.expect_eq(shifted, base, x, std::nullopt, m);
  };
  for (const auto& x : corner_payoffs(c.tree)) {
    if (!c.budget_left(budget)) return;
    if (run(x, constant_profile(c.tree, c.t, 0.7))) return;
  }
  while (c.budget_left(budget)) {
    if (run(sample_payoff(rng, c.tree),
            sample_profile(rng, c.tree, c.t, -1.0, 1.0)))
      return;
  }
}

// A3: rho(0) = 0.
void falsify_normalization(Checker& c, int budget) {
  if (!c.budget_left(budget)) return;
  RandomVariable zero = constant_payoff(c.tree, 0.0);
  c.expect_eq(c.rho.evaluate(c.tree, zero, c.t),
              constant_profile(c.tree, c.t, 0.0), zero, std::nullopt,
              std::nullopt);
}

// A4: rho(aX + (1-a)Y) <= a rho(X) + (1-a) rho(Y), a in [0,1] level-t.
void falsify_convexity(Checker& c, Rng& rng, int budget) {
  auto run = [&](const RandomVariable& x, const RandomVariable& y,
                 const Profile& alpha) {
    Profile one_minus = alpha;
    for (double& v : one_minus.values) v = 1.0 - v;
    RandomVariable mix = add(scale_by_profile(c.tree, alpha, x),
                             scale_by_profile(c.tree, one_minus, y));
    Profile lhs = c.rho.evaluate(c.tree, mix, c.t);
    Profile rx = c.rho.evaluate(c.tree, x, c.t);
    Profile ry = c.rho.evaluate(c.tree, y, c.t);
    Profile rhs = rx;
    for (size_t i = 0; i < rhs.values.size(); ++i)
      rhs.values[i] = alpha.values[i] * rx.values[i] +
                      (1.0 - alpha.values[i]) * ry.values[i];
    return c.expect_le(lhs, rhs, x, y, alpha);
  };
  Profile half = constant_profile(c.tree, c.t, 0.5);
  auto corners = corner_payoffs(c.tree);
  for (const auto& x : corners)
    for (const auto& y : corners) {
      if (!c.budget_left(budget)) return;
      if (run(x, y, half)) return;
    }
  while (c.budget_left(budget)) {
    if (run(sample_payoff(rng, c.tree), sample_payoff(rng, c.tree),
            sample_profile(rng, c.tree, c.t, 0.0, 1.0)))
      return;
  }
}

// A5: rho(aX) = a rho(X) for a >= 0 level-t.
void falsify_homogeneity(Checker& c, Rng& rng, int budget) {
  auto run = [&](const RandomVariable& x, const Profile& alpha) {
    Profile lhs =
        c.rho.evaluate(c.tree, scale_by_profile(c.tree, alpha, x), c.t);
    Profile rhs = c.rho.evaluate(c.tree, x, c.t);
    for (size_t i = 0; i < rhs.values.size(); ++i)
      rhs.values[i] *= alpha.values[i];
    return c.expect_eq(lhs, rhs, x, std::nullopt, alpha);
  };
  for (const auto& x : corner_payoffs(c.tree))
    for (double a : {0.0, 0.5, 2.0}) {
      if (!c.budget_left(budget)) return;
      if (run(x, constant_profile(c.tree, c.t, a))) return;
    }
  while (c.budget_left(budget)) {
    if (run(sample_payoff(rng, c.tree),
            sample_profile(rng, c.tree, c.t, 0.0, 2.0)))
      return;
  }
}

// A6: rho(aX) >= a rho(X) for a >= 1 level-t.
void falsify_star_shape(Checker& c, Rng& rng, int budget) {
  auto run = [&](const RandomVariable& x, const Profile& alpha) {
    Profile lhs = c.rho.evaluate(c.tree, x, c.t);
    for (size_t i = 0; i < lhs.values.size(); ++i)
      lhs.values[i] *= alpha.values[i];
    Profile rhs =
        c.rho.evaluate(c.tree, scale_by_profile(c.tree, alpha, x), c.t);
    // violation when a*rho(X) > rho(aX)
    return c.expect_le(lhs, rhs, x, std::nullopt, alpha);
  };
  for (const auto& x : corner_payoffs(c.tree))
    for (double a : {1.0, 1.7, 3.0}) {
      if (!c.budget_left(budget)) return;
      if (run(x, constant_profile(c.tree, c.t, a))) return;
    }
  while (c.budget_left(budget)) {
    if (run(sample_payoff(rng, c.tree),
            sample_profile(rng, c.tree, c.t, 1.0, 2.5)))
      return;
  }
}

}  // namespace

std::string axiom_name(Axiom a) {
  switch (a) {
    case Axiom::A1: return "A1";
    case Axiom::A2: return "A2";
    case Axiom::A3: return "A3";
    case Axiom::A4: return "A4";
    case Axiom::A5: return "A5";
    case Axiom::A6: return "A6";
  }
  return "?";
}

std::optional<Axiom> axiom_from_name(const std::string& s) {
  for (Axiom a : all_axioms())
    if (axiom_name(a) == s) return a;
  return std::nullopt;
}

std::vector<Axiom> all_axioms() {
  return {Axiom::A1, Axiom::A2, Axiom::A3, Axiom::A4, Axiom::A5, Axiom::A6};
}

std::vector<AxiomReport> check_axioms(const RiskMeasure& rho,
                                      const ScenarioTree& tree, int t,
                                      const std::vector<Axiom>& which,
                                      int budget, std::uint64_t seed,
                                      double tol) {
  if (budget < 1) throw InputError("falsifier budget must be >= 1");
  tree.require_level(t);
  std::vector<AxiomReport> out;
  out.reserve(which.size());
  for (Axiom a : which) {
    // One stream per axiom keeps reports independent of the requested set.
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<int>(a) + 1)));
    Checker c{rho, tree, t, tol, AxiomReport{}};
    c.report.axiom = a;
    switch (a) {
      case Axiom::A1: falsify_monotonicity(c, rng, budget); break;
      case Axiom::A2: falsify_translation(c, rng, budget); break;
      case Axiom::A3: falsify_normalization(c, budget); break;
      case Axiom::A4: falsify_convexity(c, rng, budget); break;
      case Axiom::A5: falsify_homogeneity(c, rng, budget); break;
      case Axiom::A6: falsify_star_shape(c, rng, budget); break;
    }
    out.push_back(std::move(c.report));
  }
  return out;
}

}  // namespace riskenv
