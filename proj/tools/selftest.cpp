#include "selftest.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <limits>
#include <vector>

#include "commands.hpp"
#include "riskenv/axioms.hpp"
#include "riskenv/bsde.hpp"
#include "riskenv/dynamics.hpp"
#include "riskenv/envelope.hpp"
#include "riskenv/model.hpp"
#include "riskenv/sampling.hpp"

namespace riskenv::cli {

namespace {

struct Case {
  const char* name;
  std::function<bool()> fn;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

RandomVariable constant(const ScenarioTree& t, double c) {
  return RandomVariable{std::vector<double>(t.leaf_count(), c)};
}

ScenarioTree three_atom_tree() {
  std::vector<ExplicitNode> nodes;
  nodes.push_back({0, 0, {0, 1, 2}, {0.25, 0.25, 0.5}, 0.0});
  for (int i = 0; i < 3; ++i) nodes.push_back({1, i, {}, {}, 0.0});
  return ScenarioTree::from_nodes(TreeKind::explicit_tree, 1, 1.0,
                                  std::move(nodes));
}

ScenarioTree random_tree(Rng& rng, int max_levels) {
  std::uniform_int_distribution<int> levels_dist(1, max_levels);
  std::uniform_int_distribution<int> branch_dist(2, 3);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  int levels = levels_dist(rng);
  std::vector<ExplicitNode> nodes;
  nodes.push_back(ExplicitNode{0, 0, {}, {}, 0.0});
  for (int l = 0; l < levels; ++l) {
    int next = 0;
    for (auto& n : nodes) {
      if (n.level != l) continue;
      int k = branch_dist(rng);
      double sum = 0.0;
      std::vector<double> w(k);
      for (double& v : w) sum += (v = weight(rng));
      for (int c = 0; c < k; ++c) {
        n.children.push_back(next + c);
        n.probs.push_back(w[c] / sum);
      }
      next += k;
    }
    for (int i = 0; i < next; ++i)
      nodes.push_back(ExplicitNode{l + 1, i, {}, {}, 0.0});
  }
  return ScenarioTree::from_nodes(TreeKind::explicit_tree, levels, 1.0 / levels,
                                  std::move(nodes));
}

json two_leaf_model() {
  return json{
      {"tree",
       {{"kind", "explicit"},
        {"N", 1},
        {"dt", 1.0},
        {"nodes",
         json::array({{{"level", 0}, {"index", 0},
                       {"children", json::array({0, 1})},
                       {"probs", json::array({0.5, 0.5})}},
                      {{"level", 1}, {"index", 0}},
                      {{"level", 1}, {"index", 1}}})}}},
      {"payoffs",
       {{"xi", {{"leaf_values", json::array({0.0, -std::log(3.0)})}}},
        {"zero", {{"leaf_values", json::array({0.0, 0.0})}}}}},
      {"measures", {{"ent", {{"type", "entropic"}, {"gamma", 1.0}}}}}};
}

json three_atom_model() {
  return json{
      {"tree",
       {{"kind", "explicit"},
        {"N", 1},
        {"dt", 1.0},
        {"nodes",
         json::array({{{"level", 0}, {"index", 0},
                       {"children", json::array({0, 1, 2})},
                       {"probs", json::array({0.25, 0.25, 0.5})}},
                      {{"level", 1}, {"index", 0}},
                      {{"level", 1}, {"index", 1}},
                      {{"level", 1}, {"index", 2}}})}}},
      {"payoffs", {{"xi", {{"leaf_values", json::array({-1.0, 0.0, 1.0})}}}}},
      {"measures",
       {{"var", {{"type", "conditional_var"}, {"lambda", 0.3}}}}}};
}

std::vector<Case> space_cases() {
  return {
      {"space: one-period binomial has 2 leaves and unit increments",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return t.node_count(0) == 1 && t.leaf_count() == 2 &&
                near(t.edge_increment(0, 0, 1), 1.0, 1e-15) &&
                near(t.edge_increment(0, 0, 0), -1.0, 1e-15);
       }},
      {"space: two-period binomial has 4 leaves and dt = 0.5",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         return t.leaf_count() == 4 && near(t.dt(), 0.5, 1e-15);
       }},
      {"space: ten-period paths sum their increments, probabilities sum to 1",
       [] {
         ScenarioTree t = ScenarioTree::binomial(10, 1.0);
         double total = 0.0;
         for (int leaf = 0; leaf < t.leaf_count(); ++leaf) {
           double sum = 0.0;
           int idx = leaf;
           for (int l = 10; l > 0; --l) {
             int par = t.parent(l, idx);
             sum += (idx - 2 * par == 1 ? t.sqrt_dt() : -t.sqrt_dt());
             idx = par;
           }
           if (!near(t.path_value(10, leaf), sum, 1e-12)) return false;
           total += t.node_prob(10, leaf);
         }
         return near(total, 1.0, 1e-12);
       }},
      {"space: conditional expectation of a constant is the constant",
       [] {
         Rng rng(1);
         ScenarioTree t = random_tree(rng, 4);
         for (int l = 0; l <= t.levels(); ++l)
           for (double v : cond_expect(t, constant(t, 3.25), l).values)
             if (!near(v, 3.25, 1e-12)) return false;
         return true;
       }},
      {"space: one-period mean of (4, -2) is 1",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return near(cond_expect(t, RandomVariable{{4.0, -2.0}}, 0).values[0],
                     1.0, 1e-15);
       }},
      {"space: tower property within 1e-12 on random trees",
       [] {
         Rng rng(2);
         for (int rep = 0; rep < 5; ++rep) {
           ScenarioTree t = random_tree(rng, 5);
           RandomVariable x = sample_payoff(rng, t, -2.0, 2.0);
           for (int s = 0; s <= t.levels(); ++s)
             for (int u = 0; u <= s; ++u) {
               Profile nested =
                   cond_expect(t, lift(t, cond_expect(t, x, s)), u);
               if (max_abs_diff(nested, cond_expect(t, x, u)) > 1e-12)
                 return false;
             }
         }
         return true;
       }},
      {"space: essential extrema of a constant",
       [] {
         Rng rng(3);
         ScenarioTree t = random_tree(rng, 4);
         for (double v : cond_ess_sup(t, constant(t, -0.5), 1).values)
           if (v != -0.5) return false;
         return true;
       }},
      {"space: sup/inf of (4, -2) at the root",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{4.0, -2.0}};
         return cond_ess_sup(t, x, 0).values[0] == 4.0 &&
                cond_ess_inf(t, x, 0).values[0] == -2.0;
       }},
      {"space: inf <= mean <= sup nodewise",
       [] {
         Rng rng(4);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         for (int l = 0; l <= t.levels(); ++l) {
           Profile lo = cond_ess_inf(t, x, l);
           Profile mid = cond_expect(t, x, l);
           Profile hi = cond_ess_sup(t, x, l);
           for (size_t i = 0; i < lo.values.size(); ++i)
             if (lo.values[i] > mid.values[i] + 1e-12 ||
                 mid.values[i] > hi.values[i] + 1e-12)
               return false;
         }
         return true;
       }},
      {"space: lifting a root scalar gives a constant payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         for (double v : lift(t, Profile{0, {1.5}}).leaf_values)
           if (v != 1.5) return false;
         return true;
       }},
      {"space: lifting at the last level is the identity",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         RandomVariable x{{1.0, 2.0, 3.0, 4.0}};
         return lift(t, Profile{2, x.leaf_values}).leaf_values == x.leaf_values;
       }},
      {"space: level-1 profile (a, b) lifts to (a, a, b, b)",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         return lift(t, Profile{1, {7.0, -3.0}}).leaf_values ==
                std::vector<double>{7.0, 7.0, -3.0, -3.0};
       }},
  };
}

std::vector<Case> measures_cases() {
  return {
      {"measures: normalized specs vanish on the zero payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         RandomVariable zero = constant(t, 0.0);
         std::vector<RiskMeasurePtr> specs = {
             std::make_shared<LinearMeasure>(),
             std::make_shared<WorstCaseMeasure>(),
             std::make_shared<ConditionalVaRMeasure>(0.3),
             std::make_shared<EntropicMeasure>(1.0),
             std::make_shared<UtilityShortfallMeasure>(
                 Utility::exponential(1.0)),
             std::make_shared<GExpectationMeasure>(
                 Generator::quartic_quadratic()),
             std::make_shared<AlphaMaxminMeasure>(0.5, 0.4)};
         for (const auto& s : specs)
           for (int l = 0; l <= 3; ++l)
             for (double v : s->evaluate(t, zero, l).values)
               if (!near(v, 0.0, 1e-9)) return false;
         return true;
       }},
      {"measures: linear spec negates the conditional mean",
       [] {
         Rng rng(5);
         ScenarioTree t = random_tree(rng, 4);
         RandomVariable x = sample_payoff(rng, t);
         return max_abs_diff(LinearMeasure().evaluate(t, x, 1),
                             negate(cond_expect(t, x, 1))) == 0.0;
       }},
      {"measures: worst case of (4, -2) is 2",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return WorstCaseMeasure()
                    .evaluate(t, RandomVariable{{4.0, -2.0}}, 0)
                    .values[0] == 2.0;
       }},
      {"measures: VaR of a deterministic payoff is its negation",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         for (double lambda : {0.1, 0.5, 0.9})
           for (double v :
                var_conditional(t, constant(t, 2.4), 0, lambda).values)
             if (!near(v, -2.4, 1e-15)) return false;
         return true;
       }},
      {"measures: three-atom VaR at level 0.3 is 0",
       [] {
         ScenarioTree t = three_atom_tree();
         return var_conditional(t, RandomVariable{{-1.0, 0.0, 1.0}}, 0, 0.3)
                    .values[0] == 0.0;
       }},
      {"measures: VaR positive homogeneity is exact",
       [] {
         Rng rng(6);
         for (int rep = 0; rep < 10; ++rep) {
           ScenarioTree t = random_tree(rng, 4);
           RandomVariable x = sample_payoff(rng, t);
           double a = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
           Profile base = var_conditional(t, x, 0, 0.3);
           Profile big = var_conditional(t, scale(x, a), 0, 0.3);
           for (size_t i = 0; i < base.values.size(); ++i)
             if (std::abs(big.values[i] - a * base.values[i]) > 1e-12)
               return false;
         }
         return true;
       }},
      {"measures: robust VaR with the reference scenario alone is plain VaR",
       [] {
         Rng rng(7);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         return max_abs_diff(
                    robust_var(t, x, 0, 0.3, {MeasureChange::reference(t)}),
                    var_conditional(t, x, 0, 0.3)) <= 1e-15;
       }},
      {"measures: tilting mass to the bad leaf raises robust VaR",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{-2.0, 4.0}};
         MeasureChange p = MeasureChange::reference(t);
         MeasureChange tilt(t, {{{0.7, 0.3}}});
         Profile var_p = var_conditional(t, x, 0, 0.6, &p);
         Profile rob = robust_var(t, x, 0, 0.6, {p, tilt});
         return near(var_p.values[0], -4.0, 1e-15) &&
                near(rob.values[0], 2.0, 1e-15);
       }},
      {"measures: robust VaR passes the star-shape falsifier",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         RobustVaRMeasure rob(
             0.3, {MeasureChange::reference(t),
                   MeasureChange::binomial_drift(t, 0.5)});
         return check_axioms(rob, t, 1, {Axiom::A6}, 1000, 21)[0].passed;
       }},
      {"measures: entropic value of a deterministic payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         for (double v : entropic(t, constant(t, 0.9), 1, 2.0).values)
           if (!near(v, -0.9, 1e-12)) return false;
         return true;
       }},
      {"measures: entropic two-point value ln 2",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.0, -std::log(3.0)}};
         return near(entropic(t, x, 0, 1.0).values[0], std::log(2.0), 1e-12);
       }},
      {"measures: entropic passes the conditional convexity falsifier",
       [] {
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         return check_axioms(EntropicMeasure(1.0), t, 1, {Axiom::A4}, 1000,
                             22)[0].passed;
       }},
      {"measures: linear-utility shortfall equals the negated mean",
       [] {
         Rng rng(8);
         ScenarioTree t = random_tree(rng, 4);
         RandomVariable x = sample_payoff(rng, t);
         return max_abs_diff(utility_shortfall(t, x, 1, Utility::linear()),
                             negate(cond_expect(t, x, 1))) <= 1e-9;
       }},
      {"measures: exponential-utility shortfall matches the entropic ln 2",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.0, -std::log(3.0)}};
         return near(
             utility_shortfall(t, x, 0, Utility::exponential(1.0)).values[0],
             std::log(2.0), 1e-9);
       }},
      {"measures: utility shortfall of a deterministic payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         for (double v : utility_shortfall(t, constant(t, -1.2), 1,
                                           Utility::exponential(1.0))
                             .values)
           if (!near(v, 1.2, 1e-9)) return false;
         return true;
       }},
      {"measures: entropic passes A1-A4 with budget 1000",
       [] {
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         auto reports = check_axioms(EntropicMeasure(1.0), t, 1,
                                     {Axiom::A1, Axiom::A2, Axiom::A3,
                                      Axiom::A4},
                                     1000, 23);
         for (const auto& r : reports)
           if (!r.passed) return false;
         return true;
       }},
      {"measures: VaR fails A4 on the three-atom tree with a witness",
       [] {
         ScenarioTree t = three_atom_tree();
         auto reports = check_axioms(ConditionalVaRMeasure(0.3), t, 0,
                                     {Axiom::A4}, 1000, 24);
         return !reports[0].passed && reports[0].witness.has_value() &&
                reports[0].witness->margin > 1e-6;
       }},
      {"measures: the linear spec passes all six axioms",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         for (const auto& r :
              check_axioms(LinearMeasure(), t, 1, all_axioms(), 500, 25))
           if (!r.passed) return false;
         return true;
       }},
  };
}

std::vector<Case> envelope_cases() {
  return {
      {"envelope: monetary member value max(Z - X)",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return near(member_eval(MemberKind::monetary, t,
                                 RandomVariable{{1.0, -2.0}},
                                 RandomVariable{{0.5, 0.0}}, 0)
                         .values[0],
                     0.5, 1e-15);
       }},
      {"envelope: star member minimum at the line crossing",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable z{{2.0, -1.0}};
         RandomVariable x{{1.0, -0.5}};
         double exact = member_eval(MemberKind::star, t, z, x, 0).values[0];
         if (!near(exact, 0.0, 1e-12)) return false;
         double best = std::numeric_limits<double>::infinity();
         for (double a = 0.0; a <= 1.0 + 1e-12; a += 1e-4) {
           double phi = std::max(a * 2.0 - 1.0, a * -1.0 + 0.5);
           best = std::min(best, phi);
         }
         return exact <= best + 1e-12 && best - exact <= 1e-3;
       }},
      {"envelope: star member vanishes on the zero payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return member_eval(MemberKind::star, t, RandomVariable{{2.0, -1.0}},
                            constant(t, 0.0), 0)
                    .values[0] == 0.0;
       }},
      {"envelope: singleton lower envelope is the member itself",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.5, 0.0}};
         EnvelopeMemberSpec m{MemberKind::monetary,
                              RandomVariable{{1.0, -2.0}}, 0};
         return near(lower_envelope(t, {m}, x, 0).values[0], 0.5, 1e-15);
       }},
      {"envelope: two monetary anchors give min(0.5, 0)",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.5, 0.0}};
         EnvelopeMemberSpec m1{MemberKind::monetary,
                               RandomVariable{{1.0, -2.0}}, 0};
         EnvelopeMemberSpec m2{MemberKind::monetary,
                               RandomVariable{{0.0, 0.0}}, 0};
         return near(lower_envelope(t, {m1, m2}, x, 0).values[0], 0.0, 1e-15);
       }},
      {"envelope: adding the attainment anchor reaches the source value",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.5, 0.0}};
         EntropicMeasure src(1.0);
         Profile r = src.evaluate(t, x, 0);
         EnvelopeMemberSpec m1{MemberKind::monetary,
                               RandomVariable{{1.0, -2.0}}, 0};
         EnvelopeMemberSpec m0{MemberKind::monetary,
                               add(x, lift(t, r)), 0};
         return near(lower_envelope(t, {m1, m0}, x, 0).values[0], r.values[0],
                     1e-12);
       }},
      {"envelope: entropic attainment on the two-point payoff",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable x{{0.0, -std::log(3.0)}};
         EntropicMeasure src(1.0);
         AttainmentReport rep =
             verify_attainment(src, MemberKind::monetary, t, x, 0, 50, 5);
         return rep.passed && near(src.evaluate(t, x, 0).values[0],
                                   std::log(2.0), 1e-12);
       }},
      {"envelope: worst-case star attainment on random trees",
       [] {
         Rng rng(9);
         for (int rep = 0; rep < 5; ++rep) {
           ScenarioTree t = random_tree(rng, 4);
           RandomVariable x = sample_payoff(rng, t);
           if (!verify_attainment(WorstCaseMeasure(), MemberKind::star, t, x,
                                  0, 20, rep)
                    .passed)
             return false;
         }
         return true;
       }},
      {"envelope: VaR attainment with conditionally convex members",
       [] {
         ScenarioTree t = three_atom_tree();
         ConditionalVaRMeasure var(0.3);
         Rng rng(10);
         RandomVariable x = sample_payoff(rng, t);
         if (!verify_attainment(var, MemberKind::monetary, t, x, 0, 20, 3)
                  .passed)
           return false;
         RandomVariable z0 = add(x, lift(t, var.evaluate(t, x, 0)));
         AnchorMemberMeasure member(MemberKind::monetary, z0, 0);
         return check_axioms(member, t, 0, {Axiom::A4}, 400, 26)[0].passed &&
                !check_axioms(var, t, 0, {Axiom::A4}, 400, 26)[0].passed;
       }},
      {"envelope: penalty of the zero anchor vanishes",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return penalty(t, constant(t, 0.0), MeasureChange::reference(t), 0)
                    .values[0] == 0.0;
       }},
      {"envelope: penalty of (1, -2) under the reference is 0.5",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         return near(penalty(t, RandomVariable{{1.0, -2.0}},
                             MeasureChange::reference(t), 0)
                         .values[0],
                     0.5, 1e-15);
       }},
      {"envelope: duality ties the member to the penalty (both sides 0.5)",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         RandomVariable z{{1.0, -2.0}};
         RandomVariable x{{0.5, 0.0}};
         DualCheckReport rep = dual_check(t, z, x, 0);
         return rep.passed &&
                near(member_eval(MemberKind::monetary, t, z, x, 0).values[0],
                     0.5, 1e-15);
       }},
      {"envelope: duality with Z = X collapses to zero",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         Rng rng(11);
         RandomVariable x = sample_payoff(rng, t);
         return dual_check(t, x, x, 0).passed &&
                member_eval(MemberKind::monetary, t, x, x, 0).values[0] == 0.0;
       }},
      {"envelope: duality equality within 1e-12 on random trees",
       [] {
         Rng rng(12);
         for (int rep = 0; rep < 5; ++rep) {
           ScenarioTree t = random_tree(rng, 3);
           RandomVariable z = sample_payoff(rng, t);
           RandomVariable x = sample_payoff(rng, t);
           DualCheckReport r = dual_check(t, z, x, 0);
           if (!r.passed || r.max_gap > 1e-12) return false;
         }
         return true;
       }},
      {"envelope: sup of the singleton family is the member",
       [] {
         Rng rng(13);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         auto lin = std::make_shared<LinearMeasure>();
         return max_abs_diff(sup_of_family({lin}, t, x, 0).value,
                             lin->evaluate(t, x, 0)) == 0.0;
       }},
      {"envelope: worst case dominates the family sup",
       [] {
         Rng rng(14);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         auto lin = std::make_shared<LinearMeasure>();
         auto wc = std::make_shared<WorstCaseMeasure>();
         SupFamilyResult fam = sup_of_family({lin, wc}, t, x, 0);
         return max_abs_diff(fam.value, wc->evaluate(t, x, 0)) <= 1e-12 &&
                max_value(fam.at_zero) <= 1e-12;
       }},
      {"envelope: the sup profile is the least jointly acceptable cash",
       [] {
         Rng rng(15);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         auto lin = std::make_shared<LinearMeasure>();
         auto ent = std::make_shared<EntropicMeasure>(2.0);
         SupFamilyResult fam = sup_of_family({lin, ent}, t, x, 1);
         RandomVariable at = add(x, lift(t, fam.value));
         for (const auto& m : {RiskMeasurePtr(lin), RiskMeasurePtr(ent)})
           if (max_value(m->evaluate(t, at, 1)) > 1e-9) return false;
         Profile lower = fam.value;
         for (double& v : lower.values) v -= 1e-6;
         RandomVariable below = add(x, lift(t, lower));
         bool rejected = false;
         for (const auto& m : {RiskMeasurePtr(lin), RiskMeasurePtr(ent)})
           rejected |= max_value(m->evaluate(t, below, 1)) > 1e-9;
         return rejected;
       }},
      {"envelope: zero shift is the identity transform",
       [] {
         Rng rng(16);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         auto inner = std::make_shared<EntropicMeasure>(1.0);
         auto id = shift_measure(inner, constant(t, 0.0));
         return max_abs_diff(id->evaluate(t, x, 0),
                             inner->evaluate(t, x, 0)) == 0.0;
       }},
      {"envelope: shifted entropic envelope passes the star falsifier",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         auto env = std::make_shared<LowerEnvelopeMeasure>(
             std::vector<RiskMeasurePtr>{
                 std::make_shared<EntropicMeasure>(1.0),
                 std::make_shared<EntropicMeasure>(2.0)});
         auto shifted = shift_measure(env, constant(t, 0.0));
         return check_axioms(*shifted, t, 1, {Axiom::A6}, 1000, 27)[0].passed;
       }},
      {"envelope: shifted measures keep translation invariance",
       [] {
         Rng rng(17);
         ScenarioTree t = random_tree(rng, 3);
         RandomVariable x = sample_payoff(rng, t);
         auto shifted = shift_measure(std::make_shared<EntropicMeasure>(1.0),
                                      sample_payoff(rng, t));
         Profile m = sample_profile(rng, t, 1, -1.0, 1.0);
         Profile lhs = shifted->evaluate(t, add(x, lift(t, m)), 1);
         Profile rhs = shifted->evaluate(t, x, 1);
         for (size_t i = 0; i < rhs.values.size(); ++i)
           rhs.values[i] -= m.values[i];
         return max_abs_diff(lhs, rhs) <= 1e-9;
       }},
  };
}

std::vector<Case> gexp_cases() {
  return {
      {"gexp: zero driver reproduces the conditional expectation exactly",
       [] {
         Rng rng(18);
         ScenarioTree t = ScenarioTree::binomial(6, 1.0);
         RandomVariable xi = sample_payoff(rng, t);
         BsdeSolution sol = solve_bsde(t, Generator::zero(), xi);
         for (int l = 0; l <= 6; ++l) {
           Profile e = cond_expect(t, xi, l);
           for (int i = 0; i < t.node_count(l); ++i)
             if (sol.y.levels[l][i] != e.values[i]) return false;
         }
         return true;
       }},
      {"gexp: one-step kappa-abs value 0.1 with Z = 5",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 0.04);
         BsdeSolution sol =
             solve_bsde(t, Generator::abs(0.5), RandomVariable{{-1.0, 1.0}});
         return near(std::abs(sol.z.levels[0][0]), 5.0, 1e-12) &&
                near(sol.y.levels[0][0], 0.1, 1e-12);
       }},
      {"gexp: normalized drivers keep the zero terminal at zero",
       [] {
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         BsdeSolution sol =
             solve_bsde(t, Generator::quartic_quadratic(), constant(t, 0.0));
         for (const auto& level : sol.y.levels)
           for (double v : level)
             if (v != 0.0) return false;
         return true;
       }},
      {"gexp: risk of a deterministic payoff is its negation",
       [] {
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         for (double v :
              g_risk(t, Generator::asymmetric(0.4, 0.9), constant(t, 0.7), 1)
                  .values)
           if (!near(v, -0.7, 1e-15)) return false;
         return true;
       }},
      {"gexp: translation invariance is exact",
       [] {
         Rng rng(19);
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         Generator gen = Generator::abs(0.5);
         RandomVariable xi = sample_payoff(rng, t);
         Profile m = sample_profile(rng, t, 2, -1.0, 1.0);
         Profile lhs = g_risk(t, gen, add(xi, lift(t, m)), 2);
         Profile rhs = g_risk(t, gen, xi, 2);
         for (size_t i = 0; i < rhs.values.size(); ++i)
           rhs.values[i] -= m.values[i];
         return max_abs_diff(lhs, rhs) <= 1e-12;
       }},
      {"gexp: example41 risk is star-shaped at alpha = 1.7",
       [] {
         Rng rng(20);
         ScenarioTree t = ScenarioTree::binomial(5, 1.0);
         Generator gen = Generator::quartic_quadratic();
         for (int rep = 0; rep < 10; ++rep) {
           RandomVariable xi = sample_payoff(rng, t, -0.1, 0.1);
           Profile r1 = g_risk(t, gen, xi, 2);
           Profile r2 = g_risk(t, gen, scale(xi, 1.7), 2);
           for (size_t i = 0; i < r1.values.size(); ++i)
             if (r2.values[i] < 1.7 * r1.values[i] - 1e-12) return false;
         }
         return true;
       }},
      {"gexp: example41 grid audit (star-shaped, non-convex, normalized)",
       [] {
         GeneratorReport rep = check_generator(
             Generator::quartic_quadratic(), {0.0},
             linspace(-3.0, 3.0, 121), linspace(1.0, 4.0, 13));
         return rep.all_declared_consistent && rep.star_ok &&
                rep.normalized_ok && rep.convexity_violation > 1e-3 &&
                rep.convexity_witness.has_value();
       }},
      {"gexp: kappa-abs grid audit (Lipschitz kappa, star equality, convex)",
       [] {
         GeneratorReport rep =
             check_generator(Generator::abs(0.5), {0.0},
                             linspace(-3.0, 3.0, 121), {1.5, 2.0});
         return rep.all_declared_consistent &&
                rep.lipschitz_estimate <= 0.5 + 1e-9 &&
                rep.star_violation <= 1e-12 &&
                rep.convexity_violation <= 1e-12;
       }},
      {"gexp: asymmetric grid audit (star equality, concave)",
       [] {
         GeneratorReport rep =
             check_generator(Generator::asymmetric(0.5, 1.0), {0.0},
                             linspace(-3.0, 3.0, 121), {1.5, 2.0});
         return rep.all_declared_consistent && rep.star_violation <= 1e-12 &&
                rep.homogeneity_gap <= 1e-12;
       }},
      {"gexp: one-step bang-bang values (0.1, -0.1, 0)",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 0.04);
         RandomVariable xi{{-1.0, 1.0}};
         return near(maxmin_dp(t, 0.5, xi, 0, MaxminMode::sup).values[0], 0.1,
                     1e-15) &&
                near(maxmin_dp(t, 0.5, xi, 0, MaxminMode::inf).values[0],
                     -0.1, 1e-15) &&
                near(maxmin_alpha(t, 0.5, 0.5, xi, 0).values[0], 0.0, 1e-15);
       }},
      {"gexp: bang-bang recursion equals the kappa-abs driver for N <= 10",
       [] {
         Rng rng(21);
         for (int n = 1; n <= 10; ++n) {
           ScenarioTree t = ScenarioTree::binomial(n, 1.0);
           RandomVariable xi = sample_payoff(rng, t, -2.0, 2.0);
           double dp = maxmin_dp(t, 0.5, xi, 0, MaxminMode::sup).values[0];
           double bs = solve_bsde(t, Generator::abs(0.5), xi).y.levels[0][0];
           if (std::abs(dp - bs) > 1e-12) return false;
         }
         return true;
       }},
      {"gexp: deterministic payoffs are fixed points of every mode",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         RandomVariable det = constant(t, 0.45);
         for (double v : maxmin_dp(t, 0.4, det, 1, MaxminMode::sup).values)
           if (!near(v, 0.45, 1e-15)) return false;
         for (double v : maxmin_alpha(t, 0.4, 0.3, det, 1).values)
           if (!near(v, 0.45, 1e-15)) return false;
         return true;
       }},
      {"gexp: zero-base oracle equals the closed-form entropic value",
       [] {
         Rng rng(22);
         ScenarioTree t = ScenarioTree::binomial(4, 1.0);
         RandomVariable xi = sample_payoff(rng, t);
         EntropicRoutes routes =
             entropic_bsde(t, 2.0, Generator::zero(), xi, 1);
         return max_abs_diff(routes.oracle, entropic(t, xi, 1, 2.0)) <= 1e-9;
       }},
      {"gexp: both entropic routes return the deterministic value",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         EntropicRoutes routes =
             entropic_bsde(t, 1.0, Generator::zero(), constant(t, 0.6), 0);
         return near(routes.direct.values[0], -0.6, 1e-12) &&
                near(routes.oracle.values[0], -0.6, 1e-12);
       }},
      {"gexp: asymmetric-base route gap shrinks monotonically",
       [] {
         double prev = std::numeric_limits<double>::infinity();
         for (int n : {4, 8, 16}) {
           ScenarioTree t = ScenarioTree::binomial(n, 1.0);
           EntropicRoutes routes = entropic_bsde(
               t, 1.0, Generator::asymmetric(0.5, 1.0),
               payoff_of_terminal_sum(t), 0);
           if (routes.max_gap >= prev) return false;
           prev = routes.max_gap;
         }
         return true;
       }},
      {"gexp: relative entropy of Q against itself vanishes",
       [] {
         Rng rng(23);
         ScenarioTree t = random_tree(rng, 3);
         MeasureChange q = sample_equivalent_change(rng, t);
         for (double v : relative_entropy(t, q, q, 0).values)
           if (v != 0.0) return false;
         return true;
       }},
      {"gexp: one-step relative entropy of (3/4, 1/4) vs fair",
       [] {
         ScenarioTree t = ScenarioTree::binomial(1, 1.0);
         MeasureChange r(t, {{{0.75, 0.25}}});
         double expected = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
         return near(relative_entropy(t, r, MeasureChange::reference(t), 0)
                         .values[0],
                     expected, 1e-12);
       }},
      {"gexp: the tilted measure attains the variational identity",
       [] {
         Rng rng(24);
         ScenarioTree t = random_tree(rng, 4);
         RandomVariable xi = sample_payoff(rng, t);
         MeasureChange q = sample_equivalent_change(rng, t);
         double gamma = 1.3;
         Profile lhs = entropic(t, xi, 0, gamma, &q);
         MeasureChange rs = entropic_maximizer(t, gamma, xi, q);
         double rhs = cond_expect(t, negate(xi), 0, &rs).values[0] -
                      relative_entropy(t, rs, q, 0).values[0] / gamma;
         if (!near(lhs.values[0], rhs, 1e-9)) return false;
         for (int k = 0; k < 5; ++k) {
           MeasureChange r = sample_equivalent_change(rng, t);
           double other = cond_expect(t, negate(xi), 0, &r).values[0] -
                          relative_entropy(t, r, q, 0).values[0] / gamma;
           if (other > lhs.values[0] + 1e-9) return false;
         }
         return true;
       }},
      {"gexp: zero-driver refinement error is identically zero",
       [] {
         ConvergenceStudy s =
             convergence_study(Generator::zero(), PayoffKind::terminal_sum,
                               {2, 4, 8}, 1.0, std::nullopt);
         for (const auto& row : s.rows)
           if (row.abs_error != 0.0) return false;
         return true;
       }},
      {"gexp: entropic refinement ratios stay above 1.3",
       [] {
         ConvergenceStudy s =
             convergence_study(Generator::zero(), PayoffKind::terminal_sum,
                               {4, 8, 16, 32}, 1.0, 1.0);
         for (size_t i = 1; i < s.rows.size(); ++i)
           if (s.rows[i].abs_error >= s.rows[i - 1].abs_error ||
               s.rows[i].ratio < 1.3)
             return false;
         return true;
       }},
      {"gexp: kappa-abs refinement against the bang-bang oracle is exact",
       [] {
         ConvergenceStudy s =
             convergence_study(Generator::abs(0.5), PayoffKind::terminal_sum,
                               {2, 4, 8}, 1.0, std::nullopt);
         for (const auto& row : s.rows)
           if (row.abs_error > 1e-12) return false;
         return true;
       }},
      {"gexp: capped generator yields a one-step star violation",
       [] {
         auto w = find_star_violation(Generator::capped_abs(1.0, 0.5), {0.0},
                                      linspace(-2.0, 2.0, 41),
                                      {1.5, 2.0, 3.0});
         return w.has_value() && w->risk_gap > 1e-9;
       }},
  };
}

std::vector<Case> dynamics_cases() {
  return {
      {"dynamics: g-expectation nesting gap is at most 1e-12 on all pairs",
       [] {
         Rng rng(25);
         GExpectationMeasure rho(Generator::quartic_quadratic());
         for (int n : {2, 4, 6}) {
           ScenarioTree t = ScenarioTree::binomial(n, 1.0);
           RandomVariable x = sample_payoff(rng, t, -0.3, 0.3);
           for (int tt = 0; tt <= n; ++tt)
             for (int s = tt; s <= n; ++s)
               if (check_time_consistency(rho, t, x, tt, s, 1e-12).gap >
                   1e-12)
                 return false;
         }
         return true;
       }},
      {"dynamics: linear nesting via the tower property",
       [] {
         Rng rng(26);
         ScenarioTree t = random_tree(rng, 4);
         return check_time_consistency_all(LinearMeasure(), t, 5, 1, 1e-12)
             .passed;
       }},
      {"dynamics: VaR two-period inconsistency witness with gap above 1e-6",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         auto w = find_inconsistency_witness(ConditionalVaRMeasure(0.3), t,
                                             {0.0, 1.0, 2.0, 3.0}, 1e-6);
         return w.has_value() && w->gap > 1e-6;
       }},
      {"dynamics: the stored witness replays to the same gap bit for bit",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         ConditionalVaRMeasure var(0.3);
         auto w = find_inconsistency_witness(var, t, {0.0, 1.0, 2.0, 3.0},
                                             1e-6);
         if (!w || !w->witness) return false;
         ConsistencyEntry replay =
             check_time_consistency(var, t, *w->witness, w->t, w->s, 1e-6);
         return replay.gap == w->gap;
       }},
      {"dynamics: the linear expectation is sensitive",
       [] {
         ScenarioTree t = ScenarioTree::binomial(3, 1.0);
         SensitivityReport rep = check_sensitivity(
             LinearMeasure(), t, 0, MeasureChange::reference(t), 50, 5, true);
         return rep.verdict == SensitivityVerdict::sensitive_evidence;
       }},
      {"dynamics: worst case notices every atom",
       [] {
         ScenarioTree t = ScenarioTree::binomial(2, 1.0);
         SensitivityReport rep =
             check_sensitivity(WorstCaseMeasure(), t, 0,
                               MeasureChange::reference(t), 50, 5, true);
         return rep.atom_test_passed;
       }},
      {"dynamics: members of a sensitive source admit no descent ray",
       [] {
         Rng rng(27);
         ScenarioTree t = random_tree(rng, 3);
         EntropicMeasure src(1.0);
         RandomVariable z =
             acceptable_anchor(src, t, sample_payoff(rng, t), 0);
         AnchorMemberMeasure member(MemberKind::monetary, z, 0);
         SensitivityReport rep = check_sensitivity(
             member, t, 0, MeasureChange::reference(t), 100, 7, false);
         return rep.verdict != SensitivityVerdict::insensitive_witness;
       }},
  };
}

std::vector<Case> cli_cases() {
  return {
      {"cli: eval of the entropic two-point model returns ln 2",
       [] {
         Model m = parse_model(two_leaf_model());
         Options opt;
         opt.measure = "ent";
         opt.payoff = "xi";
         CommandResult r = run_eval(m, opt);
         double v = r.report["results"]["ent"]["values"][0].get<double>();
         return near(v, std::log(2.0), 1e-9) && r.checks_passed;
       }},
      {"cli: eval of the three-atom VaR model returns 0",
       [] {
         Model m = parse_model(three_atom_model());
         Options opt;
         CommandResult r = run_eval(m, opt);
         return r.report["results"]["var"]["values"][0].get<double>() == 0.0;
       }},
      {"cli: every measure vanishes on the zero payoff",
       [] {
         Model m = parse_model(two_leaf_model());
         Options opt;
         opt.payoff = "zero";
         CommandResult r = run_eval(m, opt);
         return near(r.report["results"]["ent"]["values"][0].get<double>(),
                     0.0, 1e-9);
       }},
      {"cli: envelope command checks attainment and duality",
       [] {
         Model m = parse_model(two_leaf_model());
         Options opt;
         opt.measure = "ent";
         opt.payoff = "xi";
         opt.kind = "monetary";
         opt.budget = 20;
         CommandResult r = run_envelope(m, opt);
         return r.checks_passed && r.report["checks"].size() == 2;
       }},
      {"cli: bsde command reproduces the one-step 0.1 value",
       [] {
         json model_json = {
             {"tree", {{"kind", "binomial"}, {"N", 1}, {"T", 0.04}}},
             {"payoffs", {{"xi", {{"leaf_values", json::array({1.0, -1.0})}}}}},
             {"generators",
              {{"g", {{"name", "abs"}, {"kappa", 0.5}}}}}};
         Model m = parse_model(model_json);
         Options opt;
         opt.generator = "g";
         opt.payoff = "xi";
         CommandResult r = run_bsde(m, opt);
         double v =
             r.report["results"]["risk_profile"]["values"][0].get<double>();
         return near(v, 0.1, 1e-12);
       }},
      {"cli: convergence errors decrease down the table",
       [] {
         Model m = parse_model(json{{"params", {{"T", 1.0}}}});
         Options opt;
         opt.generator = "zero";
         opt.gamma = 1.0;
         opt.n_list = {4, 8, 16};
         opt.format = "csv";
         CommandResult r = run_convergence(m, opt);
         const json& rows = r.report["results"]["rows"];
         double prev = std::numeric_limits<double>::infinity();
         for (const auto& row : rows) {
           double err = row["abs_error"].get<double>();
           if (err >= prev) return false;
           prev = err;
         }
         return !r.csv.empty();
       }},
      {"cli: axioms command emits the VaR convexity witness",
       [] {
         Model m = parse_model(three_atom_model());
         Options opt;
         opt.measure = "var";
         opt.axioms = {"A4"};
         CommandResult r = run_axioms(m, opt);
         return !r.checks_passed &&
                r.report["checks"][0]["status"] == "fail" &&
                r.report["checks"][0].contains("witness");
       }},
      {"cli: identical seeds give byte-identical reports",
       [] {
         Model m = parse_model(three_atom_model());
         Options opt;
         opt.measure = "var";
         opt.seed = 17;
         std::string a = run_axioms(m, opt).report.dump();
         std::string b = run_axioms(m, opt).report.dump();
         Options opt2 = opt;
         opt2.mode = "search";
         std::string c = run_consistency(m, opt2).report.dump();
         std::string d = run_consistency(m, opt2).report.dump();
         return a == b && c == d;
       }},
  };
}

}  // namespace

int run_selftest(std::ostream& os) {
  std::vector<Case> cases;
  for (auto group : {space_cases(), measures_cases(), envelope_cases(),
                     gexp_cases(), dynamics_cases(), cli_cases()})
    for (auto& c : group) cases.push_back(std::move(c));

  int failures = 0;
  for (const auto& c : cases) {
    bool ok = false;
    std::string error;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      error = e.what();
    }
    if (ok) {
      os << "[PASS] " << c.name << "\n";
    } else {
      ++failures;
      os << "[FAIL] " << c.name;
      if (!error.empty()) os << " (" << error << ")";
      os << "\n";
    }
  }
  os << failures << " of " << cases.size() << " checks failed\n";
  return failures;
}

}  // namespace riskenv::cli
