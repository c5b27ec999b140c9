#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "riskenv/axioms.hpp"
#include "riskenv/envelope.hpp"
#include "test_support.hpp"

using namespace riskenv;
using riskenv::testing::grid_min_member;
using riskenv::testing::random_explicit_tree;

namespace {

ScenarioTree one_period() { return ScenarioTree::binomial(1, 1.0); }

RandomVariable constant(const ScenarioTree& t, double c) {
  return RandomVariable{std::vector<double>(t.leaf_count(), c)};
}

}  // namespace

TEST_CASE("piecewise-linear minimizer on hand cases") {
  // single line
  PwlMin m = minimize_upper_envelope({2.0}, {-1.0}, 0.0, 1.0);
  CHECK(m.value == doctest::Approx(-1.0));
  CHECK(m.arg == 0.0);

  // two crossing lines: min of the upper envelope at the crossing
  m = minimize_upper_envelope({2.0, -1.0}, {-1.0, 0.5}, 0.0, 1.0);
  CHECK(m.value == doctest::Approx(0.0));
  CHECK(m.arg == doctest::Approx(0.5));

  // unbounded on [0, inf) when every slope is negative
  m = minimize_upper_envelope({-1.0, -2.0}, {0.0, 1.0}, 0.0,
                              std::numeric_limits<double>::infinity());
  CHECK_FALSE(m.bounded);

  // zero slope tail keeps it bounded
  m = minimize_upper_envelope({-1.0, 0.0}, {0.0, -2.0}, 0.0,
                              std::numeric_limits<double>::infinity());
  CHECK(m.bounded);
  CHECK(m.value == doctest::Approx(-2.0));
}

TEST_CASE("piecewise-linear minimizer degeneracies") {
  // duplicate lines collapse
  PwlMin m = minimize_upper_envelope({1.0, 1.0, 1.0}, {0.5, 0.5, 0.5}, 0.0, 1.0);
  CHECK(m.value == doctest::Approx(0.5));
  CHECK(m.arg == 0.0);

  // equal slopes keep the largest intercept
  m = minimize_upper_envelope({1.0, 1.0}, {-3.0, 2.0}, 0.0, 1.0);
  CHECK(m.value == doctest::Approx(2.0));

  // flat lines only: constant envelope
  m = minimize_upper_envelope({0.0, 0.0}, {1.0, -1.0}, 0.0,
                              std::numeric_limits<double>::infinity());
  CHECK(m.bounded);
  CHECK(m.value == doctest::Approx(1.0));

  // near-parallel lines stay finite and ordered
  m = minimize_upper_envelope({1.0, 1.0 + 1e-14}, {0.0, 0.0}, 0.0, 1.0);
  CHECK(std::isfinite(m.value));
  CHECK(m.value == doctest::Approx(0.0));
}

TEST_CASE("member kinds are ordered: cone <= star <= monetary") {
  Rng rng(271);
  for (int rep = 0; rep < 50; ++rep) {
    ScenarioTree t = random_explicit_tree(rng, 4);
    RandomVariable z = sample_payoff(rng, t, -1.0, 1.0);
    z.leaf_values[0] = 0.5;  // keeps the cone member bounded at the root
    RandomVariable x = sample_payoff(rng, t, -1.0, 1.0);
    Profile monetary = member_eval(MemberKind::monetary, t, z, x, 0);
    Profile star = member_eval(MemberKind::star, t, z, x, 0);
    bool cone_ok = true;
    Profile cone;
    try {
      cone = member_eval(MemberKind::cone, t, z, x, 0);
    } catch (const InputError&) {
      cone_ok = false;  // all-negative anchor below some node
    }
    for (size_t i = 0; i < star.values.size(); ++i) {
      CHECK(star.values[i] <= monetary.values[i] + 1e-12);
      if (cone_ok) CHECK(cone.values[i] <= star.values[i] + 1e-12);
    }
  }
}

TEST_CASE("member_eval closed forms on two leaves") {
  ScenarioTree t = one_period();
  RandomVariable z{{1.0, -2.0}};
  RandomVariable x{{0.5, 0.0}};
  CHECK(member_eval(MemberKind::monetary, t, z, x, 0).values[0] ==
        doctest::Approx(0.5));

  RandomVariable zs{{2.0, -1.0}};
  RandomVariable xs{{1.0, -0.5}};
  CHECK(member_eval(MemberKind::star, t, zs, xs, 0).values[0] ==
        doctest::Approx(0.0).epsilon(1e-12));

  // alpha = 0 attains at X = 0 as long as the subtree sup of Z is >= 0
  CHECK(member_eval(MemberKind::star, t, zs, constant(t, 0.0), 0).values[0] ==
        doctest::Approx(0.0));

  // cone member with an all-negative anchor has no finite cash floor
  RandomVariable neg{{-1.0, -0.5}};
  CHECK_THROWS_AS(member_eval(MemberKind::cone, t, neg, x, 0), InputError);
}

TEST_CASE("exact star minimizer against the alpha-grid oracle") {
  Rng rng(211);
  for (int rep = 0; rep < 200; ++rep) {
    ScenarioTree t = random_explicit_tree(rng, 4);
    RandomVariable z = sample_payoff(rng, t, -2.0, 2.0);
    RandomVariable x = sample_payoff(rng, t, -2.0, 2.0);
    int level = std::uniform_int_distribution<int>(0, t.levels() - 1)(rng);
    Profile exact = member_eval(MemberKind::star, t, z, x, level);
    for (int n = 0; n < t.node_count(level); ++n) {
      double grid = grid_min_member(t, z, x, level, n, 1.0);
      CHECK(exact.values[n] <= grid + 1e-12);   // true lower bound
      CHECK(grid - exact.values[n] <= 1e-3);    // and tight
    }
  }
}

TEST_CASE("lower envelope of anchored members") {
  ScenarioTree t = one_period();
  RandomVariable x{{0.5, 0.0}};
  EnvelopeMemberSpec m1{MemberKind::monetary, RandomVariable{{1.0, -2.0}}, 0};
  EnvelopeMemberSpec m2{MemberKind::monetary, RandomVariable{{0.0, 0.0}}, 0};
  CHECK(lower_envelope(t, {m1}, x, 0).values[0] == doctest::Approx(0.5));
  CHECK(lower_envelope(t, {m1, m2}, x, 0).values[0] == doctest::Approx(0.0));

  // adding the attainment anchor drops the envelope to the source value
  EntropicMeasure source(1.0);
  Profile r = source.evaluate(t, x, 0);
  RandomVariable z0 = add(x, lift(t, r));
  EnvelopeMemberSpec m0{MemberKind::monetary, z0, 0};
  CHECK(lower_envelope(t, {m1, m2, m0}, x, 0).values[0] ==
        doctest::Approx(r.values[0]).epsilon(1e-12));
}

TEST_CASE("anchor envelopes agree between the free op and the measure") {
  Rng rng(269);
  for (int rep = 0; rep < 20; ++rep) {
    ScenarioTree t = random_explicit_tree(rng, 4);
    RandomVariable x = sample_payoff(rng, t);
    int level = std::uniform_int_distribution<int>(0, t.levels())(rng);
    std::vector<EnvelopeMemberSpec> specs;
    std::vector<RiskMeasurePtr> members;
    for (int k = 0; k < 3; ++k) {
      RandomVariable z = sample_payoff(rng, t);
      specs.push_back({MemberKind::monetary, z, level});
      members.push_back(
          std::make_shared<AnchorMemberMeasure>(MemberKind::monetary, z, level));
    }
    Profile a = lower_envelope(t, specs, x, level);
    Profile b = LowerEnvelopeMeasure(members).evaluate(t, x, level);
    CHECK(max_abs_diff(a, b) == 0.0);
  }
}

TEST_CASE("attainment for the entropic two-leaf example") {
  ScenarioTree t = one_period();
  RandomVariable x{{0.0, -std::log(3.0)}};
  EntropicMeasure source(1.0);
  Profile r = source.evaluate(t, x, 0);
  CHECK(r.values[0] == doctest::Approx(std::log(2.0)));

  AttainmentReport rep =
      verify_attainment(source, MemberKind::monetary, t, x, 0, 50, 5);
  CHECK(rep.passed);
  CHECK(rep.anchor_acceptable);
  CHECK(rep.equality_gap <= 1e-9);
  CHECK(rep.domination_margin >= -1e-9);
}

TEST_CASE("attainment across kinds and sources on random trees") {
  Rng rng(223);
  for (int rep = 0; rep < 8; ++rep) {
    ScenarioTree t = random_explicit_tree(rng, 4);
    RandomVariable x = sample_payoff(rng, t, -1.5, 1.5);
    int level = std::uniform_int_distribution<int>(0, t.levels())(rng);

    WorstCaseMeasure worst;
    CHECK(verify_attainment(worst, MemberKind::star, t, x, level, 20, rep)
              .passed);
    CHECK(verify_attainment(worst, MemberKind::cone, t, x, level, 20, rep)
              .passed);

    ConditionalVaRMeasure var(0.3);
    CHECK(verify_attainment(var, MemberKind::monetary, t, x, level, 20, rep)
              .passed);

    EntropicMeasure ent(1.0);
    CHECK(verify_attainment(ent, MemberKind::star, t, x, level, 20, rep)
              .passed);
  }
}

TEST_CASE("VaR attainment with convex members despite the A4 witness") {
  // the source is non-convex, yet each member passes conditional convexity
  std::vector<ExplicitNode> nodes;
  nodes.push_back({0, 0, {0, 1, 2}, {0.25, 0.25, 0.5}, 0.0});
  for (int i = 0; i < 3; ++i) nodes.push_back({1, i, {}, {}, 0.0});
  ScenarioTree t = ScenarioTree::from_nodes(TreeKind::explicit_tree, 1, 1.0,
                                            std::move(nodes));
  ConditionalVaRMeasure var(0.3);
  auto var_reports = check_axioms(var, t, 0, {Axiom::A4}, 1000, 3);
  CHECK_FALSE(var_reports[0].passed);

  Rng rng(5);
  for (int rep = 0; rep < 5; ++rep) {
    RandomVariable x = sample_payoff(rng, t, -2.0, 2.0);
    AttainmentReport rep_att =
        verify_attainment(var, MemberKind::monetary, t, x, 0, 10, rep);
    CHECK(rep_att.passed);

    RandomVariable z0 = add(x, lift(t, var.evaluate(t, x, 0)));
    AnchorMemberMeasure member(MemberKind::monetary, z0, 0);
    auto member_reports = check_axioms(member, t, 0, {Axiom::A4}, 400, 11);
    CHECK(member_reports[0].passed);
  }
}

TEST_CASE("star members pass A3/A4/A6 when the anchor sup is nonnegative") {
  Rng rng(229);
  ScenarioTree t = random_explicit_tree(rng, 3);
  RandomVariable z = sample_payoff(rng, t, -1.0, 1.0);
  // push the subtree sup at the member level to >= 0
  int level = 1;
  Profile sup = cond_ess_sup(t, z, level);
  for (double& v : sup.values) v = std::min(v, 0.0);
  z = subtract(z, lift(t, sup));
  AnchorMemberMeasure member(MemberKind::star, z, level);
  auto reports =
      check_axioms(member, t, level, {Axiom::A3, Axiom::A4, Axiom::A6}, 1000, 17);
  for (const auto& r : reports) CHECK(r.passed);
}

TEST_CASE("cone members pass A4 and A5") {
  Rng rng(233);
  ScenarioTree t = random_explicit_tree(rng, 3);
  RandomVariable z = sample_payoff(rng, t, -1.0, 1.0);
  z.leaf_values[0] = 0.5;  // keep at least one nonnegative direction per node
  Profile sup = cond_ess_sup(t, z, 0);
  for (double& v : sup.values) v = std::min(v, 0.0);
  z = subtract(z, lift(t, sup));
  AnchorMemberMeasure member(MemberKind::cone, z, 0);
  auto reports = check_axioms(member, t, 0, {Axiom::A4, Axiom::A5}, 600, 19);
  for (const auto& r : reports) CHECK(r.passed);
}

TEST_CASE("penalty values") {
  ScenarioTree t = one_period();
  MeasureChange p = MeasureChange::reference(t);
  CHECK(penalty(t, constant(t, 0.0), p, 0).values[0] == 0.0);
  CHECK(penalty(t, RandomVariable{{1.0, -2.0}}, p, 0).values[0] ==
        doctest::Approx(0.5));
}

TEST_CASE("penalty duality on hand examples") {
  ScenarioTree t = one_period();
  RandomVariable z{{1.0, -2.0}};
  RandomVariable x{{0.5, 0.0}};
  DualCheckReport rep = dual_check(t, z, x, 0);
  CHECK(rep.passed);
  CHECK(rep.exhaustive);
  CHECK(rep.max_gap <= 1e-12);

  // the maximizing vertex is the point mass on the first leaf
  RandomVariable neg_x = negate(x);
  double best = -1e300;
  int best_leaf = -1;
  for (int leaf = 0; leaf < 2; ++leaf) {
    MeasureChange q = MeasureChange::vertex(t, leaf);
    double val =
        cond_expect(t, neg_x, 0, &q).values[0] - penalty(t, z, q, 0).values[0];
    if (val > best) {
      best = val;
      best_leaf = leaf;
    }
  }
  CHECK(best_leaf == 0);
  CHECK(best == doctest::Approx(0.5));

  // Z = X collapses both sides to zero
  DualCheckReport same = dual_check(t, x, x, 0);
  CHECK(same.passed);
  CHECK(member_eval(MemberKind::monetary, t, x, x, 0).values[0] == 0.0);
}

TEST_CASE("penalty duality is exact on random trees") {
  Rng rng(239);
  for (int rep = 0; rep < 25; ++rep) {
    ScenarioTree t = random_explicit_tree(rng, 3);
    RandomVariable z = sample_payoff(rng, t, -2.0, 2.0);
    RandomVariable x = sample_payoff(rng, t, -2.0, 2.0);
    for (int level = 0; level <= std::min(2, t.levels()); ++level) {
      DualCheckReport r = dual_check(t, z, x, level);
      CHECK(r.passed);
      CHECK(r.max_gap <= 1e-12);
      CHECK(r.interior_violation <= 1e-12);
    }
  }
}

TEST_CASE("sampled duality still lower-bounds when capped") {
  ScenarioTree t = ScenarioTree::binomial(6, 1.0);
  Rng rng(241);
  RandomVariable z = sample_payoff(rng, t, -1.0, 1.0);
  RandomVariable x = sample_payoff(rng, t, -1.0, 1.0);
  DualCheckReport r = dual_check(t, z, x, 0, /*vertex_cap=*/16);
  CHECK_FALSE(r.exhaustive);
  CHECK(r.coverage == doctest::Approx(16.0 / 64.0));
  CHECK(r.passed);  // sampled max never exceeds the closed form
}

TEST_CASE("sup of family: linear vs worst case and the intersection identity") {
  Rng rng(251);
  ScenarioTree t = random_explicit_tree(rng, 4);
  RandomVariable x = sample_payoff(rng, t, -2.0, 2.0);
  auto lin = std::make_shared<LinearMeasure>();
  auto worst = std::make_shared<WorstCaseMeasure>();

  SupFamilyResult single = sup_of_family({lin}, t, x, 1);
  CHECK(max_abs_diff(single.value, lin->evaluate(t, x, 1)) == 0.0);

  SupFamilyResult both = sup_of_family({lin, worst}, t, x, 1);
  CHECK(max_abs_diff(both.value, worst->evaluate(t, x, 1)) <= 1e-12);
  CHECK(max_value(both.at_zero) <= 1e-12);  // finiteness gate at zero

  // intersection identity: Y* = sup profile is the least profile acceptable
  // to every member
  auto ent = std::make_shared<EntropicMeasure>(2.0);
  SupFamilyResult fam = sup_of_family({lin, ent}, t, x, 1);
  RandomVariable at_sup = add(x, lift(t, fam.value));
  for (const auto& member : {RiskMeasurePtr(lin), RiskMeasurePtr(ent)}) {
    CHECK(max_value(member->evaluate(t, at_sup, 1)) <= 1e-9);
  }
  Profile lowered = fam.value;
  for (double& v : lowered.values) v -= 1e-6;
  RandomVariable below = add(x, lift(t, lowered));
  bool some_member_rejects = false;
  for (const auto& member : {RiskMeasurePtr(lin), RiskMeasurePtr(ent)}) {
    Profile p = member->evaluate(t, below, 1);
    for (double v : p.values) some_member_rejects |= v > 1e-9;
  }
  CHECK(some_member_rejects);
}

TEST_CASE("sup of family of monetary measures stays monetary") {
  Rng rng(257);
  ScenarioTree t = random_explicit_tree(rng, 3);
  SupOfFamilyMeasure sup({std::make_shared<LinearMeasure>(),
                          std::make_shared<EntropicMeasure>(1.0),
                          std::make_shared<WorstCaseMeasure>()});
  auto reports = check_axioms(sup, t, 1, {Axiom::A1, Axiom::A2}, 500, 23);
  for (const auto& r : reports) CHECK(r.passed);
}

TEST_CASE("shifted measures: identity, translation, and the star transform") {
  Rng rng(263);
  ScenarioTree t = random_explicit_tree(rng, 3);
  RandomVariable x = sample_payoff(rng, t);
  auto inner = std::make_shared<EntropicMeasure>(1.0);

  auto id = shift_measure(inner, constant(t, 0.0));
  CHECK(max_abs_diff(id->evaluate(t, x, 1), inner->evaluate(t, x, 1)) == 0.0);

  // translation consistency survives the shift
  Profile m = sample_profile(rng, t, 1, -1.0, 1.0);
  auto shifted = shift_measure(inner, sample_payoff(rng, t));
  Profile lhs = shifted->evaluate(t, add(x, lift(t, m)), 1);
  Profile rhs = shifted->evaluate(t, x, 1);
  for (size_t i = 0; i < rhs.values.size(); ++i) rhs.values[i] -= m.values[i];
  CHECK(max_abs_diff(lhs, rhs) <= 1e-9);

  // envelope of two entropics shifted by a common acceptable Z passes A6
  auto envelope = std::make_shared<LowerEnvelopeMeasure>(
      std::vector<RiskMeasurePtr>{std::make_shared<EntropicMeasure>(1.0),
                                  std::make_shared<EntropicMeasure>(2.0)});
  for (const RandomVariable& z :
       {constant(t, 0.0), constant(t, 0.5), sample_payoff(rng, t, 0.0, 1.0)}) {
    auto star = shift_measure(envelope, z);
    auto reports = check_axioms(*star, t, 1, {Axiom::A6}, 1000, 29);
    CHECK(reports[0].passed);
  }
}
