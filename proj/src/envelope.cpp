#include "riskenv/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "riskenv/parallel.hpp"
#include "riskenv/sampling.hpp"

namespace riskenv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Line {
  double a;  // slope
  double b;  // intercept
};

double intersect(const Line& p, const Line& q) {
  // x where p and q meet; callers guarantee p.a != q.a
  return (q.b - p.b) / (p.a - q.a);
}

// Upper hull of the lines, pieces ordered by slope. Lines with equal slopes
// are collapsed to the one with the largest intercept.
std::vector<Line> upper_hull(std::vector<Line> lines) {
  std::sort(lines.begin(), lines.end(), [](const Line& l, const Line& r) {
    return l.a < r.a || (l.a == r.a && l.b < r.b);
  });
  std::vector<Line> hull;
  for (const Line& ln : lines) {
    if (!hull.empty() && hull.back().a == ln.a) hull.pop_back();
    while (hull.size() >= 2) {
      const Line& f = hull[hull.size() - 2];
      const Line& g = hull.back();
      if (intersect(f, g) >= intersect(g, ln))
        hull.pop_back();
      else
        break;
    }
    hull.push_back(ln);
  }
  return hull;
}

}  // namespace

std::string member_kind_name(MemberKind k) {
  switch (k) {
    case MemberKind::monetary: return "monetary";
    case MemberKind::star: return "star";
    case MemberKind::cone: return "cone";
  }
  return "?";
}

std::optional<MemberKind> member_kind_from_name(const std::string& s) {
  if (s == "monetary") return MemberKind::monetary;
  if (s == "star") return MemberKind::star;
  if (s == "cone") return MemberKind::cone;
  return std::nullopt;
}

PwlMin minimize_upper_envelope(const std::vector<double>& slopes,
                               const std::vector<double>& intercepts,
                               double lo, double hi) {
  if (slopes.empty() || slopes.size() != intercepts.size())
    throw InputError("envelope minimization needs matching non-empty lines");
  if (!(lo <= hi)) throw InputError("empty minimization interval");

  std::vector<Line> lines(slopes.size());
  for (size_t i = 0; i < slopes.size(); ++i) lines[i] = {slopes[i], intercepts[i]};
  std::vector<Line> hull = upper_hull(std::move(lines));

  if (hi == kInf && hull.back().a < 0.0) return PwlMin{false, 0.0, 0.0};

  PwlMin best{true, kInf, lo};
  auto consider = [&](const Line& ln, double x) {
    double v = ln.a * x + ln.b;
    if (v < best.value) {
      best.value = v;
      best.arg = x;
    }
  };
  // Segment j of the hull lives on [break(j-1), break(j)].
  double seg_lo = -kInf;
  for (size_t j = 0; j < hull.size(); ++j) {
    double seg_hi = j + 1 < hull.size() ? intersect(hull[j], hull[j + 1]) : kInf;
    double a = std::max(seg_lo, lo);
    double b = std::min(seg_hi, hi);
    if (a <= b) {
      // affine on [a, b]: the minimum sits at an endpoint
      consider(hull[j], a);
      if (b != kInf)
        consider(hull[j], b);
      // b == +inf only happens with slope >= 0, where `a` already wins
    }
    seg_lo = seg_hi;
  }
  return best;
}

Profile member_eval(MemberKind kind, const ScenarioTree& tree,
                    const RandomVariable& anchor, const RandomVariable& x,
                    int t) {
  tree.require_level(t);
  check_payoff(tree, anchor);
  check_payoff(tree, x);

  Profile out;
  out.level = t;
  out.values.resize(tree.node_count(t));

  if (kind == MemberKind::monetary) {
    for (int n = 0; n < tree.node_count(t); ++n) {
      auto [b, e] = tree.leaf_range(t, n);
      double m = -kInf;
      for (int leaf = b; leaf < e; ++leaf)
        m = std::max(m, anchor.leaf_values[leaf] - x.leaf_values[leaf]);
      out.values[n] = m;
    }
    return out;
  }

  double hi = kind == MemberKind::star ? 1.0 : kInf;
  std::vector<double> slopes, intercepts;
  for (int n = 0; n < tree.node_count(t); ++n) {
    auto [b, e] = tree.leaf_range(t, n);
    slopes.clear();
    intercepts.clear();
    for (int leaf = b; leaf < e; ++leaf) {
      slopes.push_back(anchor.leaf_values[leaf]);
      intercepts.push_back(-x.leaf_values[leaf]);
    }
    PwlMin m = minimize_upper_envelope(slopes, intercepts, 0.0, hi);
    if (!m.bounded)
      throw InputError(
          "degenerate anchor: acceptance set has no finite cash floor");
    out.values[n] = m.value;
  }
  return out;
}

Profile lower_envelope(const ScenarioTree& tree,
                       const std::vector<EnvelopeMemberSpec>& members,
                       const RandomVariable& x, int t) {
  if (members.empty()) throw InputError("lower envelope needs members");
  for (const auto& m : members)
    if (m.level != t)
      throw InputError("envelope members must share the evaluation level");
  Profile out = member_eval(members.front().kind, tree, members.front().anchor,
                            x, t);
  for (size_t k = 1; k < members.size(); ++k) {
    Profile p = member_eval(members[k].kind, tree, members[k].anchor, x, t);
    for (size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::min(out.values[i], p.values[i]);
  }
  return out;
}

AnchorMemberMeasure::AnchorMemberMeasure(MemberKind kind, RandomVariable anchor,
                                         int level)
    : kind_(kind), anchor_(std::move(anchor)), level_(level) {}

Profile AnchorMemberMeasure::evaluate(const ScenarioTree& tree,
                                      const RandomVariable& x, int t) const {
  if (t != level_)
    throw InputError("envelope member is pinned to level " +
                     std::to_string(level_));
  return member_eval(kind_, tree, anchor_, x, t);
}

std::string AnchorMemberMeasure::name() const {
  return "member(" + member_kind_name(kind_) + ")";
}

LowerEnvelopeMeasure::LowerEnvelopeMeasure(std::vector<RiskMeasurePtr> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw InputError("lower envelope needs members");
  for (const auto& m : members_)
    if (!m) throw InputError("lower envelope member is empty");
}

Profile LowerEnvelopeMeasure::evaluate(const ScenarioTree& tree,
                                       const RandomVariable& x, int t) const {
  Profile out = members_.front()->evaluate(tree, x, t);
  for (size_t m = 1; m < members_.size(); ++m) {
    Profile p = members_[m]->evaluate(tree, x, t);
    for (size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::min(out.values[i], p.values[i]);
  }
  return out;
}

Profile penalty(const ScenarioTree& tree, const RandomVariable& anchor,
                const MeasureChange& q, int t) {
  return cond_expect(tree, negate(anchor), t, &q);
}

RandomVariable acceptable_anchor(const RiskMeasure& rho,
                                 const ScenarioTree& tree,
                                 const RandomVariable& w, int t) {
  return add(w, lift(tree, rho.evaluate(tree, w, t)));
}

double acceptability_gap(const RiskMeasure& rho, const ScenarioTree& tree,
                         const RandomVariable& z, int t) {
  return max_value(rho.evaluate(tree, z, t));
}

AttainmentReport verify_attainment(const RiskMeasure& source, MemberKind kind,
                                   const ScenarioTree& tree,
                                   const RandomVariable& x, int t,
                                   int anchor_budget, std::uint64_t seed,
                                   double tol, double anchor_amplitude) {
  AttainmentReport rep;
  Profile r = source.evaluate(tree, x, t);
  RandomVariable z0 = add(x, lift(tree, r));

  double accept_gap = acceptability_gap(source, tree, z0, t);
  rep.anchor_acceptable = accept_gap <= tol;
  if (!rep.anchor_acceptable) {
    rep.failure = "Z0 = X + rho_t(X) is not acceptable (translation "
                  "invariance violated by the source)";
    return rep;
  }

  Profile m0 = member_eval(kind, tree, z0, x, t);
  rep.equality_gap = max_abs_diff(m0, r);
  if (rep.equality_gap > tol) {
    rep.failure = "member at Z0 does not reproduce the source value";
    return rep;
  }

  // Randomized acceptable anchors must dominate the source nodewise.
  Rng rng(seed);
  rep.domination_margin = kInf;
  for (int k = 0; k < anchor_budget; ++k) {
    RandomVariable w =
        sample_payoff(rng, tree, -anchor_amplitude, anchor_amplitude);
    RandomVariable z = acceptable_anchor(source, tree, w, t);
    Profile m = member_eval(kind, tree, z, x, t);
    ++rep.anchors_tested;
    for (size_t i = 0; i < m.values.size(); ++i) {
      double margin = m.values[i] - r.values[i];
      if (margin < rep.domination_margin) rep.domination_margin = margin;
      if (margin < -tol && !rep.witness_anchor) {
        rep.witness_anchor = z;
        rep.witness_node = static_cast<int>(i);
      }
    }
  }
  if (rep.anchors_tested == 0) rep.domination_margin = 0.0;
  if (rep.witness_anchor) {
    rep.failure = "acceptable anchor fell below the source value";
    return rep;
  }
  rep.passed = true;
  return rep;
}

DualCheckReport dual_check(const ScenarioTree& tree, const RandomVariable& z,
                           const RandomVariable& x, int t, int vertex_cap,
                           std::uint64_t seed, int interior_samples,
                           double tol) {
  tree.require_level(t);
  check_payoff(tree, z);
  check_payoff(tree, x);
  if (vertex_cap < 1) throw InputError("vertex cap must be >= 1");

  Profile lhs = member_eval(MemberKind::monetary, tree, z, x, t);
  RandomVariable neg_x = negate(x);

  int nodes = tree.node_count(t);
  DualCheckReport rep;
  rep.nodes = nodes;
  std::vector<double> gaps(nodes, 0.0);
  std::vector<double> interior(nodes, -kInf);
  std::vector<double> cover(nodes, 1.0);
  std::vector<char> full(nodes, 1);

  parallel_for(nodes, [&](int n) {
    auto [b, e] = tree.leaf_range(t, n);
    int count = e - b;
    std::vector<int> leaves(count);
    std::iota(leaves.begin(), leaves.end(), b);
    bool exhaustive = count <= vertex_cap;
    if (!exhaustive) {
      Rng rng(seed ^ (0x9e3779b97f4a7c15ULL + n));
      for (int i = 0; i < vertex_cap; ++i) {
        std::uniform_int_distribution<int> pick(i, count - 1);
        std::swap(leaves[i], leaves[pick(rng)]);
      }
      leaves.resize(vertex_cap);
      cover[n] = static_cast<double>(vertex_cap) / count;
      full[n] = 0;
    }
    double best = -kInf;
    for (int leaf : leaves) {
      MeasureChange q = MeasureChange::vertex(tree, leaf);
      double val = cond_expect(tree, neg_x, t, &q).values[n] -
                   penalty(tree, z, q, t).values[n];
      best = std::max(best, val);
    }
    gaps[n] = lhs.values[n] - best;

    Rng rng(seed ^ (0xbf58476d1ce4e5b9ULL + n));
    double worst = -kInf;
    for (int i = 0; i < interior_samples; ++i) {
      MeasureChange q = sample_equivalent_change(rng, tree);
      double val = cond_expect(tree, neg_x, t, &q).values[n] -
                   penalty(tree, z, q, t).values[n];
      worst = std::max(worst, val - lhs.values[n]);
    }
    interior[n] = interior_samples > 0 ? worst : 0.0;
  });

  for (int n = 0; n < nodes; ++n) {
    double gap = full[n] ? std::abs(gaps[n]) : std::max(0.0, -gaps[n]);
    if (gap > rep.max_gap || rep.witness_node < 0) {
      rep.max_gap = gap;
      rep.witness_node = n;
      rep.witness_lhs = lhs.values[n];
      rep.witness_rhs = lhs.values[n] - gaps[n];
    }
    rep.interior_violation = std::max(rep.interior_violation, interior[n]);
    rep.exhaustive = rep.exhaustive && full[n];
    rep.coverage = std::min(rep.coverage, cover[n]);
  }
  rep.passed = rep.max_gap <= tol && rep.interior_violation <= tol;
  return rep;
}

SupFamilyResult sup_of_family(const std::vector<RiskMeasurePtr>& family,
                              const ScenarioTree& tree, const RandomVariable& x,
                              int t) {
  SupOfFamilyMeasure sup(family);
  RandomVariable zero;
  zero.leaf_values.assign(tree.leaf_count(), 0.0);
  return SupFamilyResult{sup.evaluate(tree, x, t), sup.evaluate(tree, zero, t)};
}

RiskMeasurePtr shift_measure(RiskMeasurePtr inner, RandomVariable z) {
  return std::make_shared<ShiftedMeasure>(std::move(inner), std::move(z));
}

}  // namespace riskenv
