#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/measures.hpp"

namespace riskenv {

// Acceptance-set construction behind an envelope member anchored at Z:
//   monetary: { Y : Y >= Z }
//   star:     { Y : Y >= a Z for some level-t a in [0, 1] }
//   cone:     { Y : Y >= a Z for some level-t a >= 0 }
enum class MemberKind { monetary, star, cone };

std::string member_kind_name(MemberKind k);
std::optional<MemberKind> member_kind_from_name(const std::string& s);

struct EnvelopeMemberSpec {
  MemberKind kind = MemberKind::monetary;
  RandomVariable anchor;
  int level = 0;
};

// Exact minimum of max_i (slopes[i] * a + intercepts[i]) over [lo, hi]
// (hi may be +infinity). Built from the upper envelope of the lines and
// evaluated at its breakpoints clipped to the interval.
struct PwlMin {
  bool bounded = true;
  double value = 0.0;
  double arg = 0.0;
};
PwlMin minimize_upper_envelope(const std::vector<double>& slopes,
                               const std::vector<double>& intercepts,
                               double lo, double hi);

// Risk profile of the member's acceptance set at the member's level.
Profile member_eval(MemberKind kind, const ScenarioTree& tree,
                    const RandomVariable& anchor, const RandomVariable& x,
                    int t);

// Nodewise minimum of member_eval over a family sharing the same level.
Profile lower_envelope(const ScenarioTree& tree,
                       const std::vector<EnvelopeMemberSpec>& members,
                       const RandomVariable& x, int t);

// Envelope member as a dynamic risk measure pinned to its level.
class AnchorMemberMeasure : public RiskMeasure {
 public:
  AnchorMemberMeasure(MemberKind kind, RandomVariable anchor, int level);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override;
  MemberKind kind() const { return kind_; }
  const RandomVariable& anchor() const { return anchor_; }
  int level() const { return level_; }

 private:
  MemberKind kind_;
  RandomVariable anchor_;
  int level_;
};

// Nodewise minimum of a family of measures (the envelope representation).
class LowerEnvelopeMeasure : public RiskMeasure {
 public:
  explicit LowerEnvelopeMeasure(std::vector<RiskMeasurePtr> members);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "lower_envelope"; }
  const std::vector<RiskMeasurePtr>& members() const { return members_; }

 private:
  std::vector<RiskMeasurePtr> members_;
};

// Penalty of scenario Q for the member anchored at Z: E_Q[-Z | F_t].
Profile penalty(const ScenarioTree& tree, const RandomVariable& anchor,
                const MeasureChange& q, int t);

// Projects W onto the boundary of rho's acceptance set: W + lift(rho_t(W)).
RandomVariable acceptable_anchor(const RiskMeasure& rho,
                                 const ScenarioTree& tree,
                                 const RandomVariable& w, int t);
// max_n rho_t(Z)(n); Z is acceptable at t when this is <= tol.
double acceptability_gap(const RiskMeasure& rho, const ScenarioTree& tree,
                         const RandomVariable& z, int t);

// Checks the attainment half of the envelope representation: the member
// anchored at Z0 = X + lift(rho_t(X)) reproduces rho_t(X), and randomized
// acceptable anchors dominate it.
struct AttainmentReport {
  bool passed = false;
  bool anchor_acceptable = false;
  double equality_gap = 0.0;       // max_n |member(Z0) - rho_t(X)|
  double domination_margin = 0.0;  // min over anchors/nodes of member - rho
  int anchors_tested = 0;
  std::string failure;             // empty when passed
  std::optional<RandomVariable> witness_anchor;
  int witness_node = -1;
};
AttainmentReport verify_attainment(const RiskMeasure& source, MemberKind kind,
                                   const ScenarioTree& tree,
                                   const RandomVariable& x, int t,
                                   int anchor_budget, std::uint64_t seed,
                                   double tol = kSoftTol,
                                   double anchor_amplitude = 1.0);

// Verifies the penalty duality for the monetary member: the subtree sup of
// Z - X equals the best vertex scenario's E_Q[-X|F_t] - E_Q[-Z|F_t], and
// interior scenarios never exceed it. Vertex enumeration is exhaustive up to
// `vertex_cap` paths per node, sampled (with reported coverage) beyond that.
struct DualCheckReport {
  bool passed = true;
  double max_gap = 0.0;
  double interior_violation = 0.0;
  int nodes = 0;
  bool exhaustive = true;
  double coverage = 1.0;
  int witness_node = -1;   // node with the largest gap
  double witness_lhs = 0.0;  // member value there
  double witness_rhs = 0.0;  // best vertex dual there
};
DualCheckReport dual_check(const ScenarioTree& tree, const RandomVariable& z,
                           const RandomVariable& x, int t,
                           int vertex_cap = 4096, std::uint64_t seed = 1,
                           int interior_samples = 4, double tol = kExactTol);

// Nodewise maximum of the family plus the finiteness gate sup_l rho_l(0).
struct SupFamilyResult {
  Profile value;
  Profile at_zero;
};
SupFamilyResult sup_of_family(const std::vector<RiskMeasurePtr>& family,
                              const ScenarioTree& tree, const RandomVariable& x,
                              int t);

// rho_Z(X) := rho(X + Z).
RiskMeasurePtr shift_measure(RiskMeasurePtr inner, RandomVariable z);

}  // namespace riskenv
