#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "riskenv/common.hpp"

namespace riskenv {

enum class TreeKind { binomial, explicit_tree };

// Input record for building an explicit tree. Node ids are (level, index)
// pairs; children are indices into the next level. The builder canonicalizes
// the indexing so that children of node i precede children of node i+1,
// which makes every subtree's leaves a contiguous range.
struct ExplicitNode {
  int level = 0;
  int index = 0;
  std::vector<int> children;
  std::vector<double> probs;
  double increment = 0.0;  // label of the edge from the parent, if any
};

// Finite filtered probability space: a non-recombining scenario tree with
// strictly positive transition probabilities. Binomial trees are stored
// implicitly (children, probabilities and increments are all computable from
// the node address), explicit trees keep per-node records.
class ScenarioTree {
 public:
  static constexpr int kDefaultLevelCap = 22;

  // Non-recombining binary tree with dt = horizon / levels, increments
  // +/- sqrt(dt) (slot 0 = down, slot 1 = up) and half-half probabilities.
  static ScenarioTree binomial(int levels, double horizon,
                               int level_cap = kDefaultLevelCap);

  // Builds a tree from explicit node records; validates and canonicalizes.
  // kind = binomial additionally checks the binomial shape and then switches
  // to the implicit representation.
  static ScenarioTree from_nodes(TreeKind kind, int levels, double dt,
                                 std::vector<ExplicitNode> nodes);

  TreeKind kind() const { return kind_; }
  bool is_binomial() const { return kind_ == TreeKind::binomial; }
  int levels() const { return levels_; }
  double dt() const { return dt_; }
  double sqrt_dt() const { return sqrt_dt_; }
  double time_at(int level) const { return level * dt_; }

  int node_count(int level) const;
  int leaf_count() const { return node_count(levels_); }
  int child_count(int level, int index) const;
  int child(int level, int index, int slot) const;
  double prob(int level, int index, int slot) const;
  // Increment written on the edge to the given child (binomial trees only;
  // explicit trees report the stored labels, 0 by default).
  double edge_increment(int level, int index, int slot) const;
  int parent(int level, int index) const;
  // Leaves under (level, index) as the contiguous range [begin, end).
  std::pair<int, int> leaf_range(int level, int index) const;
  // Sum of edge increments from the root (the discrete driver path value).
  double path_value(int level, int index) const;
  int ancestor(int level, int index, int at_level) const;
  // Unconditional reference probability of reaching the node.
  double node_prob(int level, int index) const;

  void require_level(int level) const;

 private:
  struct Node {
    std::vector<int> children;
    std::vector<double> probs;
    double increment = 0.0;
    int parent = -1;
    int leaf_begin = 0;
    int leaf_end = 0;
    double path = 0.0;
  };

  ScenarioTree() = default;
  const Node& node(int level, int index) const;

  TreeKind kind_ = TreeKind::binomial;
  int levels_ = 0;
  double dt_ = 0.0;
  double sqrt_dt_ = 0.0;
  std::vector<std::vector<Node>> nodes_;  // empty for implicit binomial trees
};

// Terminal payoff: one value per leaf.
struct RandomVariable {
  std::vector<double> leaf_values;
};

// Level-t risk profile: one value per node at a single level.
struct Profile {
  int level = 0;
  std::vector<double> values;
};

// Node-indexed process over all levels (BSDE solutions and the like).
struct AdaptedProcess {
  std::vector<std::vector<double>> levels;
};

void check_payoff(const ScenarioTree& tree, const RandomVariable& x);
void check_profile(const ScenarioTree& tree, const Profile& p);

// Node-wise alternative transition probabilities. Rows may contain zeros
// (Q << P); `equivalent` is true iff every entry is strictly positive.
class MeasureChange {
 public:
  // rows[level][index] must match the tree's child counts.
  MeasureChange(const ScenarioTree& tree,
                std::vector<std::vector<std::vector<double>>> rows);

  static MeasureChange reference(const ScenarioTree& tree);
  // Binomial trees: tilts the up/down probabilities to (1 +/- theta*sqrt(dt))/2,
  // the discrete drift change with kernel theta.
  static MeasureChange binomial_drift(const ScenarioTree& tree, double theta);
  // Point mass along the path to `leaf`; reference probabilities elsewhere.
  static MeasureChange vertex(const ScenarioTree& tree, int leaf);

  const std::vector<double>& row(int level, int index) const;
  double prob(int level, int index, int slot) const;
  bool equivalent() const { return equivalent_; }

 private:
  std::vector<std::vector<std::vector<double>>> rows_;
  bool equivalent_ = true;
};

// E_Q[X | F_t] by backward recursion; Q = nullptr means the reference measure.
Profile cond_expect(const ScenarioTree& tree, const RandomVariable& x, int t,
                    const MeasureChange* q = nullptr);

enum class Extremum { sup, inf };

// Conditional essential supremum/infimum: subtree max/min (the reference
// measure charges every path).
Profile cond_ess_extrema(const ScenarioTree& tree, const RandomVariable& x,
                         int t, Extremum which);
Profile cond_ess_sup(const ScenarioTree& tree, const RandomVariable& x, int t);
Profile cond_ess_inf(const ScenarioTree& tree, const RandomVariable& x, int t);

// Embeds a level-s profile into terminal payoffs: each leaf inherits the
// value of its level-s ancestor.
RandomVariable lift(const ScenarioTree& tree, const Profile& p);

// weights[leaf] = probability of the leaf conditional on its level-t
// ancestor, under Q (or the reference measure).
std::vector<double> conditional_leaf_weights(const ScenarioTree& tree, int t,
                                             const MeasureChange* q = nullptr);

// Root-level expectation (cond_expect at t = 0).
double expectation(const ScenarioTree& tree, const RandomVariable& x,
                   const MeasureChange* q = nullptr);

// Payoff functionals of the driver path (binomial trees only).
RandomVariable payoff_of_terminal_sum(const ScenarioTree& tree,
                                      double scale = 1.0, double offset = 0.0);
RandomVariable payoff_of_path_max(const ScenarioTree& tree, double scale = 1.0,
                                  double offset = 0.0);

// Small profile/payoff arithmetic used throughout.
RandomVariable add(const RandomVariable& a, const RandomVariable& b);
RandomVariable subtract(const RandomVariable& a, const RandomVariable& b);
RandomVariable scale(const RandomVariable& a, double c);
RandomVariable negate(const RandomVariable& a);
Profile negate(const Profile& p);
double max_abs_diff(const Profile& a, const Profile& b);
double max_value(const Profile& p);
double min_value(const Profile& p);

// Leafwise alpha * X with a level-t profile alpha (alpha is lifted first).
RandomVariable scale_by_profile(const ScenarioTree& tree, const Profile& alpha,
                                const RandomVariable& x);

}  // namespace riskenv
