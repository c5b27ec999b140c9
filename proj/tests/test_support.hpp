#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "riskenv/sampling.hpp"
#include "riskenv/tree.hpp"

namespace riskenv::testing {

// Random explicit tree: 2-3 children per node, probabilities bounded away
// from zero.
inline ScenarioTree random_explicit_tree(Rng& rng, int max_levels,
                                         int max_branch = 3) {
  std::uniform_int_distribution<int> levels_dist(1, max_levels);
  std::uniform_int_distribution<int> branch_dist(2, max_branch);
  std::uniform_real_distribution<double> weight(0.2, 1.0);
  int levels = levels_dist(rng);

  std::vector<ExplicitNode> nodes;
  std::vector<int> level_count(levels + 1, 0);
  level_count[0] = 1;
  nodes.push_back(ExplicitNode{0, 0, {}, {}, 0.0});
  for (int l = 0; l < levels; ++l) {
    int next_count = 0;
    for (auto& n : nodes) {
      if (n.level != l) continue;
      int k = branch_dist(rng);
      std::vector<double> w(k);
      double sum = 0.0;
      for (double& x : w) {
        x = weight(rng);
        sum += x;
      }
      for (int c = 0; c < k; ++c) {
        n.children.push_back(next_count + c);
        n.probs.push_back(w[c] / sum);
      }
      next_count += k;
    }
    for (int i = 0; i < next_count; ++i)
      nodes.push_back(ExplicitNode{l + 1, i, {}, {}, 0.0});
    level_count[l + 1] = next_count;
  }
  return ScenarioTree::from_nodes(TreeKind::explicit_tree, levels, 1.0 / levels,
                                  std::move(nodes));
}

// Transition probability of the edge into (level, index).
inline double edge_prob(const ScenarioTree& tree, int level, int index,
                        const MeasureChange* q) {
  int par = tree.parent(level, index);
  for (int s = 0; s < tree.child_count(level - 1, par); ++s)
    if (tree.child(level - 1, par, s) == index)
      return q ? q->prob(level - 1, par, s) : tree.prob(level - 1, par, s);
  return 0.0;
}

// Independent conditional-expectation oracle: per-leaf path products walked
// upward from each leaf, grouped by the level-t ancestor.
inline Profile oracle_cond_expect(const ScenarioTree& tree,
                                  const RandomVariable& x, int t,
                                  const MeasureChange* q = nullptr) {
  Profile out;
  out.level = t;
  out.values.assign(tree.node_count(t), 0.0);
  for (int leaf = 0; leaf < tree.leaf_count(); ++leaf) {
    double w = 1.0;
    int idx = leaf;
    for (int l = tree.levels(); l > t; --l) {
      w *= edge_prob(tree, l, idx, q);
      idx = tree.parent(l, idx);
    }
    out.values[idx] += w * x.leaf_values[leaf];
  }
  return out;
}

// Quantile oracle straight from the definition: evaluates Q[X < c | n] at
// every candidate atom value and takes the largest c that keeps it <= lambda.
inline double oracle_var_at_node(const ScenarioTree& tree,
                                 const RandomVariable& x, int t, int node,
                                 double lambda,
                                 const MeasureChange* q = nullptr) {
  std::vector<double> w = conditional_leaf_weights(tree, t, q);
  auto [b, e] = tree.leaf_range(t, node);
  std::vector<double> candidates(x.leaf_values.begin() + b,
                                 x.leaf_values.begin() + e);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());
  double best = candidates.front();
  for (double c : candidates) {
    double mass = 0.0;
    for (int leaf = b; leaf < e; ++leaf)
      if (x.leaf_values[leaf] < c) mass += w[leaf];
    if (mass <= lambda) best = std::max(best, c);
  }
  return -best;
}

// Grid oracle for the star/cone member minimization.
inline double grid_min_member(const ScenarioTree& tree,
                              const RandomVariable& anchor,
                              const RandomVariable& x, int t, int node,
                              double alpha_max, double step = 1e-4) {
  auto [b, e] = tree.leaf_range(t, node);
  double best = std::numeric_limits<double>::infinity();
  for (double a = 0.0; a <= alpha_max + 1e-15; a += step) {
    double phi = -std::numeric_limits<double>::infinity();
    for (int leaf = b; leaf < e; ++leaf)
      phi = std::max(phi, a * anchor.leaf_values[leaf] - x.leaf_values[leaf]);
    best = std::min(best, phi);
  }
  return best;
}

}  // namespace riskenv::testing
