#include "riskenv/sampling.hpp"

namespace riskenv {

RandomVariable sample_payoff(Rng& rng, const ScenarioTree& tree, double lo,
                             double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  RandomVariable x;
  x.leaf_values.resize(tree.leaf_count());
  for (double& v : x.leaf_values) v = u(rng);
  return x;
}

Profile sample_profile(Rng& rng, const ScenarioTree& tree, int t, double lo,
                       double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Profile p;
  p.level = t;
  p.values.resize(tree.node_count(t));
  for (double& v : p.values) v = u(rng);
  return p;
}

MeasureChange sample_equivalent_change(Rng& rng, const ScenarioTree& tree,
                                       double floor) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<std::vector<std::vector<double>>> rows(tree.levels());
  for (int l = 0; l < tree.levels(); ++l) {
    rows[l].resize(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      int k = tree.child_count(l, i);
      auto& row = rows[l][i];
      row.resize(k);
      double sum = 0.0;
      for (double& p : row) {
        p = u(rng);
        sum += p;
      }
      for (double& p : row) p /= sum;
    }
  }
  return MeasureChange(tree, std::move(rows));
}

}  // namespace riskenv
