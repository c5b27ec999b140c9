#include "riskenv/tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>

namespace riskenv {

namespace {

constexpr double kRowSumTol = 1e-12;

int popcount_int(int v) { return std::popcount(static_cast<unsigned>(v)); }

}  // namespace

ScenarioTree ScenarioTree::binomial(int levels, double horizon, int level_cap) {
  if (levels < 1) throw InputError("binomial tree needs at least one level");
  if (!(horizon > 0.0)) throw InputError("horizon must be positive");
  if (levels > level_cap)
    throw InputError("binomial tree of " + std::to_string(levels) +
                     " levels exceeds the cap of " + std::to_string(level_cap));
  ScenarioTree t;
  t.kind_ = TreeKind::binomial;
  t.levels_ = levels;
  t.dt_ = horizon / levels;
  t.sqrt_dt_ = std::sqrt(t.dt_);
  return t;
}

ScenarioTree ScenarioTree::from_nodes(TreeKind kind, int levels, double dt,
                                      std::vector<ExplicitNode> input) {
  if (levels < 1) throw InputError("tree needs at least one level");
  if (!(dt > 0.0)) throw InputError("dt must be positive");

  // Group by (level, index) and check coverage.
  std::vector<int> counts(levels + 1, 0);
  for (const auto& n : input) {
    if (n.level < 0 || n.level > levels)
      throw InputError("node level out of range");
    counts[n.level] = std::max(counts[n.level], n.index + 1);
  }
  if (counts[0] != 1) throw InputError("tree must have exactly one root");
  std::vector<std::vector<const ExplicitNode*>> by_level(levels + 1);
  for (int l = 0; l <= levels; ++l) by_level[l].assign(counts[l], nullptr);
  for (const auto& n : input) {
    if (n.index < 0) throw InputError("negative node index");
    if (by_level[n.level][n.index] != nullptr)
      throw InputError("duplicate node id (" + std::to_string(n.level) + "," +
                       std::to_string(n.index) + ")");
    by_level[n.level][n.index] = &n;
  }
  for (int l = 0; l <= levels; ++l)
    for (int i = 0; i < counts[l]; ++i)
      if (by_level[l][i] == nullptr)
        throw InputError("missing node (" + std::to_string(l) + "," +
                         std::to_string(i) + ")");

  // Validate rows and parent uniqueness level by level.
  for (int l = 0; l <= levels; ++l) {
    std::vector<int> parent_seen(l < levels ? counts[l + 1] : 0, 0);
    for (int i = 0; i < counts[l]; ++i) {
      const ExplicitNode& n = *by_level[l][i];
      if (l == levels) {
        if (!n.children.empty())
          throw InputError("leaf node has children below the last level");
        continue;
      }
      if (n.children.empty())
        throw InputError("non-leaf node (" + std::to_string(l) + "," +
                         std::to_string(i) + ") has no children");
      if (n.children.size() != n.probs.size())
        throw InputError("children/probs size mismatch");
      double sum = 0.0;
      for (size_t j = 0; j < n.children.size(); ++j) {
        int c = n.children[j];
        if (c < 0 || c >= counts[l + 1])
          throw InputError("child index out of range");
        if (parent_seen[c]++)
          throw InputError("node has more than one parent");
        if (!(n.probs[j] > 0.0))
          throw InputError("transition probabilities must be strictly positive");
        sum += n.probs[j];
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw InputError("transition probabilities must sum to 1");
    }
    if (l < levels)
      for (int c = 0; c < counts[l + 1]; ++c)
        if (!parent_seen[c]) throw InputError("orphan node in level " +
                                              std::to_string(l + 1));
  }

  // Canonical re-indexing: children of node i precede children of node i+1.
  // old_to_new[l][old] = new index.
  std::vector<std::vector<int>> old_to_new(levels + 1);
  std::vector<std::vector<int>> new_to_old(levels + 1);
  old_to_new[0] = {0};
  new_to_old[0] = {0};
  for (int l = 0; l < levels; ++l) {
    old_to_new[l + 1].assign(counts[l + 1], -1);
    new_to_old[l + 1].reserve(counts[l + 1]);
    for (int ni = 0; ni < counts[l]; ++ni) {
      const ExplicitNode& n = *by_level[l][new_to_old[l][ni]];
      std::vector<size_t> order(n.children.size());
      std::iota(order.begin(), order.end(), size_t{0});
      if (kind == TreeKind::binomial) {
        // Canonical slot order: down (negative increment) first.
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
          return by_level[l + 1][n.children[a]]->increment <
                 by_level[l + 1][n.children[b]]->increment;
        });
      }
      for (size_t j : order) {
        int c = n.children[j];
        old_to_new[l + 1][c] = static_cast<int>(new_to_old[l + 1].size());
        new_to_old[l + 1].push_back(c);
      }
    }
  }

  ScenarioTree t;
  t.kind_ = TreeKind::explicit_tree;
  t.levels_ = levels;
  t.dt_ = dt;
  t.sqrt_dt_ = std::sqrt(dt);
  t.nodes_.resize(levels + 1);
  for (int l = 0; l <= levels; ++l) {
    t.nodes_[l].resize(counts[l]);
    for (int i = 0; i < counts[l]; ++i) {
      const ExplicitNode& src = *by_level[l][new_to_old[l][i]];
      Node& dst = t.nodes_[l][i];
      dst.increment = src.increment;
      if (l < levels) {
        std::vector<size_t> order(src.children.size());
        std::iota(order.begin(), order.end(), size_t{0});
        if (kind == TreeKind::binomial) {
          std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return by_level[l + 1][src.children[a]]->increment <
                   by_level[l + 1][src.children[b]]->increment;
          });
        }
        for (size_t j : order) {
          dst.children.push_back(old_to_new[l + 1][src.children[j]]);
          dst.probs.push_back(src.probs[j]);
        }
      }
    }
  }
  // Parents, path values and leaf ranges.
  t.nodes_[0][0].path = 0.0;
  for (int l = 0; l < levels; ++l)
    for (int i = 0; i < counts[l]; ++i)
      for (int c : t.nodes_[l][i].children) {
        t.nodes_[l + 1][c].parent = i;
        t.nodes_[l + 1][c].path =
            t.nodes_[l][i].path + t.nodes_[l + 1][c].increment;
      }
  for (int i = 0; i < counts[levels]; ++i) {
    t.nodes_[levels][i].leaf_begin = i;
    t.nodes_[levels][i].leaf_end = i + 1;
  }
  for (int l = levels - 1; l >= 0; --l)
    for (int i = 0; i < counts[l]; ++i) {
      Node& n = t.nodes_[l][i];
      n.leaf_begin = t.nodes_[l + 1][n.children.front()].leaf_begin;
      n.leaf_end = t.nodes_[l + 1][n.children.back()].leaf_end;
    }

  if (kind == TreeKind::binomial) {
    // Check the binomial shape, then drop the storage.
    const double sd = t.sqrt_dt_;
    for (int l = 0; l < levels; ++l)
      for (int i = 0; i < counts[l]; ++i) {
        const Node& n = t.nodes_[l][i];
        if (n.children.size() != 2)
          throw InputError("binomial node must have exactly two children");
        for (int j = 0; j < 2; ++j) {
          if (std::abs(n.probs[j] - 0.5) > kRowSumTol)
            throw InputError("binomial probabilities must be 1/2");
          double want = (j == 0 ? -sd : sd);
          if (std::abs(t.nodes_[l + 1][n.children[j]].increment - want) > 1e-9)
            throw InputError("binomial increments must be +/- sqrt(dt)");
        }
      }
    ScenarioTree b;
    b.kind_ = TreeKind::binomial;
    b.levels_ = levels;
    b.dt_ = dt;
    b.sqrt_dt_ = t.sqrt_dt_;
    return b;
  }
  return t;
}

const ScenarioTree::Node& ScenarioTree::node(int level, int index) const {
  return nodes_[level][index];
}

int ScenarioTree::node_count(int level) const {
  require_level(level);
  if (is_binomial()) return 1 << level;
  return static_cast<int>(nodes_[level].size());
}

int ScenarioTree::child_count(int level, int index) const {
  if (level >= levels_) return 0;
  if (is_binomial()) return 2;
  return static_cast<int>(node(level, index).children.size());
}

int ScenarioTree::child(int level, int index, int slot) const {
  if (is_binomial()) return 2 * index + slot;
  return node(level, index).children[slot];
}

double ScenarioTree::prob(int level, int index, int slot) const {
  if (is_binomial()) return 0.5;
  return node(level, index).probs[slot];
}

double ScenarioTree::edge_increment(int level, int index, int slot) const {
  if (is_binomial()) return slot == 0 ? -sqrt_dt_ : sqrt_dt_;
  return nodes_[level + 1][node(level, index).children[slot]].increment;
}

int ScenarioTree::parent(int level, int index) const {
  if (level == 0) return -1;
  if (is_binomial()) return index >> 1;
  return node(level, index).parent;
}

std::pair<int, int> ScenarioTree::leaf_range(int level, int index) const {
  if (is_binomial()) {
    int width = 1 << (levels_ - level);
    return {index * width, (index + 1) * width};
  }
  const Node& n = node(level, index);
  return {n.leaf_begin, n.leaf_end};
}

double ScenarioTree::path_value(int level, int index) const {
  if (is_binomial())
    return sqrt_dt_ * (2 * popcount_int(index) - level);
  return node(level, index).path;
}

int ScenarioTree::ancestor(int level, int index, int at_level) const {
  if (at_level > level) throw InputError("ancestor level above the node");
  if (is_binomial()) return index >> (level - at_level);
  int i = index;
  for (int l = level; l > at_level; --l) i = nodes_[l][i].parent;
  return i;
}

double ScenarioTree::node_prob(int level, int index) const {
  double p = 1.0;
  int i = index;
  for (int l = level; l > 0; --l) {
    int par = parent(l, i);
    if (is_binomial()) {
      p *= 0.5;
    } else {
      const Node& pn = nodes_[l - 1][par];
      for (size_t s = 0; s < pn.children.size(); ++s)
        if (pn.children[s] == i) {
          p *= pn.probs[s];
          break;
        }
    }
    i = par;
  }
  return p;
}

void ScenarioTree::require_level(int level) const {
  if (level < 0 || level > levels_)
    throw InputError("level " + std::to_string(level) +
                     " out of range [0, " + std::to_string(levels_) + "]");
}

void check_payoff(const ScenarioTree& tree, const RandomVariable& x) {
  if (static_cast<int>(x.leaf_values.size()) != tree.leaf_count())
    throw InputError("payoff has " + std::to_string(x.leaf_values.size()) +
                     " values, tree has " + std::to_string(tree.leaf_count()) +
                     " leaves");
  for (double v : x.leaf_values)
    if (!std::isfinite(v)) throw InputError("payoff value is not finite");
}

void check_profile(const ScenarioTree& tree, const Profile& p) {
  tree.require_level(p.level);
  if (static_cast<int>(p.values.size()) != tree.node_count(p.level))
    throw InputError("profile size does not match the level node count");
  for (double v : p.values)
    if (!std::isfinite(v)) throw InputError("profile value is not finite");
}

MeasureChange::MeasureChange(
    const ScenarioTree& tree,
    std::vector<std::vector<std::vector<double>>> rows)
    : rows_(std::move(rows)) {
  if (static_cast<int>(rows_.size()) != tree.levels())
    throw InputError("measure change must provide rows for levels 0..N-1");
  equivalent_ = true;
  for (int l = 0; l < tree.levels(); ++l) {
    if (static_cast<int>(rows_[l].size()) != tree.node_count(l))
      throw InputError("measure change rows do not match the level size");
    for (int i = 0; i < tree.node_count(l); ++i) {
      const auto& row = rows_[l][i];
      if (static_cast<int>(row.size()) != tree.child_count(l, i))
        throw InputError("measure change row does not match the child count");
      double sum = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw InputError("measure change probability < 0");
        if (!(p > 0.0)) equivalent_ = false;
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTol)
        throw InputError("measure change row must sum to 1");
    }
  }
}

MeasureChange MeasureChange::reference(const ScenarioTree& tree) {
  std::vector<std::vector<std::vector<double>>> rows(tree.levels());
  for (int l = 0; l < tree.levels(); ++l) {
    rows[l].resize(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      int k = tree.child_count(l, i);
      rows[l][i].resize(k);
      for (int s = 0; s < k; ++s) rows[l][i][s] = tree.prob(l, i, s);
    }
  }
  return MeasureChange(tree, std::move(rows));
}

MeasureChange MeasureChange::binomial_drift(const ScenarioTree& tree,
                                            double theta) {
  if (!tree.is_binomial())
    throw InputError("binomial_drift requires a binomial tree");
  double shift = theta * tree.sqrt_dt();
  if (std::abs(shift) > 1.0)
    throw InputError("|theta| * sqrt(dt) must be <= 1");
  double up = 0.5 * (1.0 + shift);
  double down = 0.5 * (1.0 - shift);
  std::vector<std::vector<std::vector<double>>> rows(tree.levels());
  for (int l = 0; l < tree.levels(); ++l)
    rows[l].assign(tree.node_count(l), {down, up});
  return MeasureChange(tree, std::move(rows));
}

MeasureChange MeasureChange::vertex(const ScenarioTree& tree, int leaf) {
  if (leaf < 0 || leaf >= tree.leaf_count())
    throw InputError("vertex leaf out of range");
  auto rows = reference(tree).rows_;
  int idx = leaf;
  for (int l = tree.levels(); l > 0; --l) {
    int par = tree.parent(l, idx);
    auto& row = rows[l - 1][par];
    std::fill(row.begin(), row.end(), 0.0);
    for (int s = 0; s < tree.child_count(l - 1, par); ++s)
      if (tree.child(l - 1, par, s) == idx) row[s] = 1.0;
    idx = par;
  }
  return MeasureChange(tree, std::move(rows));
}

const std::vector<double>& MeasureChange::row(int level, int index) const {
  return rows_[level][index];
}

double MeasureChange::prob(int level, int index, int slot) const {
  return rows_[level][index][slot];
}

Profile cond_expect(const ScenarioTree& tree, const RandomVariable& x, int t,
                    const MeasureChange* q) {
  tree.require_level(t);
  check_payoff(tree, x);
  std::vector<double> cur = x.leaf_values;
  for (int l = tree.levels() - 1; l >= t; --l) {
    std::vector<double> next(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      double v = 0.0;
      for (int s = 0; s < tree.child_count(l, i); ++s) {
        double p = q ? q->prob(l, i, s) : tree.prob(l, i, s);
        v += p * cur[tree.child(l, i, s)];
      }
      next[i] = v;
    }
    cur = std::move(next);
  }
  return Profile{t, std::move(cur)};
}

Profile cond_ess_extrema(const ScenarioTree& tree, const RandomVariable& x,
                         int t, Extremum which) {
  tree.require_level(t);
  check_payoff(tree, x);
  std::vector<double> cur = x.leaf_values;
  for (int l = tree.levels() - 1; l >= t; --l) {
    std::vector<double> next(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      double v = cur[tree.child(l, i, 0)];
      for (int s = 1; s < tree.child_count(l, i); ++s) {
        double c = cur[tree.child(l, i, s)];
        v = which == Extremum::sup ? std::max(v, c) : std::min(v, c);
      }
      next[i] = v;
    }
    cur = std::move(next);
  }
  return Profile{t, std::move(cur)};
}

Profile cond_ess_sup(const ScenarioTree& tree, const RandomVariable& x, int t) {
  return cond_ess_extrema(tree, x, t, Extremum::sup);
}

Profile cond_ess_inf(const ScenarioTree& tree, const RandomVariable& x, int t) {
  return cond_ess_extrema(tree, x, t, Extremum::inf);
}

RandomVariable lift(const ScenarioTree& tree, const Profile& p) {
  check_profile(tree, p);
  RandomVariable out;
  out.leaf_values.resize(tree.leaf_count());
  for (int i = 0; i < tree.node_count(p.level); ++i) {
    auto [b, e] = tree.leaf_range(p.level, i);
    for (int leaf = b; leaf < e; ++leaf) out.leaf_values[leaf] = p.values[i];
  }
  return out;
}

std::vector<double> conditional_leaf_weights(const ScenarioTree& tree, int t,
                                             const MeasureChange* q) {
  tree.require_level(t);
  std::vector<double> cur(tree.node_count(t), 1.0);
  for (int l = t; l < tree.levels(); ++l) {
    std::vector<double> next(tree.node_count(l + 1), 0.0);
    for (int i = 0; i < tree.node_count(l); ++i)
      for (int s = 0; s < tree.child_count(l, i); ++s) {
        double p = q ? q->prob(l, i, s) : tree.prob(l, i, s);
        next[tree.child(l, i, s)] = cur[i] * p;
      }
    cur = std::move(next);
  }
  return cur;
}

double expectation(const ScenarioTree& tree, const RandomVariable& x,
                   const MeasureChange* q) {
  return cond_expect(tree, x, 0, q).values[0];
}

RandomVariable payoff_of_terminal_sum(const ScenarioTree& tree, double scale,
                                      double offset) {
  if (!tree.is_binomial())
    throw InputError("of_terminal_sum needs a binomial tree");
  RandomVariable out;
  out.leaf_values.resize(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i)
    out.leaf_values[i] = scale * tree.path_value(tree.levels(), i) + offset;
  return out;
}

RandomVariable payoff_of_path_max(const ScenarioTree& tree, double scale,
                                  double offset) {
  if (!tree.is_binomial())
    throw InputError("of_path_max needs a binomial tree");
  RandomVariable out;
  out.leaf_values.resize(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i) {
    double best = 0.0;  // path value at the root
    int idx = i;
    for (int l = tree.levels(); l >= 0; --l) {
      best = std::max(best, tree.path_value(l, idx));
      if (l > 0) idx = tree.parent(l, idx);
    }
    out.leaf_values[i] = scale * best + offset;
  }
  return out;
}

RandomVariable add(const RandomVariable& a, const RandomVariable& b) {
  if (a.leaf_values.size() != b.leaf_values.size())
    throw InputError("payoff size mismatch");
  RandomVariable out = a;
  for (size_t i = 0; i < out.leaf_values.size(); ++i)
    out.leaf_values[i] += b.leaf_values[i];
  return out;
}

RandomVariable subtract(const RandomVariable& a, const RandomVariable& b) {
  return add(a, negate(b));
}

RandomVariable scale(const RandomVariable& a, double c) {
  RandomVariable out = a;
  for (double& v : out.leaf_values) v *= c;
  return out;
}

RandomVariable negate(const RandomVariable& a) { return scale(a, -1.0); }

Profile negate(const Profile& p) {
  Profile out = p;
  for (double& v : out.values) v = -v + 0.0;  // avoid negative zeros in reports
  return out;
}

double max_abs_diff(const Profile& a, const Profile& b) {
  if (a.level != b.level || a.values.size() != b.values.size())
    throw InputError("profile shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

double max_value(const Profile& p) {
  return *std::max_element(p.values.begin(), p.values.end());
}

double min_value(const Profile& p) {
  return *std::min_element(p.values.begin(), p.values.end());
}

RandomVariable scale_by_profile(const ScenarioTree& tree, const Profile& alpha,
                                const RandomVariable& x) {
  RandomVariable a = lift(tree, alpha);
  check_payoff(tree, x);
  for (size_t i = 0; i < a.leaf_values.size(); ++i)
    a.leaf_values[i] *= x.leaf_values[i];
  return a;
}

}  // namespace riskenv
