#include "riskenv/bsde.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace riskenv {

namespace {

double slope_sample(const Generator& gen, double time, double z) {
  double h = 1e-6 * std::max(1.0, std::abs(z));
  return (gen(time, z + h) - gen(time, z - h)) / (2.0 * h);
}

void require_binomial(const ScenarioTree& tree) {
  if (!tree.is_binomial())
    throw InputError("this operation needs a binomial tree");
}

}  // namespace

BsdeSolution solve_bsde(const ScenarioTree& tree, const Generator& gen,
                        const RandomVariable& terminal) {
  require_binomial(tree);
  check_payoff(tree, terminal);

  const int n = tree.levels();
  const double dt = tree.dt();
  const double sd = tree.sqrt_dt();

  BsdeSolution sol;
  sol.y.levels.resize(n + 1);
  sol.z.levels.resize(n);
  sol.y.levels[n] = terminal.leaf_values;

  double max_slope = 0.0;
  for (int l = n - 1; l >= 0; --l) {
    const auto& next = sol.y.levels[l + 1];
    auto& y = sol.y.levels[l];
    auto& z = sol.z.levels[l];
    y.resize(tree.node_count(l));
    z.resize(tree.node_count(l));
    double time = tree.time_at(l);
    for (int i = 0; i < tree.node_count(l); ++i) {
      double y_down = next[2 * i];
      double y_up = next[2 * i + 1];
      double zi = (y_up - y_down) / (2.0 * sd);
      z[i] = zi;
      y[i] = 0.5 * (y_up + y_down) + gen(time, zi) * dt;
      if (!std::isfinite(y[i]))
        throw NumericError("backward recursion left the finite range");
      max_slope = std::max(max_slope, std::abs(slope_sample(gen, time, zi)));
    }
  }
  sol.slope_margin = 1.0 - sd * max_slope;
  sol.comparison_verified = sd * max_slope * 1.1 < 1.0;
  return sol;
}

Profile g_risk(const ScenarioTree& tree, const Generator& gen,
               const RandomVariable& xi, int t) {
  tree.require_level(t);
  BsdeSolution sol = solve_bsde(tree, gen, negate(xi));
  return Profile{t, std::move(sol.y.levels[t])};
}

GExpectationMeasure::GExpectationMeasure(Generator gen) : gen_(std::move(gen)) {}

Profile GExpectationMeasure::evaluate(const ScenarioTree& tree,
                                      const RandomVariable& x, int t) const {
  return g_risk(tree, gen_, x, t);
}

Profile maxmin_dp(const ScenarioTree& tree, double kappa,
                  const RandomVariable& xi, int t, MaxminMode mode) {
  require_binomial(tree);
  tree.require_level(t);
  check_payoff(tree, xi);
  if (!(kappa >= 0.0)) throw InputError("kappa must be >= 0");
  const double sd = tree.sqrt_dt();
  if (kappa * sd > 1.0)
    throw InputError("kappa sqrt(dt) must be <= 1 to keep the tilted "
                     "probabilities in [0, 1]");

  double sign = mode == MaxminMode::sup ? 1.0 : -1.0;
  std::vector<double> cur = xi.leaf_values;
  for (int l = tree.levels() - 1; l >= t; --l) {
    std::vector<double> next(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      double v_down = cur[2 * i];
      double v_up = cur[2 * i + 1];
      next[i] = 0.5 * (v_up + v_down) +
                sign * kappa * std::abs(v_up - v_down) * sd * 0.5;
    }
    cur = std::move(next);
  }
  return Profile{t, std::move(cur)};
}

Profile maxmin_alpha(const ScenarioTree& tree, double kappa, double alpha,
                     const RandomVariable& xi, int t) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InputError("alpha must lie in [0, 1]");
  Profile hi = maxmin_dp(tree, kappa, xi, t, MaxminMode::sup);
  Profile lo = maxmin_dp(tree, kappa, xi, t, MaxminMode::inf);
  for (size_t i = 0; i < hi.values.size(); ++i)
    hi.values[i] = alpha * hi.values[i] + (1.0 - alpha) * lo.values[i];
  return hi;
}

AlphaMaxminMeasure::AlphaMaxminMeasure(double kappa, double alpha)
    : kappa_(kappa), alpha_(alpha) {
  if (!(kappa > 0.0)) throw InputError("alpha_maxmin needs kappa > 0");
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw InputError("alpha must lie in [0, 1]");
}

Profile AlphaMaxminMeasure::evaluate(const ScenarioTree& tree,
                                     const RandomVariable& x, int t) const {
  return maxmin_alpha(tree, kappa_, alpha_, negate(x), t);
}

EntropicRoutes entropic_bsde(const ScenarioTree& tree, double gamma,
                             const Generator& base, const RandomVariable& xi,
                             int t) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  if (!base.flags().positively_homogeneous || !base.flags().normalized)
    throw InputError("entropic routes need a positively homogeneous "
                     "normalized base generator");
  tree.require_level(t);
  check_payoff(tree, xi);

  Generator driver = Generator::quadratic_entropic(gamma, base);
  BsdeSolution direct = solve_bsde(tree, driver, negate(xi));

  // Oracle route on the scaled terminal: positive homogeneity of the base
  // lets the max shift factor out of the recursion.
  double shift = -gamma * xi.leaf_values[0];
  for (double v : xi.leaf_values) shift = std::max(shift, -gamma * v);
  RandomVariable scaled;
  scaled.leaf_values.resize(xi.leaf_values.size());
  for (size_t i = 0; i < scaled.leaf_values.size(); ++i)
    scaled.leaf_values[i] = std::exp(-gamma * xi.leaf_values[i] - shift);
  BsdeSolution inner = solve_bsde(tree, base, scaled);

  EntropicRoutes out;
  out.direct = Profile{t, direct.y.levels[t]};
  out.oracle.level = t;
  out.oracle.values.resize(tree.node_count(t));
  for (int i = 0; i < tree.node_count(t); ++i) {
    double v = inner.y.levels[t][i];
    if (!(v > 0.0))
      throw NumericError("oracle route lost positivity; refine dt");
    out.oracle.values[i] = (std::log(v) + shift) / gamma;
  }
  out.max_gap = max_abs_diff(out.direct, out.oracle);
  out.slope_margin = direct.slope_margin;
  return out;
}

Profile relative_entropy(const ScenarioTree& tree, const MeasureChange& r,
                         const MeasureChange& q, int t) {
  tree.require_level(t);
  std::vector<double> cur(tree.leaf_count(), 0.0);
  for (int l = tree.levels() - 1; l >= t; --l) {
    std::vector<double> next(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      double acc = 0.0;
      for (int s = 0; s < tree.child_count(l, i); ++s) {
        double rp = r.prob(l, i, s);
        double qp = q.prob(l, i, s);
        if (rp > 0.0) {
          if (!(qp > 0.0))
            throw InputError("relative entropy needs R absolutely "
                             "continuous w.r.t. Q");
          acc += rp * (std::log(rp / qp) + cur[tree.child(l, i, s)]);
        }
      }
      next[i] = acc;
    }
    cur = std::move(next);
  }
  return Profile{t, std::move(cur)};
}

MeasureChange entropic_maximizer(const ScenarioTree& tree, double gamma,
                                 const RandomVariable& xi,
                                 const MeasureChange& q) {
  if (!(gamma > 0.0)) throw InputError("gamma must be positive");
  check_payoff(tree, xi);

  // Backward pass of E_Q[exp(-gamma xi - shift) | node].
  double shift = -gamma * xi.leaf_values[0];
  for (double v : xi.leaf_values) shift = std::max(shift, -gamma * v);
  std::vector<std::vector<double>> inner(tree.levels() + 1);
  inner[tree.levels()].resize(tree.leaf_count());
  for (int i = 0; i < tree.leaf_count(); ++i)
    inner[tree.levels()][i] =
        std::exp(-gamma * xi.leaf_values[i] - shift);
  for (int l = tree.levels() - 1; l >= 0; --l) {
    inner[l].resize(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      double acc = 0.0;
      for (int s = 0; s < tree.child_count(l, i); ++s)
        acc += q.prob(l, i, s) * inner[l + 1][tree.child(l, i, s)];
      inner[l][i] = acc;
    }
  }

  std::vector<std::vector<std::vector<double>>> rows(tree.levels());
  for (int l = 0; l < tree.levels(); ++l) {
    rows[l].resize(tree.node_count(l));
    for (int i = 0; i < tree.node_count(l); ++i) {
      int k = tree.child_count(l, i);
      auto& row = rows[l][i];
      row.resize(k);
      double denom = inner[l][i];
      double sum = 0.0;
      for (int s = 0; s < k; ++s) {
        row[s] = q.prob(l, i, s) * inner[l + 1][tree.child(l, i, s)] / denom;
        sum += row[s];
      }
      // guard the row against accumulated round-off
      for (int s = 0; s < k; ++s) row[s] /= sum;
    }
  }
  return MeasureChange(tree, std::move(rows));
}

double solve_bsde_markov_root(int levels, double dt, const Generator& gen,
                              const std::function<double(double)>& terminal) {
  if (levels < 1) throw InputError("markov solver needs at least one level");
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  const double sd = std::sqrt(dt);
  // lattice state k at level l: path sum (2k - l) sqrt(dt)
  std::vector<double> cur(levels + 1);
  for (int k = 0; k <= levels; ++k)
    cur[k] = terminal(sd * (2.0 * k - levels));
  for (int l = levels - 1; l >= 0; --l) {
    double time = l * dt;
    std::vector<double> next(l + 1);
    for (int k = 0; k <= l; ++k) {
      double y_down = cur[k];
      double y_up = cur[k + 1];
      double z = (y_up - y_down) / (2.0 * sd);
      next[k] = 0.5 * (y_up + y_down) + gen(time, z) * dt;
      if (!std::isfinite(next[k]))
        throw NumericError("backward recursion left the finite range");
    }
    cur = std::move(next);
  }
  return cur[0];
}

namespace {

double markov_entropic_direct(int levels, double dt, double gamma,
                              const Generator& base,
                              const std::function<double(double)>& xi) {
  Generator driver = Generator::quadratic_entropic(gamma, base);
  return solve_bsde_markov_root(levels, dt, driver,
                                [&](double b) { return -xi(b); });
}

double markov_entropic_oracle(int levels, double dt, double gamma,
                              const Generator& base,
                              const std::function<double(double)>& xi) {
  const double sd = std::sqrt(dt);
  double shift = -gamma * xi(-sd * levels);
  for (int k = 0; k <= levels; ++k)
    shift = std::max(shift, -gamma * xi(sd * (2.0 * k - levels)));
  double v = solve_bsde_markov_root(levels, dt, base, [&](double b) {
    return std::exp(-gamma * xi(b) - shift);
  });
  if (!(v > 0.0))
    throw NumericError("oracle route lost positivity; refine dt");
  return (std::log(v) + shift) / gamma;
}

}  // namespace

ConvergenceStudy convergence_study(const Generator& gen, PayoffKind payoff,
                                   const std::vector<int>& n_list,
                                   double horizon,
                                   std::optional<double> gamma) {
  if (n_list.empty()) throw InputError("refinement study needs levels");
  ConvergenceStudy study;
  double prev_error = 0.0;
  for (size_t row = 0; row < n_list.size(); ++row) {
    int n = n_list[row];
    if (n < 1) throw InputError("levels must be >= 1");
    double dt = horizon / n;
    ConvergenceRow r;
    r.levels = n;

    if (payoff == PayoffKind::terminal_sum) {
      auto xi = [](double b) { return b; };
      if (gamma) {
        r.value = markov_entropic_direct(n, dt, *gamma, gen, xi);
        r.oracle = markov_entropic_oracle(n, dt, *gamma, gen, xi);
      } else if (gen.name() == "zero") {
        r.value = solve_bsde_markov_root(n, dt, gen, xi);
        // linear case: the driver drops out and the value is the plain mean
        ScenarioTree tree = ScenarioTree::binomial(n, horizon);
        r.oracle = cond_expect(tree, payoff_of_terminal_sum(tree), 0).values[0];
      } else if (gen.name() == "abs") {
        double kappa = gen.param("kappa").value_or(0.0);
        ScenarioTree tree = ScenarioTree::binomial(n, horizon);
        RandomVariable x = payoff_of_terminal_sum(tree);
        r.value = solve_bsde(tree, gen, x).y.levels[0][0];
        r.oracle = maxmin_dp(tree, kappa, x, 0, MaxminMode::sup).values[0];
      } else {
        throw InputError("no closed-form oracle for generator " + gen.name());
      }
    } else {
      // path max payoffs need the full tree
      ScenarioTree tree = ScenarioTree::binomial(n, horizon);
      RandomVariable x = payoff_of_path_max(tree);
      if (gamma) {
        EntropicRoutes routes = entropic_bsde(tree, *gamma, gen, x, 0);
        r.value = routes.direct.values[0];
        r.oracle = routes.oracle.values[0];
      } else if (gen.name() == "zero") {
        r.value = solve_bsde(tree, gen, x).y.levels[0][0];
        r.oracle = cond_expect(tree, x, 0).values[0];
      } else if (gen.name() == "abs") {
        double kappa = gen.param("kappa").value_or(0.0);
        r.value = solve_bsde(tree, gen, x).y.levels[0][0];
        r.oracle = maxmin_dp(tree, kappa, x, 0, MaxminMode::sup).values[0];
      } else {
        throw InputError("no closed-form oracle for generator " + gen.name());
      }
    }
    r.abs_error = std::abs(r.value - r.oracle);
    r.ratio = row > 0 && r.abs_error > 0.0 ? prev_error / r.abs_error : 0.0;
    prev_error = r.abs_error;
    study.rows.push_back(r);
  }
  return study;
}

std::string convergence_csv(const ConvergenceStudy& study) {
  std::ostringstream os;
  os << "N,value,abs_error,ratio\n";
  os.precision(17);
  for (const auto& r : study.rows) {
    os << r.levels << ',' << r.value << ',' << r.abs_error << ',' << r.ratio
       << '\n';
  }
  return os.str();
}

std::optional<StarViolation> find_star_violation(
    const Generator& gen, const std::vector<double>& t_grid,
    const std::vector<double>& z_grid, const std::vector<double>& alpha_grid,
    double dt, double tol) {
  GeneratorReport rep = check_generator(gen, t_grid, z_grid, alpha_grid, tol);
  if (!rep.star_witness || rep.star_violation <= tol) return std::nullopt;
  auto [tw, zw, aw] = *rep.star_witness;

  // One-step tree with the terminal aligned to the violating z: the Z
  // component of the solution equals zw exactly, so the generator gap
  // transfers to the risk profile with factor dt.
  ScenarioTree tree = ScenarioTree::binomial(1, dt);
  double sd = tree.sqrt_dt();
  StarViolation out;
  out.t = tw;
  out.z = zw;
  out.alpha = aw;
  out.generator_gap = rep.star_violation;
  out.dt = dt;
  out.xi.leaf_values = {sd * zw, -sd * zw};  // slot 0 = down, slot 1 = up
  Profile base = g_risk(tree, gen, out.xi, 0);
  RandomVariable scaled_xi = scale(out.xi, aw);
  Profile scaled = g_risk(tree, gen, scaled_xi, 0);
  out.risk_gap = aw * base.values[0] - scaled.values[0];
  if (out.risk_gap <= 0.0) return std::nullopt;
  return out;
}

}  // namespace riskenv
