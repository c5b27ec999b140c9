#include "riskenv/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace riskenv {

Utility::Utility(std::string name, std::function<double(double)> fn,
                 bool declared_star_shaped)
    : name_(std::move(name)), fn_(std::move(fn)),
      star_shaped_(declared_star_shaped) {
  if (!fn_) throw InputError("utility function is empty");
}

void Utility::validate(double lo, double hi, int samples) const {
  if (samples < 3 || !(lo < 0.0) || !(hi > 0.0))
    throw InputError("invalid utility validation grid");
  if (std::abs(fn_(0.0)) > 1e-12)
    throw InputError("utility must satisfy u(0) = 0");
  double prev = fn_(lo);
  for (int i = 1; i < samples; ++i) {
    double x = lo + (hi - lo) * i / (samples - 1);
    double v = fn_(x);
    if (!std::isfinite(v)) throw InputError("utility not finite on the grid");
    if (v < prev - 1e-12) throw InputError("utility not increasing");
    prev = v;
  }
  if (!(fn_(hi) > fn_(lo)))
    throw InputError("utility is constant on the sampled grid");
  if (star_shaped_) {
    for (int i = 0; i < samples; ++i) {
      double x = lo + (hi - lo) * i / (samples - 1);
      double prev_ratio = fn_(0.25 * x) / 0.25;
      for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        double r = fn_(lam * x) / lam;
        if (r > prev_ratio + 1e-9)
          throw InputError("utility declared star-shaped but u(lx)/l "
                           "increases in l at x = " + std::to_string(x));
        prev_ratio = r;
      }
    }
  }
}

Utility Utility::linear() {
  return Utility("linear", [](double x) { return x; }, true);
}

Utility Utility::exponential(double gamma) {
  if (!(gamma > 0.0)) throw InputError("exponential utility needs gamma > 0");
  return Utility("exp", [gamma](double x) { return 1.0 - std::exp(-gamma * x); },
                 true);
}

Utility Utility::two_piece(double gain_slope, double loss_slope) {
  if (!(gain_slope > 0.0) || !(loss_slope > 0.0))
    throw InputError("two_piece utility needs positive slopes");
  return Utility(
      "two_piece",
      [gain_slope, loss_slope](double x) {
        return x >= 0.0 ? gain_slope * x : loss_slope * x;
      },
      loss_slope >= gain_slope);
}

LinearMeasure::LinearMeasure(std::optional<MeasureChange> q)
    : q_(std::move(q)) {}

Profile LinearMeasure::evaluate(const ScenarioTree& tree,
                                const RandomVariable& x, int t) const {
  return negate(cond_expect(tree, x, t, q_ ? &*q_ : nullptr));
}

Profile WorstCaseMeasure::evaluate(const ScenarioTree& tree,
                                   const RandomVariable& x, int t) const {
  return negate(cond_ess_inf(tree, x, t));
}

ConditionalVaRMeasure::ConditionalVaRMeasure(double lambda,
                                             std::optional<MeasureChange> base)
    : lambda_(lambda), base_(std::move(base)) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw InputError("VaR level must lie in (0, 1)");
  if (base_ && !base_->equivalent())
    throw InputError("VaR base measure must be equivalent");
}

Profile ConditionalVaRMeasure::evaluate(const ScenarioTree& tree,
                                        const RandomVariable& x, int t) const {
  return var_conditional(tree, x, t, lambda_, base_ ? &*base_ : nullptr);
}

RobustVaRMeasure::RobustVaRMeasure(double lambda,
                                   std::vector<MeasureChange> scenarios)
    : lambda_(lambda), scenarios_(std::move(scenarios)) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw InputError("VaR level must lie in (0, 1)");
  if (scenarios_.empty()) throw InputError("robust VaR needs scenarios");
  for (const auto& q : scenarios_)
    if (!q.equivalent())
      throw InputError("robust VaR scenarios must be equivalent");
}

Profile RobustVaRMeasure::evaluate(const ScenarioTree& tree,
                                   const RandomVariable& x, int t) const {
  return robust_var(tree, x, t, lambda_, scenarios_);
}

EntropicMeasure::EntropicMeasure(double gamma, std::optional<MeasureChange> base)
    : gamma_(gamma), base_(std::move(base)) {
  if (!(gamma > 0.0)) throw InputError("entropic gamma must be positive");
}

Profile EntropicMeasure::evaluate(const ScenarioTree& tree,
                                  const RandomVariable& x, int t) const {
  return entropic(tree, x, t, gamma_, base_ ? &*base_ : nullptr);
}

UtilityShortfallMeasure::UtilityShortfallMeasure(Utility u, double tol)
    : u_(std::move(u)), tol_(tol) {
  if (!(tol > 0.0)) throw InputError("bisection tolerance must be positive");
  u_.validate();
}

Profile UtilityShortfallMeasure::evaluate(const ScenarioTree& tree,
                                          const RandomVariable& x,
                                          int t) const {
  return utility_shortfall(tree, x, t, u_, tol_);
}

ShiftedMeasure::ShiftedMeasure(RiskMeasurePtr inner, RandomVariable shift)
    : inner_(std::move(inner)), shift_(std::move(shift)) {
  if (!inner_) throw InputError("shifted measure needs an inner measure");
}

Profile ShiftedMeasure::evaluate(const ScenarioTree& tree,
                                 const RandomVariable& x, int t) const {
  return inner_->evaluate(tree, add(x, shift_), t);
}

std::string ShiftedMeasure::name() const {
  return "shifted(" + inner_->name() + ")";
}

SupOfFamilyMeasure::SupOfFamilyMeasure(std::vector<RiskMeasurePtr> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw InputError("sup_of_family needs members");
  for (const auto& m : members_)
    if (!m) throw InputError("sup_of_family member is empty");
}

Profile SupOfFamilyMeasure::evaluate(const ScenarioTree& tree,
                                     const RandomVariable& x, int t) const {
  Profile out = members_.front()->evaluate(tree, x, t);
  for (size_t m = 1; m < members_.size(); ++m) {
    Profile p = members_[m]->evaluate(tree, x, t);
    for (size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::max(out.values[i], p.values[i]);
  }
  return out;
}

Profile var_conditional(const ScenarioTree& tree, const RandomVariable& x,
                        int t, double lambda, const MeasureChange* q) {
  if (!(lambda > 0.0 && lambda < 1.0))
    throw InputError("VaR level must lie in (0, 1)");
  if (q && !q->equivalent())
    throw InputError("VaR base measure must be equivalent");
  tree.require_level(t);
  check_payoff(tree, x);
  std::vector<double> w = conditional_leaf_weights(tree, t, q);

  Profile out;
  out.level = t;
  out.values.resize(tree.node_count(t));
  std::vector<std::pair<double, double>> atoms;  // (value, weight)
  for (int n = 0; n < tree.node_count(t); ++n) {
    auto [b, e] = tree.leaf_range(t, n);
    atoms.clear();
    atoms.reserve(e - b);
    for (int leaf = b; leaf < e; ++leaf)
      atoms.emplace_back(x.leaf_values[leaf], w[leaf]);
    std::sort(atoms.begin(), atoms.end());
    // Sweep: q(n) = sup{c : Q[X < c | n] <= lambda} is the next distinct
    // atom value after the cumulative mass first exceeds lambda.
    double cum = 0.0;
    double quantile = atoms.back().first;
    for (size_t i = 0; i < atoms.size();) {
      size_t j = i;
      double mass = 0.0;
      while (j < atoms.size() && atoms[j].first == atoms[i].first)
        mass += atoms[j++].second;
      if (cum + mass > lambda) {
        quantile = atoms[i].first;
        break;
      }
      cum += mass;
      i = j;
    }
    out.values[n] = -quantile + 0.0;  // avoid negative zeros in reports
  }
  return out;
}

Profile robust_var(const ScenarioTree& tree, const RandomVariable& x, int t,
                   double lambda, const std::vector<MeasureChange>& scenarios) {
  if (scenarios.empty()) throw InputError("robust VaR needs scenarios");
  Profile out = var_conditional(tree, x, t, lambda, &scenarios.front());
  for (size_t k = 1; k < scenarios.size(); ++k) {
    Profile p = var_conditional(tree, x, t, lambda, &scenarios[k]);
    for (size_t i = 0; i < out.values.size(); ++i)
      out.values[i] = std::max(out.values[i], p.values[i]);
  }
  return out;
}

Profile entropic(const ScenarioTree& tree, const RandomVariable& x, int t,
                 double gamma, const MeasureChange* q) {
  if (!(gamma > 0.0)) throw InputError("entropic gamma must be positive");
  tree.require_level(t);
  check_payoff(tree, x);
  std::vector<double> w = conditional_leaf_weights(tree, t, q);

  Profile out;
  out.level = t;
  out.values.resize(tree.node_count(t));
  for (int n = 0; n < tree.node_count(t); ++n) {
    auto [b, e] = tree.leaf_range(t, n);
    // log-sum-exp with a max shift
    double shift = -gamma * x.leaf_values[b];
    for (int leaf = b + 1; leaf < e; ++leaf)
      shift = std::max(shift, -gamma * x.leaf_values[leaf]);
    double acc = 0.0;
    for (int leaf = b; leaf < e; ++leaf)
      acc += w[leaf] * std::exp(-gamma * x.leaf_values[leaf] - shift);
    if (!(acc > 0.0) || !std::isfinite(acc))
      throw NumericError("entropic aggregation overflowed despite shifting");
    out.values[n] = (std::log(acc) + shift) / gamma;
  }
  return out;
}

Profile utility_shortfall(const ScenarioTree& tree, const RandomVariable& x,
                          int t, const Utility& u, double tol) {
  if (!(tol > 0.0)) throw InputError("bisection tolerance must be positive");
  tree.require_level(t);
  check_payoff(tree, x);
  std::vector<double> w = conditional_leaf_weights(tree, t);

  double xmax = *std::max_element(x.leaf_values.begin(), x.leaf_values.end());
  double xmin = *std::min_element(x.leaf_values.begin(), x.leaf_values.end());

  Profile out;
  out.level = t;
  out.values.resize(tree.node_count(t));
  for (int n = 0; n < tree.node_count(t); ++n) {
    auto [b, e] = tree.leaf_range(t, n);
    auto mean_u = [&](double m) {
      double acc = 0.0;
      for (int leaf = b; leaf < e; ++leaf)
        acc += w[leaf] * u(m + x.leaf_values[leaf]);
      return acc;
    };
    double lo = -xmax - 1.0, hi = -xmin + 1.0;
    double flo = mean_u(lo), fhi = mean_u(hi);
    if (!(flo < 0.0) || !(fhi >= 0.0))
      throw NumericError("utility shortfall bracket has no sign change");
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
      double mid = 0.5 * (lo + hi);
      if (mean_u(mid) >= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    out.values[n] = hi;  // least m with E[u(m + X) | n] >= 0, up to tol
  }
  return out;
}

}  // namespace riskenv
