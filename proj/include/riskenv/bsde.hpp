#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "riskenv/generators.hpp"
#include "riskenv/measures.hpp"

namespace riskenv {

// Backward solution on a binomial tree. The one-step scheme is explicit:
//   Z_n = (Y_up - Y_down) / (2 sqrt(dt)),
//   Y_n = (Y_up + Y_down)/2 + g(t_n, Z_n) dt.
// slope_margin = 1 - sqrt(dt) * L with L the largest sampled |dg/dz| along
// the realized Z values; one-step comparison holds when it stays positive.
struct BsdeSolution {
  AdaptedProcess y;
  AdaptedProcess z;  // levels 0..N-1
  double slope_margin = 1.0;
  // slope_margin with 10% headroom still positive; when false the result is
  // returned but flagged "comparison not guaranteed at this dt".
  bool comparison_verified = true;
};

BsdeSolution solve_bsde(const ScenarioTree& tree, const Generator& gen,
                        const RandomVariable& terminal);

// rho_t of the induced measure: Y-profile at level t with terminal -xi.
Profile g_risk(const ScenarioTree& tree, const Generator& gen,
               const RandomVariable& xi, int t);

class GExpectationMeasure : public RiskMeasure {
 public:
  explicit GExpectationMeasure(Generator gen);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "g_expectation(" + gen_.name() + ")"; }
  const Generator& generator() const { return gen_; }

 private:
  Generator gen_;
};

// Bang-bang dynamic programming for the drift-uncertainty expectations with
// kernel bound kappa. sup/inf recursions:
//   V_n = (V_up + V_down)/2 +/- kappa |V_up - V_down| sqrt(dt) / 2.
enum class MaxminMode { sup, inf };
Profile maxmin_dp(const ScenarioTree& tree, double kappa,
                  const RandomVariable& xi, int t, MaxminMode mode);
// alpha * sup + (1 - alpha) * inf.
Profile maxmin_alpha(const ScenarioTree& tree, double kappa, double alpha,
                     const RandomVariable& xi, int t);

// rho(X) = alpha sup_Q E_Q[-X|F_t] + (1-alpha) inf_Q E_Q[-X|F_t].
class AlphaMaxminMeasure : public RiskMeasure {
 public:
  AlphaMaxminMeasure(double kappa, double alpha);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "alpha_maxmin"; }

 private:
  double kappa_;
  double alpha_;
};

// Two routes to the entropic value driven by a positively homogeneous base:
//   direct: driver base(z) + (gamma/2) z^2 with terminal -xi;
//   oracle: (1/gamma) ln of the base solution on terminal exp(-gamma xi).
struct EntropicRoutes {
  Profile direct;
  Profile oracle;
  double max_gap = 0.0;
  double slope_margin = 1.0;
};
EntropicRoutes entropic_bsde(const ScenarioTree& tree, double gamma,
                             const Generator& base, const RandomVariable& xi,
                             int t);

// Conditional relative entropy H_t(R|Q) = E_Q[dR/dQ ln dR/dQ | F_t] via the
// chain rule over transition rows; requires R << Q nodewise.
Profile relative_entropy(const ScenarioTree& tree, const MeasureChange& r,
                         const MeasureChange& q, int t);

// The tilted measure with conditional density proportional to exp(-gamma xi):
// the maximizer of E_R[-xi|F_t] - (1/gamma) H_t(R|Q).
MeasureChange entropic_maximizer(const ScenarioTree& tree, double gamma,
                                 const RandomVariable& xi,
                                 const MeasureChange& q);

// Markov solver on the recombining value lattice for terminal payoffs that
// are functions of the path sum; exact match of solve_bsde at a fraction of
// the cost, which is what makes deep refinement studies feasible.
double solve_bsde_markov_root(int levels, double dt, const Generator& gen,
                              const std::function<double(double)>& terminal);

enum class PayoffKind { terminal_sum, path_max };

struct ConvergenceRow {
  int levels = 0;
  double value = 0.0;
  double oracle = 0.0;
  double abs_error = 0.0;
  double ratio = 0.0;  // previous error / this error; 0 on the first row
};
struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
};

// Refinement study against the available closed-form oracle:
//   gamma set      -> quadratic-driver route vs the base-driver log transform;
//   gen "zero"     -> plain conditional expectation;
//   gen "abs"      -> bang-bang dynamic programming (sup).
ConvergenceStudy convergence_study(const Generator& gen, PayoffKind payoff,
                                   const std::vector<int>& n_list,
                                   double horizon,
                                   std::optional<double> gamma);

std::string convergence_csv(const ConvergenceStudy& study);

// Converse search: a generator that fails the star-shape grid check yields a
// one-step risk profile violating star-shapedness (terminal aligned to the
// violating z). Empty when the grid shows no violation.
struct StarViolation {
  double t = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  double generator_gap = 0.0;  // alpha g(z) - g(alpha z) > 0
  double risk_gap = 0.0;       // alpha rho(xi) - rho(alpha xi) > 0
  double dt = 0.0;
  RandomVariable xi;
};
std::optional<StarViolation> find_star_violation(
    const Generator& gen, const std::vector<double>& t_grid,
    const std::vector<double>& z_grid, const std::vector<double>& alpha_grid,
    double dt = 0.04, double tol = kSoftTol);

}  // namespace riskenv
