#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/tree.hpp"

namespace riskenv {

// Dynamic risk measure: maps terminal payoffs to level-t profiles.
class RiskMeasure {
 public:
  virtual ~RiskMeasure() = default;
  virtual Profile evaluate(const ScenarioTree& tree, const RandomVariable& x,
                           int t) const = 0;
  virtual std::string name() const = 0;
};

using RiskMeasurePtr = std::shared_ptr<const RiskMeasure>;

// Utility function with an owner-declared star-shape flag; validate() audits
// the declarations on a sampled grid.
class Utility {
 public:
  Utility(std::string name, std::function<double(double)> fn,
          bool declared_star_shaped);

  double operator()(double x) const { return fn_(x); }
  const std::string& name() const { return name_; }
  bool declared_star_shaped() const { return star_shaped_; }

  // u(0) = 0, increasing on a grid, and (if declared) u(lambda x)/lambda
  // non-increasing in lambda. Throws InputError on violation.
  void validate(double lo = -4.0, double hi = 4.0, int samples = 81) const;

  static Utility linear();
  static Utility exponential(double gamma);
  // a x for gains, b x for losses; star-shaped (concave) when b >= a > 0.
  static Utility two_piece(double gain_slope, double loss_slope);

 private:
  std::string name_;
  std::function<double(double)> fn_;
  bool star_shaped_;
};

// rho(X) = -E_Q[X | F_t]; Q defaults to the reference measure.
class LinearMeasure : public RiskMeasure {
 public:
  explicit LinearMeasure(std::optional<MeasureChange> q = std::nullopt);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "linear"; }

 private:
  std::optional<MeasureChange> q_;
};

// rho(X) = -ess inf(X | F_t): the most conservative monetary measure.
class WorstCaseMeasure : public RiskMeasure {
 public:
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "worst_case"; }
};

class ConditionalVaRMeasure : public RiskMeasure {
 public:
  ConditionalVaRMeasure(double lambda,
                        std::optional<MeasureChange> base = std::nullopt);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "conditional_var"; }
  double lambda() const { return lambda_; }

 private:
  double lambda_;
  std::optional<MeasureChange> base_;
};

class RobustVaRMeasure : public RiskMeasure {
 public:
  RobustVaRMeasure(double lambda, std::vector<MeasureChange> scenarios);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "robust_var"; }

 private:
  double lambda_;
  std::vector<MeasureChange> scenarios_;
};

class EntropicMeasure : public RiskMeasure {
 public:
  explicit EntropicMeasure(double gamma,
                           std::optional<MeasureChange> base = std::nullopt);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "entropic"; }
  double gamma() const { return gamma_; }

 private:
  double gamma_;
  std::optional<MeasureChange> base_;
};

class UtilityShortfallMeasure : public RiskMeasure {
 public:
  UtilityShortfallMeasure(Utility u, double tol = 1e-10);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "utility_shortfall"; }

 private:
  Utility u_;
  double tol_;
};

// rho(X) = inner(X + Z): the acceptance-set shift transform.
class ShiftedMeasure : public RiskMeasure {
 public:
  ShiftedMeasure(RiskMeasurePtr inner, RandomVariable shift);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override;
  const RiskMeasure& inner() const { return *inner_; }

 private:
  RiskMeasurePtr inner_;
  RandomVariable shift_;
};

// Nodewise maximum of a finite family (the intersected acceptance set).
class SupOfFamilyMeasure : public RiskMeasure {
 public:
  explicit SupOfFamilyMeasure(std::vector<RiskMeasurePtr> members);
  Profile evaluate(const ScenarioTree&, const RandomVariable&,
                   int t) const override;
  std::string name() const override { return "sup_of_family"; }
  const std::vector<RiskMeasurePtr>& members() const { return members_; }

 private:
  std::vector<RiskMeasurePtr> members_;
};

// Free-function forms of the concrete evaluators.
Profile var_conditional(const ScenarioTree& tree, const RandomVariable& x,
                        int t, double lambda,
                        const MeasureChange* q = nullptr);
Profile robust_var(const ScenarioTree& tree, const RandomVariable& x, int t,
                   double lambda, const std::vector<MeasureChange>& scenarios);
Profile entropic(const ScenarioTree& tree, const RandomVariable& x, int t,
                 double gamma, const MeasureChange* q = nullptr);
Profile utility_shortfall(const ScenarioTree& tree, const RandomVariable& x,
                          int t, const Utility& u, double tol = 1e-10);

}  // namespace riskenv
