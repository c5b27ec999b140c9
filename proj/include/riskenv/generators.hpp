#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "riskenv/common.hpp"

namespace riskenv {

// BSDE driver g(t, z) with owner-declared property flags. The flags are
// audited on sampled grids by check_generator, never inferred silently.
class Generator {
 public:
  struct Flags {
    bool normalized = true;              // g(t, 0) = 0
    bool star_shaped = true;             // g(t, az) >= a g(t, z) for a >= 1
    bool convex = false;
    bool concave = false;
    bool positively_homogeneous = false; // g(t, az) = a g(t, z) for a >= 0
    std::optional<double> lipschitz_K;   // |g(z1)-g(z2)| <= K(1+|z1|+|z2|)|z1-z2|
    std::optional<double> growth_C;      // |g(z)| <= C(1+z^2)
  };

  Generator(std::string name, std::function<double(double, double)> fn,
            Flags flags, std::map<std::string, double> params = {});

  double operator()(double t, double z) const { return fn_(t, z); }
  const std::string& name() const { return name_; }
  const Flags& flags() const { return flags_; }
  const std::map<std::string, double>& params() const { return params_; }
  std::optional<double> param(const std::string& key) const;

  // Catalogue (addressable by name from model files).
  static Generator zero();
  static Generator abs(double kappa);
  static Generator asymmetric(double k1, double k2);
  // |z|^4 below |z| = 1 and |z|^2 beyond: star-shaped but neither convex
  // nor concave. Catalogue name "example41".
  static Generator quartic_quadratic();
  static Generator quadratic(double gamma);  // (gamma/2) z^2
  static Generator quadratic_entropic(double gamma, const Generator& base);
  // min(kappa |z|, cap): Lipschitz and normalized but not star-shaped;
  // the stock counterexample for the star-shape checks.
  static Generator capped_abs(double kappa, double cap);

 private:
  std::string name_;
  std::function<double(double, double)> fn_;
  Flags flags_;
  std::map<std::string, double> params_;
};

// Grid audit of the declared flags. `ok` fields compare findings against the
// declaration; estimates report the smallest constants consistent with the
// samples.
struct GeneratorReport {
  bool normalized_ok = true;
  double normalization_gap = 0.0;

  bool star_ok = true;
  double star_violation = 0.0;
  std::optional<std::array<double, 3>> star_witness;  // (t, z, alpha)

  double lipschitz_estimate = 0.0;
  bool lipschitz_ok = true;
  double growth_estimate = 0.0;
  bool growth_ok = true;

  bool convexity_ok = true;  // declaration matches the midpoint probe
  double convexity_violation = 0.0;
  std::optional<std::array<double, 3>> convexity_witness;  // (t, z1, z2)

  bool homogeneity_ok = true;
  double homogeneity_gap = 0.0;

  bool all_declared_consistent = true;
};

GeneratorReport check_generator(const Generator& gen,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& z_grid,
                                const std::vector<double>& alpha_grid,
                                double tol = kSoftTol);

std::vector<double> linspace(double lo, double hi, int n);

}  // namespace riskenv
