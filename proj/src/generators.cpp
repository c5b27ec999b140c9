#include "riskenv/generators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace riskenv {

Generator::Generator(std::string name, std::function<double(double, double)> fn,
                     Flags flags, std::map<std::string, double> params)
    : name_(std::move(name)), fn_(std::move(fn)), flags_(flags),
      params_(std::move(params)) {
  if (!fn_) throw InputError("generator function is empty");
}

std::optional<double> Generator::param(const std::string& key) const {
  auto it = params_.find(key);
  if (it == params_.end()) return std::nullopt;
  return it->second;
}

Generator Generator::zero() {
  Flags f;
  f.convex = true;
  f.concave = true;
  f.positively_homogeneous = true;
  f.lipschitz_K = 0.0;
  f.growth_C = 0.0;
  return Generator("zero", [](double, double) { return 0.0; }, f);
}

Generator Generator::abs(double kappa) {
  if (!(kappa > 0.0)) throw InputError("abs generator needs kappa > 0");
  Flags f;
  f.convex = true;
  f.positively_homogeneous = true;
  f.lipschitz_K = kappa;
  f.growth_C = kappa;
  return Generator("abs", [kappa](double, double z) { return kappa * std::abs(z); },
                   f, {{"kappa", kappa}});
}

Generator Generator::asymmetric(double k1, double k2) {
  if (!(k2 > k1 && k1 > 0.0))
    throw InputError("asymmetric generator needs k2 > k1 > 0");
  Flags f;
  f.concave = true;
  f.positively_homogeneous = true;
  f.lipschitz_K = k2;
  f.growth_C = k2;
  return Generator(
      "asymmetric",
      [k1, k2](double, double z) {
        return k1 * std::max(z, 0.0) - k2 * std::max(-z, 0.0);
      },
      f, {{"k1", k1}, {"k2", k2}});
}

Generator Generator::quartic_quadratic() {
  Flags f;
  f.lipschitz_K = 4.0;
  f.growth_C = 1.0;
  return Generator("example41",
                   [](double, double z) {
                     double a = std::abs(z);
                     return a <= 1.0 ? a * a * a * a : a * a;
                   },
                   f);
}

Generator Generator::quadratic(double gamma) {
  if (!(gamma > 0.0)) throw InputError("quadratic generator needs gamma > 0");
  Flags f;
  f.convex = true;
  f.lipschitz_K = 0.5 * gamma;
  f.growth_C = 0.5 * gamma;
  return Generator("quadratic",
                   [gamma](double, double z) { return 0.5 * gamma * z * z; }, f,
                   {{"gamma", gamma}});
}

Generator Generator::quadratic_entropic(double gamma, const Generator& base) {
  if (!(gamma > 0.0)) throw InputError("quadratic_entropic needs gamma > 0");
  if (!base.flags().positively_homogeneous || !base.flags().normalized)
    throw InputError(
        "quadratic_entropic base must be positively homogeneous and normalized");
  Flags f;
  f.convex = base.flags().convex;
  if (base.flags().lipschitz_K)
    f.lipschitz_K = *base.flags().lipschitz_K + 0.5 * gamma;
  if (base.flags().growth_C) f.growth_C = *base.flags().growth_C + 0.5 * gamma;
  std::map<std::string, double> params = base.params();
  params["gamma"] = gamma;
  Generator b = base;
  return Generator("quadratic_entropic(" + base.name() + ")",
                   [gamma, b](double t, double z) {
                     return b(t, z) + 0.5 * gamma * z * z;
                   },
                   f, std::move(params));
}

Generator Generator::capped_abs(double kappa, double cap) {
  if (!(kappa > 0.0) || !(cap > 0.0))
    throw InputError("capped_abs needs kappa > 0 and cap > 0");
  Flags f;
  f.star_shaped = false;
  f.lipschitz_K = kappa;
  f.growth_C = cap;
  return Generator("capped_abs",
                   [kappa, cap](double, double z) {
                     return std::min(kappa * std::abs(z), cap);
                   },
                   f, {{"kappa", kappa}, {"cap", cap}});
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 2) throw InputError("linspace needs at least two points");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
  return out;
}

GeneratorReport check_generator(const Generator& gen,
                                const std::vector<double>& t_grid,
                                const std::vector<double>& z_grid,
                                const std::vector<double>& alpha_grid,
                                double tol) {
  if (t_grid.empty() || z_grid.empty() || alpha_grid.empty())
    throw InputError("check_generator needs non-empty grids");
  for (double a : alpha_grid)
    if (a < 1.0) throw InputError("alpha grid must lie in [1, inf)");

  GeneratorReport rep;
  const Generator::Flags& fl = gen.flags();

  for (double t : t_grid) {
    // (C3)
    double g0 = std::abs(gen(t, 0.0));
    rep.normalization_gap = std::max(rep.normalization_gap, g0);

    for (double z : z_grid) {
      double gz = gen(t, z);
      if (!std::isfinite(gz))
        throw NumericError("generator not finite on the grid");
      // (C1): smallest C with |g| <= C (1 + z^2)
      rep.growth_estimate =
          std::max(rep.growth_estimate, std::abs(gz) / (1.0 + z * z));
      // (C4)
      for (double a : alpha_grid) {
        double gap = a * gz - gen(t, a * z);
        if (gap > rep.star_violation) {
          rep.star_violation = gap;
          rep.star_witness = std::array<double, 3>{t, z, a};
        }
      }
      // positive homogeneity probe reuses the alpha grid plus [0, 1) points
      for (double a : {0.0, 0.3, 0.7}) {
        double gap = std::abs(gen(t, a * z) - a * gz);
        rep.homogeneity_gap = std::max(rep.homogeneity_gap, gap);
      }
      for (double a : alpha_grid) {
        double gap = std::abs(gen(t, a * z) - a * gz);
        rep.homogeneity_gap = std::max(rep.homogeneity_gap, gap);
      }
      // (C2): smallest K in the locally-Lipschitz bound, and the midpoint
      // convexity probe
      for (double z2 : z_grid) {
        if (z2 == z) continue;
        double ratio = std::abs(gz - gen(t, z2)) /
                       ((1.0 + std::abs(z) + std::abs(z2)) * std::abs(z - z2));
        rep.lipschitz_estimate = std::max(rep.lipschitz_estimate, ratio);
        double mid = gen(t, 0.5 * (z + z2));
        double chord = 0.5 * (gz + gen(t, z2));
        double gap = mid - chord;  // > 0 breaks convexity, < 0 breaks concavity
        if (gap > rep.convexity_violation) {
          rep.convexity_violation = gap;
          rep.convexity_witness = std::array<double, 3>{t, z, z2};
        }
        if (fl.concave && -gap > tol) rep.convexity_ok = false;
      }
    }
  }

  rep.normalized_ok = !fl.normalized || rep.normalization_gap <= tol;
  rep.star_ok = !fl.star_shaped || rep.star_violation <= tol;
  if (!(rep.star_violation > tol)) rep.star_witness.reset();
  rep.lipschitz_ok =
      !fl.lipschitz_K || rep.lipschitz_estimate <= *fl.lipschitz_K + tol;
  rep.growth_ok = !fl.growth_C || rep.growth_estimate <= *fl.growth_C + tol;
  if (fl.convex && rep.convexity_violation > tol) rep.convexity_ok = false;
  rep.homogeneity_ok =
      !fl.positively_homogeneous || rep.homogeneity_gap <= tol;

  rep.all_declared_consistent = rep.normalized_ok && rep.star_ok &&
                                rep.lipschitz_ok && rep.growth_ok &&
                                rep.convexity_ok && rep.homogeneity_ok;
  return rep;
}

}  // namespace riskenv
