#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "rtstab/error.hpp"
#include "rtstab/pressure_law.hpp"

namespace rtstab {

enum class Layer { lower, upper };

constexpr std::string_view to_string(Layer layer) noexcept {
  return layer == Layer::lower ? "minus" : "plus";
}

/// Geometry, gravity and fluid constants of the two-layer problem.
struct PhysicalParams {
  double b = 1.0;    // depth of the lower layer
  double ell = 1.0;  // depth of the upper layer
  double L1 = 1.0;
  double L2 = 1.0;
  double g = 1.0;
  double p_atm = 1.0;
  double mu_plus = 1.0;
  double mu_minus = 1.0;
  double mu_prime_plus = 0.0;
  double mu_prime_minus = 0.0;
  double sigma_plus = 0.0;
  double sigma_minus = 0.0;

  [[nodiscard]] double mu(Layer layer) const noexcept {
    return layer == Layer::upper ? mu_plus : mu_minus;
  }
  [[nodiscard]] double mu_prime(Layer layer) const noexcept {
    return layer == Layer::upper ? mu_prime_plus : mu_prime_minus;
  }

  /// Throws InvalidInput naming the first violated constraint.
  void validate() const {
    auto positive = [](double v, const char* name) {
      require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidInput,
              std::string(name) + " must be > 0 (got " + std::to_string(v) + ")");
    };
    auto nonnegative = [](double v, const char* name) {
      require(std::isfinite(v) && v >= 0.0, ErrorCode::InvalidInput,
              std::string(name) + " must be >= 0 (got " + std::to_string(v) + ")");
    };
    positive(b, "b");
    positive(ell, "ell");
    positive(L1, "L1");
    positive(L2, "L2");
    positive(g, "g");
    positive(p_atm, "p_atm");
    positive(mu_plus, "mu_plus");
    positive(mu_minus, "mu_minus");
    nonnegative(mu_prime_plus, "mu_prime_plus");
    nonnegative(mu_prime_minus, "mu_prime_minus");
    nonnegative(sigma_plus, "sigma_plus");
    nonnegative(sigma_minus, "sigma_minus");
  }
};

struct EquilibriumOptions {
  /// Evaluate isothermal/polytropic layers from their closed-form profiles instead of
  /// the fixed-step integrator. Both paths agree to ~1e-8 or better.
  bool closed_form = false;
  /// Smallest admissible P'(rho) during integration.
  double min_pressure_slope = 1e-12;
};

/// Hydrostatic two-layer density profile.
///
/// Samples are stored per layer in ascending x3; the lower layer covers [-b, 0] and the
/// upper layer [0, ell]. Between samples the density is recovered by one order-4 step of
/// the equilibrium ODE from the nearest sample, so off-sample values carry the same
/// accuracy as the samples themselves.
struct EquilibriumProfile {
  PressureLaw law_upper = PressureLaw::isothermal(1.0);
  PressureLaw law_lower = PressureLaw::isothermal(1.0);
  double b = 1.0;
  double ell = 1.0;
  double g = 1.0;
  double p_atm = 1.0;
  bool closed_form = false;

  std::vector<double> x_lower, rho_lower;
  std::vector<double> x_upper, rho_upper;

  [[nodiscard]] const PressureLaw& law(Layer layer) const noexcept {
    return layer == Layer::upper ? law_upper : law_lower;
  }

  /// rho_+(ell)
  [[nodiscard]] double rho1() const { return rho_upper.back(); }
  /// rho_+(0)
  [[nodiscard]] double rho_top_interface() const { return rho_upper.front(); }
  /// rho_-(0)
  [[nodiscard]] double rho_bot_interface() const { return rho_lower.back(); }
  [[nodiscard]] double jump() const { return rho_top_interface() - rho_bot_interface(); }

  [[nodiscard]] bool contains(double x3, Layer layer) const noexcept {
    return layer == Layer::upper ? (x3 >= 0.0 && x3 <= ell) : (x3 >= -b && x3 <= 0.0);
  }

  /// Layer-side slope of the ODE: d rho / dx3 = -g rho / P'(rho).
  [[nodiscard]] double slope(double rho, Layer layer) const {
    return -g * rho / law(layer).derivative(rho);
  }

  [[nodiscard]] double density(double x3, Layer layer) const {
    require(contains(x3, layer), ErrorCode::DomainError,
            "x3 = " + std::to_string(x3) + " outside the " + std::string(to_string(layer)) +
                " layer");
    if (closed_form) return closed_form_density(x3, layer);
    const auto& xs = layer == Layer::upper ? x_upper : x_lower;
    const auto& rs = layer == Layer::upper ? rho_upper : rho_lower;
    const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    auto idx = static_cast<std::ptrdiff_t>(std::lround((x3 - xs.front()) / h));
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(xs.size()) - 1);
    const double dx = x3 - xs[idx];
    if (dx == 0.0) return rs[idx];
    return rk4_step(rs[idx], dx, layer);
  }

  [[nodiscard]] double density_derivative(double x3, Layer layer) const {
    return slope(density(x3, layer), layer);
  }

  /// One classical order-4 step of the equilibrium ODE.
  [[nodiscard]] double rk4_step(double rho, double dx, Layer layer) const {
    const double k1 = slope(rho, layer);
    const double k2 = slope(rho + 0.5 * dx * k1, layer);
    const double k3 = slope(rho + 0.5 * dx * k2, layer);
    const double k4 = slope(rho + dx * k3, layer);
    return rho + dx / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  [[nodiscard]] double closed_form_density(double x3, Layer layer) const {
    const PressureLaw& P = law(layer);
    const double x0 = layer == Layer::upper ? ell : 0.0;
    const double r0 = layer == Layer::upper ? rho1() : rho_bot_interface();
    if (P.kind() == LawKind::isothermal) return r0 * std::exp(-g * (x3 - x0) / P.K());
    if (P.kind() == LawKind::polytropic) {
      const double gm = P.gamma();
      if (gm == 1.0) return r0 * std::exp(-g * (x3 - x0) / P.K());
      const double base = std::pow(r0, gm - 1.0) - g * (gm - 1.0) / (P.K() * gm) * (x3 - x0);
      require(base > 0.0, ErrorCode::NonPositiveDensity,
              "polytropic profile vanishes at x3 = " + std::to_string(x3));
      return std::pow(base, 1.0 / (gm - 1.0));
    }
    throw Error(ErrorCode::InvalidInput, "tabulated laws have no closed-form profile");
  }
};

namespace detail {

inline bool has_closed_form(const PressureLaw& law) {
  return law.kind() == LawKind::isothermal || law.kind() == LawKind::polytropic;
}

/// Integrates one layer downward from (x_top, rho_top) to x_bottom with n_samples points.
inline void integrate_layer(const EquilibriumProfile& prof, Layer layer, double x_top,
                            double rho_top, double x_bottom, std::size_t n_samples,
                            double min_slope, std::vector<double>& xs,
                            std::vector<double>& rs) {
  const double h = (x_top - x_bottom) / static_cast<double>(n_samples - 1);
  xs.assign(n_samples, 0.0);
  rs.assign(n_samples, 0.0);
  xs.back() = x_top;
  rs.back() = rho_top;
  const PressureLaw& P = prof.law(layer);
  for (std::size_t k = n_samples - 1; k > 0; --k) {
    const double r = rs[k];
    require(r > 0.0, ErrorCode::NonPositiveDensity,
            "density reached " + std::to_string(r) + " at x3 = " + std::to_string(xs[k]));
    const double dp = P.derivative(r);
    require(dp > min_slope, ErrorCode::DegeneratePressure,
            "P'(rho) = " + std::to_string(dp) + " at rho = " + std::to_string(r));
    xs[k - 1] = x_top - h * static_cast<double>(n_samples - k);
    rs[k - 1] = prof.rk4_step(r, -h, layer);
  }
  xs.front() = x_bottom;
  require(rs.front() > 0.0, ErrorCode::NonPositiveDensity,
          "density reached " + std::to_string(rs.front()) + " at x3 = " +
              std::to_string(x_bottom));
}

}  // namespace detail

/// Hydrostatic equilibrium: integrates d rho/dx3 = -g rho / P'(rho) downward from
/// P_+(rho(ell)) = p_atm, matches pressure across x3 = 0, and continues to -b.
/// n_samples is the number of sample points per layer (>= 5).
inline EquilibriumProfile solve_equilibrium(const PressureLaw& upper, const PressureLaw& lower,
                                            const PhysicalParams& params,
                                            std::size_t n_samples,
                                            const EquilibriumOptions& opts = {}) {
  params.validate();
  require(n_samples >= 5, ErrorCode::PreconditionViolation,
          "solve_equilibrium needs at least 5 samples per layer");
  EquilibriumProfile prof;
  prof.law_upper = upper;
  prof.law_lower = lower;
  prof.b = params.b;
  prof.ell = params.ell;
  prof.g = params.g;
  prof.p_atm = params.p_atm;

  const double rho1 = upper.inverse(params.p_atm);
  detail::integrate_layer(prof, Layer::upper, params.ell, rho1, 0.0, n_samples,
                          opts.min_pressure_slope, prof.x_upper, prof.rho_upper);
  const double rho_minus = lower.inverse(upper.pressure(prof.rho_upper.front()));
  detail::integrate_layer(prof, Layer::lower, 0.0, rho_minus, -params.b, n_samples,
                          opts.min_pressure_slope, prof.x_lower, prof.rho_lower);

  if (opts.closed_form && detail::has_closed_form(upper) && detail::has_closed_form(lower)) {
    // Resample both layers from the closed forms; the interface value is recomputed from
    // the exact upper profile so the two paths stay independent.
    prof.closed_form = true;
    for (std::size_t k = 0; k < n_samples; ++k)
      prof.rho_upper[k] = prof.closed_form_density(prof.x_upper[k], Layer::upper);
    prof.rho_lower.back() = lower.inverse(upper.pressure(prof.rho_upper.front()));
    for (std::size_t k = 0; k < n_samples; ++k)
      prof.rho_lower[k] = prof.closed_form_density(prof.x_lower[k], Layer::lower);
  }
  return prof;
}

inline double density_jump(const EquilibriumProfile& profile) { return profile.jump(); }

/// h'(rho(x3)) = P'(rho)/rho on the given layer.
inline double enthalpy_weight(const EquilibriumProfile& profile, double x3, Layer layer) {
  const double rho = profile.density(x3, layer);
  return profile.law(layer).derivative(rho) / rho;
}

struct AdmissibilityTolerances {
  double hydrostatic = 1e-6;
  double pressure = 1e-9;
};

enum class AdmissibilityFlag {
  NonPositiveDensity,
  DegeneratePressure,
  HydrostaticResidual,
  PressureContinuity,
  TopPressure,
  EvaluationFailure,
};

struct AdmissibilityReport {
  double min_density = std::numeric_limits<double>::infinity();
  double min_density_x3 = 0.0;
  double max_hydrostatic_residual = 0.0;
  double continuity_residual = 0.0;
  double top_residual = 0.0;
  double min_pressure_slope = std::numeric_limits<double>::infinity();
  std::vector<AdmissibilityFlag> failures;
  bool passed = true;

  [[nodiscard]] bool has(AdmissibilityFlag code) const {
    return std::find(failures.begin(), failures.end(), code) != failures.end();
  }
};

namespace detail {

/// Fourth-order finite-difference derivative of uniformly spaced samples.
inline std::vector<double> fd4_derivative(const std::vector<double>& f, double h) {
  const std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / (12.0 * h);
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h);
  d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] +
              3.0 * f[n - 5]) / (12.0 * h);
  d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] -
              f[n - 5]) / (12.0 * h);
  return d;
}

}  // namespace detail

/// Numeric stand-in for the equilibrium admissibility conditions: positivity, P' > 0,
/// hydrostatic balance on the samples, and pressure matching at x3 = 0 and x3 = ell.
inline AdmissibilityReport check_admissibility(const EquilibriumProfile& profile,
                                               const AdmissibilityTolerances& tol = {}) {
  AdmissibilityReport rep;
  auto flag = [&rep](AdmissibilityFlag code) {
    rep.passed = false;
    if (!rep.has(code)) rep.failures.push_back(code);
  };

  bool positive = true;
  for (Layer layer : {Layer::lower, Layer::upper}) {
    const auto& xs = layer == Layer::upper ? profile.x_upper : profile.x_lower;
    const auto& rs = layer == Layer::upper ? profile.rho_upper : profile.rho_lower;
    for (std::size_t i = 0; i < rs.size(); ++i) {
      if (rs[i] < rep.min_density) {
        rep.min_density = rs[i];
        rep.min_density_x3 = xs[i];
      }
      if (!(rs[i] > 0.0)) positive = false;
    }
  }
  if (!positive) {
    flag(AdmissibilityFlag::NonPositiveDensity);
    return rep;
  }

  try {
    for (Layer layer : {Layer::lower, Layer::upper}) {
      const auto& xs = layer == Layer::upper ? profile.x_upper : profile.x_lower;
      const auto& rs = layer == Layer::upper ? profile.rho_upper : profile.rho_lower;
      const PressureLaw& P = profile.law(layer);
      std::vector<double> p(rs.size());
      for (std::size_t i = 0; i < rs.size(); ++i) {
        p[i] = P.pressure(rs[i]);
        rep.min_pressure_slope = std::min(rep.min_pressure_slope, P.derivative(rs[i]));
      }
      const double h = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
      const auto dp = detail::fd4_derivative(p, h);
      for (std::size_t i = 0; i < rs.size(); ++i)
        rep.max_hydrostatic_residual =
            std::max(rep.max_hydrostatic_residual, std::abs(dp[i] + profile.g * rs[i]));
    }
    rep.continuity_residual = std::abs(profile.law_upper.pressure(profile.rho_top_interface()) -
                                       profile.law_lower.pressure(profile.rho_bot_interface()));
    rep.top_residual = std::abs(profile.law_upper.pressure(profile.rho1()) - profile.p_atm);
  } catch (const Error&) {
    flag(AdmissibilityFlag::EvaluationFailure);
    return rep;
  }

  if (!(rep.min_pressure_slope > 0.0)) flag(AdmissibilityFlag::DegeneratePressure);
  if (!(rep.max_hydrostatic_residual <= tol.hydrostatic))
    flag(AdmissibilityFlag::HydrostaticResidual);
  if (!(rep.continuity_residual <= tol.pressure)) flag(AdmissibilityFlag::PressureContinuity);
  if (!(rep.top_residual <= tol.pressure)) flag(AdmissibilityFlag::TopPressure);
  return rep;
}

}  // namespace rtstab
