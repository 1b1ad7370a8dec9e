#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <exception>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>
#include <vector>

#include "rtstab/eigensolver.hpp"
#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/mesh.hpp"
#include "rtstab/variational.hpp"

namespace rtstab {

struct DispersionOptions {
  double s_max_factor = 1.25;
  double root_tol = 1e-10;  // relative to S_max (width) and S_max^2 (residual)
  double s_min_ratio = 1e-8;
  /// alpha(s_min) above -alpha_zero_tol counts as "no growing mode".
  double alpha_zero_tol = 1e-12;
  int max_bisections = 200;
  EigenOptions eigen;
};

struct DispersionPoint {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double xi_abs = 0.0;
  double lambda = 0.0;
  double alpha_at_star = 0.0;
  Vector minimizer;
  int iterations = 0;
  bool converged = false;
};

struct GrowthSummary {
  double Lambda = 0.0;
  double argmax_xi1 = 0.0;
  double argmax_xi2 = 0.0;
  bool attained = false;
  double lambda_star = 0.0;
  /// Lambda/2 < lambda_star <= Lambda (vacuous when Lambda = 0).
  bool lambda_star_ok = true;
  std::vector<DispersionPoint> curve;
};

inline double critical_tension(const EquilibriumProfile& profile, const PhysicalParams& params) {
  return profile.jump() * params.g * std::max(params.L1 * params.L1, params.L2 * params.L2);
}

/// sqrt([[rho]] g / sigma_-); +inf when sigma_- = 0.
inline double critical_frequency(const EquilibriumProfile& profile,
                                 const PhysicalParams& params) {
  const double jump = profile.jump();
  require(jump > 0.0, ErrorCode::NotUnstableOrientation,
          "critical frequency needs a positive density jump (got " + std::to_string(jump) + ")");
  if (params.sigma_minus == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(jump * params.g / params.sigma_minus);
}

/// Upper bound b g [[rho]] / mu_- on any growth rate (0 for a non-positive jump).
inline double growth_bound(const EquilibriumProfile& profile, const PhysicalParams& params) {
  return std::max(0.0, params.b * params.g * profile.jump() / params.mu_minus);
}

/// Fixed point s = lambda(|xi|, s), i.e. the root of f(s) = s^2 + alpha(s), by bisection.
inline DispersionPoint growth_rate(const EquilibriumProfile& profile, double xi_abs,
                                   const Mesh1D& mesh, const PhysicalParams& params,
                                   const DispersionOptions& opts = {}) {
  require(xi_abs > 0.0 && std::isfinite(xi_abs), ErrorCode::PreconditionViolation,
          "growth_rate needs |xi| > 0");
  DispersionPoint pt;
  pt.xi1 = xi_abs;
  pt.xi_abs = xi_abs;

  const double bound = growth_bound(profile, params);
  const QuadraticForms forms = assemble_forms(mesh, profile, xi_abs, params);
  if (bound <= 0.0) {
    // Stable orientation: alpha(s) >= 0 for every s; report the probe at s = 1.
    const EigenPair p = min_eig(forms, 1.0, opts.eigen);
    pt.alpha_at_star = p.alpha;
    pt.minimizer = p.vector;
    pt.converged = true;
    return pt;
  }

  const double s_max = opts.s_max_factor * bound;
  const double s_min = opts.s_min_ratio * s_max;
  EigenPair lo = min_eig(forms, s_min, opts.eigen);
  if (lo.alpha >= -opts.alpha_zero_tol) {
    pt.alpha_at_star = lo.alpha;
    pt.minimizer = lo.vector;
    pt.converged = true;
    return pt;
  }
  auto f = [](double s, double alpha) { return s * s + alpha; };
  require(f(s_min, lo.alpha) <= 0.0, ErrorCode::NoSignChange,
          "alpha(s_min) < 0 but s_min^2 + alpha(s_min) > 0 at |xi| = " + std::to_string(xi_abs));
  EigenPair hi = min_eig(forms, s_max, opts.eigen);
  require(f(s_max, hi.alpha) >= 0.0, ErrorCode::NoSignChange,
          "s^2 + alpha(s) < 0 at S_max = " + std::to_string(s_max) +
              " for |xi| = " + std::to_string(xi_abs));

  double a = s_min, b = s_max;
  EigenPair best = lo;
  double best_s = s_min;
  double best_f = f(s_min, lo.alpha);
  for (int it = 1; it <= opts.max_bisections; ++it) {
    const double m = 0.5 * (a + b);
    EigenPair p = min_eig(forms, m, opts.eigen);
    const double fm = f(m, p.alpha);
    if (std::abs(fm) <= std::abs(best_f)) {
      best = p;
      best_s = m;
      best_f = fm;
    }
    pt.iterations = it;
    if (fm < 0.0) a = m; else b = m;
    if (std::abs(fm) <= opts.root_tol * s_max * s_max || b - a <= opts.root_tol * s_max) {
      pt.converged = true;
      break;
    }
  }
  pt.lambda = best_s;
  pt.alpha_at_star = best.alpha;
  pt.minimizer = std::move(best.vector);
  return pt;
}

namespace detail {

struct LatticePoint {
  double xi1, xi2, xi_abs;
};

/// Lattice frequencies (m/L1, n/L2), m, n >= 0, 0 < |xi| < cutoff, one per distinct |xi|
/// (smallest m first), sorted by |xi|.
inline std::vector<LatticePoint> lattice_representatives(double L1, double L2, double cutoff) {
  require(cutoff > 0.0 && std::isfinite(cutoff), ErrorCode::PreconditionViolation,
          "lattice sweep needs a finite positive cutoff");
  std::vector<LatticePoint> pts;
  const auto mmax = static_cast<std::int64_t>(std::ceil(cutoff * L1));
  const auto nmax = static_cast<std::int64_t>(std::ceil(cutoff * L2));
  for (std::int64_t m = 0; m <= mmax; ++m) {
    for (std::int64_t n = 0; n <= nmax; ++n) {
      if (m == 0 && n == 0) continue;
      const double x1 = static_cast<double>(m) / L1;
      const double x2 = static_cast<double>(n) / L2;
      const double r = std::hypot(x1, x2);
      if (r < cutoff) pts.push_back({x1, x2, r});
    }
  }
  // With L1 == L2 the squared norms are (m^2 + n^2) / L^2 and compare exactly as integers.
  const bool square = L1 == L2;
  auto key = [&](const LatticePoint& p) {
    return square ? std::round((p.xi1 * p.xi1 + p.xi2 * p.xi2) * L1 * L1)
                  : p.xi1 * p.xi1 + p.xi2 * p.xi2;
  };
  std::stable_sort(pts.begin(), pts.end(), [&](const LatticePoint& a, const LatticePoint& b) {
    const double ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    return a.xi1 < b.xi1;
  });
  std::vector<LatticePoint> out;
  for (const auto& p : pts) {
    if (!out.empty()) {
      const double k0 = key(out.back()), k1 = key(p);
      const bool same = square ? k0 == k1 : std::abs(k0 - k1) <= 1e-12 * std::max(1.0, k1);
      if (same) continue;
    }
    out.push_back(p);
  }
  return out;
}

}  // namespace detail

/// Growth rates over the lattice below `cutoff`, reduced to Lambda = max lambda.
/// Frequencies at or above the critical frequency are still solved (they act as probes
/// that must return lambda = 0).
inline GrowthSummary sweep_lattice(const EquilibriumProfile& profile, const Mesh1D& mesh,
                                   const PhysicalParams& params, double cutoff,
                                   const DispersionOptions& opts = {}, unsigned threads = 1) {
  const auto pts = detail::lattice_representatives(params.L1, params.L2, cutoff);
  GrowthSummary summary;
  summary.curve.resize(pts.size());

  std::size_t next = 0;
  std::mutex mtx;
  std::exception_ptr failure;
  auto worker = [&] {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard<std::mutex> lock(mtx);
        if (next >= pts.size() || failure) return;
        i = next++;
      }
      try {
        DispersionPoint p = growth_rate(profile, pts[i].xi_abs, mesh, params, opts);
        p.xi1 = pts[i].xi1;
        p.xi2 = pts[i].xi2;
        summary.curve[i] = std::move(p);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& p : summary.curve) {
    if (p.lambda > summary.Lambda) {
      summary.Lambda = p.lambda;
      summary.argmax_xi1 = p.xi1;
      summary.argmax_xi2 = p.xi2;
    }
  }
  if (profile.jump() > 0.0 && params.sigma_minus > 0.0)
    summary.attained = cutoff >= critical_frequency(profile, params);
  else if (profile.jump() <= 0.0)
    summary.attained = true;  // Lambda = 0 on every frequency
  summary.lambda_star = summary.Lambda;
  summary.lambda_star_ok = summary.Lambda == 0.0 ||
                           (summary.lambda_star > 0.5 * summary.Lambda &&
                            summary.lambda_star <= summary.Lambda);
  return summary;
}

/// (1 - x^2/ell^2)^(a/2) above the interface, (1 - x^2/b^2)^(a/2) below.
inline double psi_alpha(double x3, double b, double ell, double a) {
  const double d = x3 >= 0.0 ? ell : b;
  const double r = 1.0 - x3 * x3 / (d * d);
  return r <= 0.0 ? 0.0 : std::pow(r, 0.5 * a);
}

inline double psi_alpha_derivative(double x3, double b, double ell, double a) {
  const double d = x3 >= 0.0 ? ell : b;
  const double r = 1.0 - x3 * x3 / (d * d);
  if (r <= 0.0) return 0.0;
  return -a * x3 / (d * d) * std::pow(r, 0.5 * a - 1.0);
}

/// Closed form of int psi_alpha^2 over (-b, ell).
inline double psi_alpha_norm_sq(double b, double ell, double a) {
  return std::sqrt(std::numbers::pi) * (b + ell) * std::tgamma(a + 1.0) /
         (2.0 * std::tgamma(a + 1.5));
}

struct ProbeResult {
  double E = 0.0;  // E(v; s) of the interpolated candidate
  double J = 0.0;
  [[nodiscard]] double rayleigh() const { return E / J; }
};

/// E(.; s) at the nodal interpolant of (phi, psi) = (-psi_a'/|xi|, psi_a). A negative value
/// certifies alpha(s) < 0 without an eigensolve.
inline ProbeResult negativity_probe(const EquilibriumProfile& profile, double xi_abs, double s,
                                    const Mesh1D& mesh, const PhysicalParams& params,
                                    double exponent = 5.0) {
  require(xi_abs > 0.0, ErrorCode::PreconditionViolation, "probe needs |xi| > 0");
  require(exponent >= 5.0, ErrorCode::PreconditionViolation, "probe exponent must be >= 5");
  const QuadraticForms forms = assemble_forms(mesh, profile, xi_abs, params);
  Vector v = Vector::Zero(static_cast<Eigen::Index>(forms.size()));
  for (std::size_t i = 1; i < mesh.num_nodes(); ++i) {
    const double x = mesh.nodes[i];
    v(mesh.dof(i, 0, 2)) = -psi_alpha_derivative(x, mesh.b, mesh.ell, exponent) / xi_abs;
    v(mesh.dof(i, 1, 2)) = psi_alpha(x, mesh.b, mesh.ell, exponent);
  }
  const EnergyValue ev = evaluate_energy(forms, v, s);
  return {ev.E, ev.J};
}

}  // namespace rtstab
