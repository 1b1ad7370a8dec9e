#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rtstab/dispersion.hpp"
#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/mesh.hpp"
#include "rtstab/variational.hpp"

namespace rtstab {

/// Semi-discrete linearized system at one horizontal frequency xi.
///
/// With the phase convention u = (-i phi, -i theta, psi) e^{i xi.x'} every coefficient is
/// real, so the state is real: y = [u (3 P1 fields), q (one value per Gauss point), eta_+,
/// eta_-]. The system reads E y' = A y with
///   Mu u'  = -Kv u + B^T H q - c_+ b_+ eta_+ - c_- b_- eta_-
///   q'     = -B u
///   eta_+' = psi(ell),  eta_-' = psi(0)
/// where B u = (rho psi)' + rho (xi1 phi + xi2 theta) at Gauss points, H = h'(rho) times
/// quadrature weights, c_+ = sigma_+|xi|^2 + rho_1 g and c_- = sigma_-|xi|^2 - [[rho]] g.
/// Energy W = 1/2 (u.Mu u + q.H q + c_+ eta_+^2 + c_- eta_-^2) obeys W' = -u.Kv u.
struct SemiDiscrete {
  SparseMatrix E;
  SparseMatrix A;
  SparseMatrix Mu;
  SparseMatrix Kv;
  SparseMatrix B;
  Vector H;
  double c_plus = 0.0;
  double c_minus = 0.0;
  double xi1 = 0.0, xi2 = 0.0;
  Mesh1D mesh;
  Eigen::Index n_u = 0;
  Eigen::Index n_q = 0;
  Eigen::Index top_psi = 0;
  Eigen::Index interface_psi = 0;

  [[nodiscard]] Eigen::Index size() const noexcept { return n_u + n_q + 2; }
  [[nodiscard]] Eigen::Index eta_plus_index() const noexcept { return n_u + n_q; }
  [[nodiscard]] Eigen::Index eta_minus_index() const noexcept { return n_u + n_q + 1; }

  [[nodiscard]] double energy(const Vector& y) const {
    const auto u = y.head(n_u);
    const auto q = y.segment(n_u, n_q);
    const double ep = y(eta_plus_index()), em = y(eta_minus_index());
    return 0.5 * (u.dot(Mu * u) + q.dot(H.cwiseProduct(q)) + c_plus * ep * ep +
                  c_minus * em * em);
  }

  /// u.Kv u: the viscous dissipation rate.
  [[nodiscard]] double dissipation(const Vector& y) const {
    const auto u = y.head(n_u);
    return u.dot(Kv * u);
  }
};

inline SemiDiscrete semidiscretize(const EquilibriumProfile& profile, const Mesh1D& mesh,
                                   double xi1, double xi2, const PhysicalParams& params) {
  constexpr std::size_t NF = 3, PHI = 0, THETA = 1, PSI = 2;
  const QuadraticForms forms = assemble_forms_3field(mesh, profile, xi1, xi2, params);
  SemiDiscrete sd;
  sd.xi1 = xi1;
  sd.xi2 = xi2;
  sd.mesh = mesh;
  sd.Mu = 2.0 * forms.M;
  sd.Kv = 2.0 * forms.K1;
  sd.n_u = forms.M.rows();

  const auto samples = sample_coefficients(mesh, profile, params);
  sd.n_q = static_cast<Eigen::Index>(samples.size());
  sd.H.resize(sd.n_q);
  std::vector<Eigen::Triplet<double>> tb;
  for (std::size_t iq = 0; iq < samples.size(); ++iq) {
    const QuadSample& s = samples[iq];
    sd.H(static_cast<Eigen::Index>(iq)) = s.h_prime * s.weight;
    const double h = mesh.element_size(s.element);
    const double N[2] = {0.5 * (1.0 - s.t), 0.5 * (1.0 + s.t)};
    const double dN[2] = {-1.0 / h, 1.0 / h};
    for (std::size_t a = 0; a < 2; ++a) {
      const std::size_t node = s.element + a;
      auto put = [&](std::size_t field, double v) {
        const auto d = mesh.dof(node, field, NF);
        if (d >= 0 && v != 0.0) tb.emplace_back(static_cast<int>(iq), static_cast<int>(d), v);
      };
      put(PHI, s.rho * xi1 * N[a]);
      put(THETA, s.rho * xi2 * N[a]);
      put(PSI, s.drho * N[a] + s.rho * dN[a]);
    }
  }
  sd.B.resize(sd.n_q, sd.n_u);
  sd.B.setFromTriplets(tb.begin(), tb.end());

  const auto bc = boundary_coefficients(profile, params, std::hypot(xi1, xi2));
  sd.c_plus = 2.0 * bc.top;
  sd.c_minus = 2.0 * bc.interface;
  sd.top_psi = mesh.dof(mesh.top_node(), PSI, NF);
  sd.interface_psi = mesh.dof(mesh.interface_node(), PSI, NF);

  const Eigen::Index n = sd.size();
  const Eigen::Index ip = sd.eta_plus_index(), im = sd.eta_minus_index();
  std::vector<Eigen::Triplet<double>> te, ta;
  for (int c = 0; c < sd.Mu.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sd.Mu, c); it; ++it)
      te.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (Eigen::Index i = sd.n_u; i < n; ++i) te.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);

  for (int c = 0; c < sd.Kv.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(sd.Kv, c); it; ++it)
      ta.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), -it.value());
  for (int c = 0; c < sd.B.outerSize(); ++c) {
    for (SparseMatrix::InnerIterator it(sd.B, c); it; ++it) {
      const auto q = it.row(), u = it.col();
      // B^T H q in the momentum rows, -B u in the continuity rows.
      ta.emplace_back(static_cast<int>(u), static_cast<int>(sd.n_u + q), it.value() * sd.H(q));
      ta.emplace_back(static_cast<int>(sd.n_u + q), static_cast<int>(u), -it.value());
    }
  }
  ta.emplace_back(static_cast<int>(sd.top_psi), static_cast<int>(ip), -sd.c_plus);
  ta.emplace_back(static_cast<int>(sd.interface_psi), static_cast<int>(im), -sd.c_minus);
  ta.emplace_back(static_cast<int>(ip), static_cast<int>(sd.top_psi), 1.0);
  ta.emplace_back(static_cast<int>(im), static_cast<int>(sd.interface_psi), 1.0);

  sd.E.resize(n, n);
  sd.E.setFromTriplets(te.begin(), te.end());
  sd.A.resize(n, n);
  sd.A.setFromTriplets(ta.begin(), ta.end());
  return sd;
}

/// y' = E^{-1} A y.
inline Vector time_derivative(const SemiDiscrete& sd, const Vector& y) {
  Eigen::SparseLU<SparseMatrix> lu(sd.E);
  return lu.solve(sd.A * y);
}

/// Embeds a reduced (phi, psi) vector as the normal-mode state with growth rate lambda:
/// u = (phi, 0, psi), q = -B u / lambda, eta = psi / lambda at each boundary.
inline Vector mode_state(const SemiDiscrete& sd, const Vector& reduced, double lambda) {
  require(lambda > 0.0, ErrorCode::PreconditionViolation, "mode_state needs lambda > 0");
  const Mesh1D& mesh = sd.mesh;
  require(static_cast<std::size_t>(reduced.size()) == mesh.num_dofs(2),
          ErrorCode::PreconditionViolation, "reduced vector does not match the mesh");
  Vector y = Vector::Zero(sd.size());
  for (std::size_t i = 1; i < mesh.num_nodes(); ++i) {
    y(mesh.dof(i, 0, 3)) = reduced(mesh.dof(i, 0, 2));
    y(mesh.dof(i, 2, 3)) = reduced(mesh.dof(i, 1, 2));
  }
  y.segment(sd.n_u, sd.n_q) = -(sd.B * y.head(sd.n_u)) / lambda;
  y(sd.eta_plus_index()) = y(sd.top_psi) / lambda;
  y(sd.eta_minus_index()) = y(sd.interface_psi) / lambda;
  return y;
}

/// Smooth generic data: velocity bumps in every component, zero q and eta.
inline Vector generic_state(const SemiDiscrete& sd, unsigned seed = 7) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(0.5, 1.5);
  const Mesh1D& mesh = sd.mesh;
  const double a0 = unif(rng), a1 = unif(rng), a2 = unif(rng);
  Vector y = Vector::Zero(sd.size());
  for (std::size_t i = 1; i < mesh.num_nodes(); ++i) {
    const double x = mesh.nodes[i];
    const double s = (x + mesh.b) / (mesh.b + mesh.ell);
    y(mesh.dof(i, 0, 3)) = a0 * s * (1.0 - 0.5 * s);
    y(mesh.dof(i, 1, 3)) = a1 * std::sin(std::numbers::pi * s);
    y(mesh.dof(i, 2, 3)) = a2 * s * (1.0 + s);
  }
  return y;
}

enum class Scheme { trapezoidal, implicit_euler };

struct IntegratorParams {
  double dt = 0.01;
  double t_final = 1.0;
  Scheme scheme = Scheme::trapezoidal;
  double fit_window = 0.25;
  /// Record every k-th step (the final step is always recorded).
  int sample_every = 1;
  bool keep_states = false;
};

struct TrajectorySample {
  double t = 0.0;
  double eta_minus = 0.0;
  double eta_plus = 0.0;
  double energy = 0.0;
  double dissipation = 0.0;
  /// W(t_n) - W(t_{n-1}) + dt * (dissipation at the step midpoint), per unit W scale.
  double balance_residual = 0.0;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  std::vector<Vector> states;  // only with keep_states
  Vector final_state;
  int steps = 0;
};

/// Integrates E y' = A y with an implicit one-step scheme; one sparse LU factorization.
/// A negative dt integrates backward in time.
inline Trajectory advance(const Vector& y0, const SemiDiscrete& sd, const IntegratorParams& ip) {
  require(ip.dt != 0.0 && std::isfinite(ip.dt), ErrorCode::PreconditionViolation,
          "time step must be nonzero");
  require(ip.t_final >= 0.0, ErrorCode::PreconditionViolation, "t_final must be >= 0");
  require(ip.fit_window > 0.0 && ip.fit_window <= 1.0, ErrorCode::PreconditionViolation,
          "fit_window must lie in (0, 1]");
  require(y0.size() == sd.size(), ErrorCode::PreconditionViolation,
          "initial state does not match the operators");
  const double dt = ip.dt;
  const double theta = ip.scheme == Scheme::trapezoidal ? 0.5 : 1.0;
  const SparseMatrix lhs = sd.E - (theta * dt) * sd.A;
  const SparseMatrix rhs = sd.E + ((1.0 - theta) * dt) * sd.A;
  Eigen::SparseLU<SparseMatrix> lu;
  lu.analyzePattern(lhs);
  lu.factorize(lhs);
  require(lu.info() == Eigen::Success, ErrorCode::SingularStep,
          "implicit step matrix is singular");

  const int steps = static_cast<int>(std::llround(ip.t_final / std::abs(dt)));
  Trajectory tr;
  tr.steps = steps;
  Vector y = y0;
  double W = sd.energy(y);
  auto record = [&](double t, double resid) {
    tr.samples.push_back({t, y(sd.eta_minus_index()), y(sd.eta_plus_index()), W,
                          sd.dissipation(y), resid});
    if (ip.keep_states) tr.states.push_back(y);
  };
  record(0.0, 0.0);
  const int every = std::max(1, ip.sample_every);
  for (int n = 1; n <= steps; ++n) {
    Vector next = lu.solve(rhs * y);
    require(next.allFinite(), ErrorCode::SingularStep, "non-finite state after implicit step");
    const Vector mid = 0.5 * (y + next);
    const double W_next = sd.energy(next);
    const double scale = std::max({std::abs(W), std::abs(W_next), 1e-300});
    const double resid = (W_next - W + dt * sd.dissipation(mid)) / scale;
    y = std::move(next);
    W = W_next;
    if (n % every == 0 || n == steps) record(n * dt, resid);
  }
  tr.final_state = y;
  return tr;
}

namespace detail {

/// Least-squares slope of log|v| against t over the final `window` fraction of samples.
inline double log_slope(const std::vector<TrajectorySample>& s, double window,
                        double TrajectorySample::*field) {
  require(window > 0.0 && window <= 1.0, ErrorCode::PreconditionViolation,
          "fit window must lie in (0, 1]");
  const std::size_t n = s.size();
  require(n >= 2, ErrorCode::ZeroSignal, "trajectory has fewer than two samples");
  const double t_end = s.back().t;
  const double t_begin = s.front().t + (1.0 - window) * (t_end - s.front().t);
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t m = 0;
  for (const auto& smp : s) {
    if (smp.t < t_begin - 1e-12 * std::abs(t_end)) continue;
    const double v = std::abs(smp.*field);
    require(std::isfinite(v) && v > 1e-300, ErrorCode::ZeroSignal,
            "signal underflows at t = " + std::to_string(smp.t));
    const double ly = std::log(v);
    st += smp.t;
    sy += ly;
    stt += smp.t * smp.t;
    sty += smp.t * ly;
    ++m;
  }
  require(m >= 2, ErrorCode::ZeroSignal, "fit window holds fewer than two samples");
  const double md = static_cast<double>(m);
  return (md * sty - st * sy) / (md * stt - st * st);
}

}  // namespace detail

/// Fitted exponential rate of |eta_-(t)| over the final fit_window fraction.
inline double measure_growth(const Trajectory& tr, double fit_window) {
  return detail::log_slope(tr.samples, fit_window, &TrajectorySample::eta_minus);
}

/// Fitted exponential rate of |W(t)|.
inline double measure_energy_growth(const Trajectory& tr, double fit_window) {
  return detail::log_slope(tr.samples, fit_window, &TrajectorySample::energy);
}

/// Per-step residuals of the discrete energy balance W_{n+1} - W_n = -dt u_mid.Kv u_mid.
inline std::vector<double> energy_balance_residual(const Trajectory& tr) {
  std::vector<double> out;
  out.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.push_back(s.balance_residual);
  return out;
}

inline void write_trajectory(const Trajectory& tr, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write trajectory to " + path);
  os.precision(17);
  os << "t,abs_eta_minus,abs_eta_plus,energy,dissipation,balance_residual\n";
  for (const auto& s : tr.samples)
    os << s.t << ',' << std::abs(s.eta_minus) << ',' << std::abs(s.eta_plus) << ',' << s.energy
       << ',' << s.dissipation << ',' << s.balance_residual << '\n';
}

/// Oracle run: integrates from the given state and fits the rate of |eta_-|.
struct OracleResult {
  double fitted_rate = 0.0;
  double energy_rate = 0.0;
  Trajectory trajectory;
};

inline OracleResult run_oracle(const SemiDiscrete& sd, const Vector& y0,
                               const IntegratorParams& ip) {
  OracleResult r;
  r.trajectory = advance(y0, sd, ip);
  r.fitted_rate = measure_growth(r.trajectory, ip.fit_window);
  r.energy_rate = measure_energy_growth(r.trajectory, ip.fit_window);
  return r;
}

}  // namespace rtstab
