#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rtstab/dispersion.hpp"
#include "rtstab/eigensolver.hpp"
#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/mesh.hpp"
#include "rtstab/variational.hpp"

namespace rtstab {

/// Normal-mode profiles at frequency xi, u = (-i phi, -i theta, psi) e^{i xi.x' + lambda t}.
///
/// Profiles are stored layer by layer: nodes [-b, 0] of the lower layer, then [0, ell] of
/// the upper one, so x3 = 0 appears twice (q_tilde is discontinuous there).
struct GrowingMode {
  double xi1 = 0.0;
  double xi2 = 0.0;
  double lambda = 0.0;
  std::vector<double> x3;
  std::vector<Layer> layer;
  std::vector<double> phi, theta, psi, q_tilde;
  double eta_plus = 0.0;   // psi(ell) / lambda
  double eta_minus = 0.0;  // psi(0) / lambda

  [[nodiscard]] std::size_t size() const noexcept { return x3.size(); }
  [[nodiscard]] double xi_abs() const { return std::hypot(xi1, xi2); }
};

namespace detail {

/// Nodal values of field f (of nf) with the constrained bottom node as 0.
inline std::vector<double> nodal_field(const Mesh1D& mesh, const Vector& v, std::size_t f,
                                       std::size_t nf) {
  std::vector<double> out(mesh.num_nodes(), 0.0);
  for (std::size_t i = 1; i < mesh.num_nodes(); ++i) out[i] = v(mesh.dof(i, f, nf));
  return out;
}

/// L2 projection onto the layer's P1 space of the elementwise derivative of the P1
/// interpolant of f (nodes xs, values fs). Tridiagonal solve.
inline std::vector<double> projected_derivative(const std::vector<double>& xs,
                                                const std::vector<double>& fs) {
  const std::size_t n = xs.size();
  Eigen::MatrixXd Mm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                             static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double h = xs[e + 1] - xs[e];
    const double slope = (fs[e + 1] - fs[e]) / h;
    const auto i = static_cast<Eigen::Index>(e);
    Mm(i, i) += h / 3.0;
    Mm(i + 1, i + 1) += h / 3.0;
    Mm(i, i + 1) += h / 6.0;
    Mm(i + 1, i) += h / 6.0;
    rhs(i) += 0.5 * h * slope;
    rhs(i + 1) += 0.5 * h * slope;
  }
  const Eigen::VectorXd d = Mm.ldlt().solve(rhs);
  return {d.data(), d.data() + d.size()};
}

/// Layer ranges inside a GrowingMode: [begin, end) indices.
inline std::array<std::size_t, 2> layer_range(const GrowingMode& m, Layer layer) {
  std::size_t b = 0;
  while (b < m.size() && m.layer[b] != layer) ++b;
  std::size_t e = b;
  while (e < m.size() && m.layer[e] == layer) ++e;
  return {b, e};
}

/// The projected derivative of rho psi, layer by layer.
inline std::vector<double> rho_psi_derivative(const GrowingMode& m,
                                              const EquilibriumProfile& profile) {
  std::vector<double> out(m.size(), 0.0);
  for (Layer layer : {Layer::lower, Layer::upper}) {
    const auto [b, e] = layer_range(m, layer);
    std::vector<double> xs(m.x3.begin() + b, m.x3.begin() + e);
    std::vector<double> f(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
      f[i] = profile.density(xs[i], layer) * m.psi[b + i];
    const auto d = projected_derivative(xs, f);
    std::copy(d.begin(), d.end(), out.begin() + b);
  }
  return out;
}

}  // namespace detail

/// Builds the mode at xi = (|xi|, 0) from a converged unstable dispersion point.
/// Normalized so that |eta_minus| 2 pi sqrt(L1 L2) = 1, with eta_minus > 0.
inline GrowingMode assemble_mode(const DispersionPoint& point, const EquilibriumProfile& profile,
                                 const Mesh1D& mesh, const PhysicalParams& params) {
  require(point.lambda > 0.0, ErrorCode::PreconditionViolation,
          "assemble_mode needs a growing dispersion point (lambda > 0)");
  require(static_cast<std::size_t>(point.minimizer.size()) == mesh.num_dofs(2),
          ErrorCode::PreconditionViolation, "minimizer does not match the mesh");
  const auto phi = detail::nodal_field(mesh, point.minimizer, 0, 2);
  const auto psi = detail::nodal_field(mesh, point.minimizer, 1, 2);
  const std::size_t ifc = mesh.interface_node();
  require(std::abs(psi[ifc]) >= 1e-10, ErrorCode::DegenerateMode,
          "psi(0) vanishes; the minimizer is not a growing mode");

  const double lambda = point.lambda;
  const double cell = 2.0 * std::numbers::pi * std::sqrt(params.L1 * params.L2);
  const double scale = lambda / (psi[ifc] * cell);

  GrowingMode m;
  m.xi1 = point.xi_abs;
  m.xi2 = 0.0;
  m.lambda = lambda;
  auto push = [&](std::size_t node, Layer layer) {
    m.x3.push_back(mesh.nodes[node]);
    m.layer.push_back(layer);
    m.phi.push_back(scale * phi[node]);
    m.theta.push_back(0.0);
    m.psi.push_back(scale * psi[node]);
  };
  for (std::size_t i = 0; i <= ifc; ++i) push(i, Layer::lower);
  for (std::size_t i = ifc; i < mesh.num_nodes(); ++i) push(i, Layer::upper);

  const auto d = detail::rho_psi_derivative(m, profile);
  m.q_tilde.resize(m.size());
  const double k = m.xi_abs();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double rho = profile.density(m.x3[i], m.layer[i]);
    m.q_tilde[i] = -(d[i] + rho * k * m.phi[i]) / lambda;
  }
  m.eta_minus = m.psi[ifc] / lambda;
  m.eta_plus = m.psi.back() / lambda;
  return m;
}

/// |eta_minus| in L2 over the periodic cell.
inline double eta_minus_norm(const GrowingMode& m, const PhysicalParams& params) {
  return std::abs(m.eta_minus) * 2.0 * std::numbers::pi * std::sqrt(params.L1 * params.L2);
}

/// max |lambda q + (rho psi)' + rho (xi1 phi + xi2 theta)| at Gauss points of every element,
/// with all profiles taken as their P1 interpolants and (rho psi)' the projected derivative.
inline double continuity_residual(const GrowingMode& m, const EquilibriumProfile& profile) {
  const auto d = detail::rho_psi_derivative(m, profile);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    if (m.layer[i] != m.layer[i + 1]) continue;
    for (double t : Gauss4::points) {
      const double w1 = 0.5 * (1.0 - t), w2 = 0.5 * (1.0 + t);
      auto at = [&](const std::vector<double>& f) { return w1 * f[i] + w2 * f[i + 1]; };
      const double rho_i = profile.density(m.x3[i], m.layer[i]);
      const double rho_j = profile.density(m.x3[i + 1], m.layer[i + 1]);
      const double flux = w1 * rho_i * (m.xi1 * m.phi[i] + m.xi2 * m.theta[i]) +
                          w2 * rho_j * (m.xi1 * m.phi[i + 1] + m.xi2 * m.theta[i + 1]);
      worst = std::max(worst, std::abs(m.lambda * at(m.q_tilde) + at(d) + flux));
    }
  }
  return worst;
}

using Rotation = std::array<std::array<double, 2>, 2>;

inline Rotation rotation(double angle) {
  return {{{std::cos(angle), -std::sin(angle)}, {std::sin(angle), std::cos(angle)}}};
}

/// The mode at R xi: (phi, theta) -> R (phi, theta); psi, q_tilde, lambda unchanged.
inline GrowingMode rotate_mode(const GrowingMode& mode, const Rotation& R) {
  const double o00 = R[0][0] * R[0][0] + R[1][0] * R[1][0] - 1.0;
  const double o11 = R[0][1] * R[0][1] + R[1][1] * R[1][1] - 1.0;
  const double o01 = R[0][0] * R[0][1] + R[1][0] * R[1][1];
  const double det = R[0][0] * R[1][1] - R[0][1] * R[1][0];
  require(std::max({std::abs(o00), std::abs(o11), std::abs(o01)}) <= 1e-12 &&
              std::abs(det - 1.0) <= 1e-12,
          ErrorCode::NotARotation, "matrix is not a rotation (orthogonal with det 1)");
  GrowingMode out = mode;
  out.xi1 = R[0][0] * mode.xi1 + R[0][1] * mode.xi2;
  out.xi2 = R[1][0] * mode.xi1 + R[1][1] * mode.xi2;
  for (std::size_t i = 0; i < mode.size(); ++i) {
    out.phi[i] = R[0][0] * mode.phi[i] + R[0][1] * mode.theta[i];
    out.theta[i] = R[1][0] * mode.phi[i] + R[1][1] * mode.theta[i];
  }
  return out;
}

inline Rotation transpose(const Rotation& R) {
  return {{{R[0][0], R[1][0]}, {R[0][1], R[1][1]}}};
}

/// Strong-form residuals of the normal-mode ODE system at the mode's growth rate.
struct OdeResidual {
  double phi_equation = 0.0;  // max over interior nodes of each layer
  double psi_equation = 0.0;
  double bottom_phi = 0.0;  // |phi(-b)|
  double bottom_psi = 0.0;
  double top_tangential = 0.0;
  double top_normal = 0.0;
  double interface_phi_jump = 0.0;
  double interface_psi_jump = 0.0;
  double interface_tangential = 0.0;
  double interface_normal = 0.0;

  [[nodiscard]] double max() const {
    return std::max({phi_equation, psi_equation, bottom_phi, bottom_psi, top_tangential,
                     top_normal, interface_phi_jump, interface_psi_jump,
                     interface_tangential, interface_normal});
  }
};

/// Evaluates the ODE system with finite differences on the nodal profiles: central
/// differences at interior nodes, second-order one-sided differences at layer ends.
/// Assumes theta = 0 and xi along the first axis (as produced by assemble_mode).
inline OdeResidual ode_residual(const GrowingMode& m, const EquilibriumProfile& profile,
                                const PhysicalParams& params) {
  OdeResidual r;
  if (m.size() == 0) return r;
  const double lam = m.lambda;
  const double k = m.xi_abs();
  const double g = params.g;

  struct Side {
    double phi, psi, dphi, dpsi, A, rho, dP, mu, mup;
  };
  std::array<Side, 2> at_interface{};  // lower, upper
  Side at_top{};

  for (Layer layer : {Layer::lower, Layer::upper}) {
    const auto [b, e] = detail::layer_range(m, layer);
    const std::size_t n = e - b;
    if (n < 3) continue;
    const double h = m.x3[b + 1] - m.x3[b];
    const double mu = params.mu(layer), mup = params.mu_prime(layer);
    const PressureLaw& P = profile.law(layer);
    auto d1 = [&](const std::vector<double>& f, std::size_t i) {
      if (i == 0) return (-3.0 * f[b] + 4.0 * f[b + 1] - f[b + 2]) / (2.0 * h);
      if (i == n - 1) return (3.0 * f[e - 1] - 4.0 * f[e - 2] + f[e - 3]) / (2.0 * h);
      return (f[b + i + 1] - f[b + i - 1]) / (2.0 * h);
    };
    std::vector<double> rho(n), dP(n), A(n), dphi(n), dpsi(n);
    for (std::size_t i = 0; i < n; ++i) {
      rho[i] = profile.density(m.x3[b + i], layer);
      dP[i] = P.derivative(rho[i]);
      dphi[i] = d1(m.phi, i);
      dpsi[i] = d1(m.psi, i);
      // h'((rho psi)' + rho k phi) = P'(psi' + k phi) - g psi for a hydrostatic profile.
      A[i] = dP[i] * (dpsi[i] + k * m.phi[b + i]) - g * m.psi[b + i];
    }
    const double lt = lam * (mup + mu / 3.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const std::size_t j = b + i;
      const double phi_xx = (m.phi[j + 1] - 2.0 * m.phi[j] + m.phi[j - 1]) / (h * h);
      const double psi_xx = (m.psi[j + 1] - 2.0 * m.psi[j] + m.psi[j - 1]) / (h * h);
      const double dA = (A[i + 1] - A[i - 1]) / (2.0 * h);
      const double res_phi = -lam * mu * phi_xx +
                             (lam * lam * rho[i] + lam * mu * k * k + k * k * lt) * m.phi[j] +
                             k * lt * dpsi[i] + k * rho[i] * A[i];
      const double res_psi = -(4.0 * lam * mu / 3.0 + lam * mup) * psi_xx - rho[i] * dA +
                             (lam * lam * rho[i] + lam * mu * k * k) * m.psi[j] -
                             lt * k * dphi[i];
      r.phi_equation = std::max(r.phi_equation, std::abs(res_phi));
      r.psi_equation = std::max(r.psi_equation, std::abs(res_psi));
    }
    auto side = [&](std::size_t i) {
      return Side{m.phi[b + i], m.psi[b + i], dphi[i], dpsi[i], A[i], rho[i], dP[i], mu, mup};
    };
    if (layer == Layer::lower) {
      r.bottom_phi = std::abs(m.phi[b]);
      r.bottom_psi = std::abs(m.psi[b]);
      at_interface[0] = side(n - 1);
    } else {
      at_interface[1] = side(0);
      at_top = side(n - 1);
    }
  }

  // Normal stress X = lambda (mu' + mu/3)(psi' + k phi) + rho A + lambda mu (psi' - k phi).
  auto normal = [&](const Side& s) {
    return lam * (s.mup + s.mu / 3.0) * (s.dpsi + k * s.phi) + s.rho * s.A +
           lam * s.mu * (s.dpsi - k * s.phi);
  };
  auto tangential = [&](const Side& s) { return s.mu * lam * (k * s.psi - s.dphi); };

  r.top_tangential = std::abs(tangential(at_top));
  r.top_normal = std::abs(normal(at_top) +
                          (profile.rho1() * g + params.sigma_plus * k * k) * at_top.psi);
  const Side& lo = at_interface[0];
  const Side& up = at_interface[1];
  r.interface_phi_jump = std::abs(up.phi - lo.phi);
  r.interface_psi_jump = std::abs(up.psi - lo.psi);
  r.interface_tangential = std::abs(tangential(up) - tangential(lo));
  r.interface_normal = std::abs(normal(up) - normal(lo) +
                                (profile.jump() * g - params.sigma_minus * k * k) * lo.psi);
  return r;
}

/// Theta-decoupling check: the smallest eigenpair of the three-field pencil at
/// xi = (|xi|, 0) and the L2 norm of its theta component (J-normalized).
struct ThetaCheck {
  double alpha = 0.0;
  double theta_norm = 0.0;
};

inline ThetaCheck theta_decoupling(const Mesh1D& mesh, const EquilibriumProfile& profile,
                                   double xi_abs, double s, const PhysicalParams& params,
                                   const EigenOptions& opts = {}) {
  const QuadraticForms forms = assemble_forms_3field(mesh, profile, xi_abs, 0.0, params);
  const EigenPair p = min_eig(forms, s, opts);
  const auto theta = detail::nodal_field(mesh, p.vector, 1, 3);
  double sq = 0.0;
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const double h = mesh.element_size(e);
    const double a = theta[e], b = theta[e + 1];
    sq += h / 3.0 * (a * a + a * b + b * b);
  }
  return {p.alpha, std::sqrt(sq)};
}

namespace detail {

inline std::string sidecar_path(const std::string& csv_path) {
  std::filesystem::path p(csv_path);
  p.replace_extension(".json");
  return p.string();
}

}  // namespace detail

/// Writes the profiles as CSV (x3,phi,theta,psi,q_tilde; 17 significant digits) and a JSON
/// sidecar {xi, lambda, eta_plus, eta_minus} next to it (same stem, .json).
inline void export_mode(const GrowingMode& m, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write mode CSV to " + path);
  os.precision(17);
  os << "x3,phi,theta,psi,q_tilde\n";
  for (std::size_t i = 0; i < m.size(); ++i)
    os << m.x3[i] << ',' << m.phi[i] << ',' << m.theta[i] << ',' << m.psi[i] << ','
       << m.q_tilde[i] << '\n';
  require(static_cast<bool>(os), ErrorCode::IoError, "write failed for " + path);

  nlohmann::json j;
  j["xi"] = {m.xi1, m.xi2};
  j["lambda"] = m.lambda;
  j["eta_plus"] = m.eta_plus;
  j["eta_minus"] = m.eta_minus;
  const std::string side = detail::sidecar_path(path);
  std::ofstream js(side);
  require(static_cast<bool>(js), ErrorCode::IoError, "cannot write mode sidecar to " + side);
  js << j.dump(2) << '\n';
}

/// Reads a mode written by export_mode. Layers are recovered from the repeated x3 = 0 row.
inline GrowingMode import_mode(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::IoError, "cannot read mode CSV " + path);
  GrowingMode m;
  std::string line;
  std::getline(is, line);
  Layer layer = Layer::lower;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::array<double, 5> v{};
    char comma;
    ss >> v[0] >> comma >> v[1] >> comma >> v[2] >> comma >> v[3] >> comma >> v[4];
    require(!ss.fail(), ErrorCode::IoError, "malformed mode row in " + path + ": " + line);
    if (!m.x3.empty() && m.x3.back() == 0.0 && v[0] == 0.0) layer = Layer::upper;
    m.x3.push_back(v[0]);
    m.layer.push_back(layer);
    m.phi.push_back(v[1]);
    m.theta.push_back(v[2]);
    m.psi.push_back(v[3]);
    m.q_tilde.push_back(v[4]);
  }
  const std::string side = detail::sidecar_path(path);
  std::ifstream js(side);
  require(static_cast<bool>(js), ErrorCode::IoError, "cannot read mode sidecar " + side);
  const auto j = nlohmann::json::parse(js);
  m.xi1 = j.at("xi").at(0).get<double>();
  m.xi2 = j.at("xi").at(1).get<double>();
  m.lambda = j.at("lambda").get<double>();
  m.eta_plus = j.at("eta_plus").get<double>();
  m.eta_minus = j.at("eta_minus").get<double>();
  return m;
}

}  // namespace rtstab
