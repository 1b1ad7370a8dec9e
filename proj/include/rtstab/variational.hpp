#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/mesh.hpp"

namespace rtstab {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

/// Equilibrium and fluid coefficients at one Gauss point.
struct QuadSample {
  std::size_t element = 0;
  double t = 0.0;  // reference coordinate in [-1, 1]
  double x3 = 0.0;
  double weight = 0.0;  // Gauss weight times element Jacobian
  double rho = 0.0;
  double drho = 0.0;  // d rho / dx3 from the equilibrium ODE
  double dP = 0.0;    // P'(rho)
  double h_prime = 0.0;
  double mu = 0.0;
  double mu_prime = 0.0;
};

/// Samples coefficients at all Gauss points, element by element (4 per element).
inline std::vector<QuadSample> sample_coefficients(const Mesh1D& mesh,
                                                   const EquilibriumProfile& profile,
                                                   const PhysicalParams& params) {
  std::vector<QuadSample> out;
  out.reserve(4 * mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    const Layer layer = mesh.element_layer(e);
    const double h = mesh.element_size(e);
    for (std::size_t q = 0; q < 4; ++q) {
      QuadSample s;
      s.element = e;
      s.t = Gauss4::points[q];
      s.x3 = gauss_point(mesh, e, q);
      s.weight = 0.5 * h * Gauss4::weights[q];
      s.rho = profile.density(s.x3, layer);
      s.dP = profile.law(layer).derivative(s.rho);
      s.drho = -profile.g * s.rho / s.dP;
      s.h_prime = s.dP / s.rho;
      s.mu = params.mu(layer);
      s.mu_prime = params.mu_prime(layer);
      out.push_back(s);
    }
  }
  return out;
}

/// Point coefficients multiplying psi^2 in E0 at the top surface and at the interface.
/// These are half of the surface restoring coefficients of the dynamic conditions.
struct BoundaryCoefficients {
  double top = 0.0;        // (sigma_+ |xi|^2 + rho_1 g) / 2
  double interface = 0.0;  // (sigma_- |xi|^2 - [[rho]] g) / 2
};

inline BoundaryCoefficients boundary_coefficients(const EquilibriumProfile& profile,
                                                  const PhysicalParams& params,
                                                  double xi_abs) {
  const double k2 = xi_abs * xi_abs;
  return {0.5 * (params.sigma_plus * k2 + profile.rho1() * params.g),
          0.5 * (params.sigma_minus * k2 - profile.jump() * params.g)};
}

/// Matrices of E0, E1 and J over the nodal unknowns (all carry the 1/2 factors, so
/// v^T K0 v = E0(v), v^T K1 v = E1(v), v^T M v = J(v)).
struct QuadraticForms {
  SparseMatrix K0;
  SparseMatrix K1;
  SparseMatrix M;
  double xi_abs = 0.0;
  std::size_t n_fields = 2;
  Mesh1D mesh;
  /// Known lower bound of the constrained minimum of E0 (E >= -g|xi| on J = 1).
  double alpha_lower_bound = 0.0;

  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(M.rows()); }

  /// Index of psi at the interface node.
  [[nodiscard]] std::ptrdiff_t interface_psi_dof() const {
    return mesh.dof(mesh.interface_node(), n_fields - 1, n_fields);
  }
};

namespace detail {

/// A linear form sum_f (val[f] * u_f + der[f] * u_f') evaluated at one point.
template <std::size_t NF>
struct LinearForm {
  std::array<double, NF> val{};
  std::array<double, NF> der{};
};

/// Accumulates weight * (form . v)^2 over an element into triplets.
template <std::size_t NF>
class ElementAssembler {
 public:
  ElementAssembler(const Mesh1D& mesh, std::vector<Eigen::Triplet<double>>& out)
      : mesh_(mesh), out_(out) {}

  void add_square(std::size_t e, double t, double weight, const LinearForm<NF>& form) {
    const auto a = local_vector(e, t, form);
    emit(e, [&](std::size_t i, std::size_t j) { return weight * (a[i] * a[j]); });
  }

  /// Symmetrized bilinear term weight * (f1 . v)(f2 . v).
  void add_product(std::size_t e, double t, double weight, const LinearForm<NF>& f1,
                   const LinearForm<NF>& f2) {
    const auto a = local_vector(e, t, f1);
    const auto c = local_vector(e, t, f2);
    emit(e, [&](std::size_t i, std::size_t j) {
      return 0.5 * weight * (a[i] * c[j] + a[j] * c[i]);
    });
  }

 private:
  std::array<double, 2 * NF> local_vector(std::size_t e, double t,
                                          const LinearForm<NF>& form) const {
    const double h = mesh_.element_size(e);
    const std::array<double, 2> N = {0.5 * (1.0 - t), 0.5 * (1.0 + t)};
    const std::array<double, 2> dN = {-1.0 / h, 1.0 / h};
    std::array<double, 2 * NF> a{};
    for (std::size_t n = 0; n < 2; ++n)
      for (std::size_t f = 0; f < NF; ++f)
        a[n * NF + f] = form.val[f] * N[n] + form.der[f] * dN[n];
    return a;
  }

  // Entry values are symmetric expressions in (i, j), so the assembled matrix is
  // bitwise symmetric.
  template <class Entry>
  void emit(std::size_t e, Entry entry) {
    for (std::size_t i = 0; i < 2 * NF; ++i) {
      const auto gi = mesh_.dof(e + i / NF, i % NF, NF);
      if (gi < 0) continue;
      for (std::size_t j = 0; j < 2 * NF; ++j) {
        const auto gj = mesh_.dof(e + j / NF, j % NF, NF);
        if (gj < 0) continue;
        const double v = entry(i, j);
        if (v != 0.0) out_.emplace_back(static_cast<int>(gi), static_cast<int>(gj), v);
      }
    }
  }

  const Mesh1D& mesh_;
  std::vector<Eigen::Triplet<double>>& out_;
};

inline SparseMatrix from_triplets(std::size_t n, const std::vector<Eigen::Triplet<double>>& t) {
  SparseMatrix m(static_cast<int>(n), static_cast<int>(n));
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

inline void add_point(std::vector<Eigen::Triplet<double>>& t, std::ptrdiff_t dof, double c) {
  if (dof >= 0) t.emplace_back(static_cast<int>(dof), static_cast<int>(dof), c);
}

}  // namespace detail

/// Assembles E0, E1, J for the reduced (phi, psi) unknowns at frequency |xi|.
///
/// E0 = (s_- |xi|^2 - [[rho]] g)/2 psi(0)^2 + (s_+ |xi|^2 + rho_1 g)/2 psi(ell)^2
///      + 1/2 int h'(rho) ((rho psi)' + rho |xi| phi)^2
/// E1 = 1/2 int mu ((phi' - |xi| psi)^2 + (psi' - |xi| phi)^2 + (psi' + |xi| phi)^2 / 3)
///                + mu' (psi' + |xi| phi)^2
/// J  = 1/2 int rho (phi^2 + psi^2)
inline QuadraticForms assemble_forms(const Mesh1D& mesh, const EquilibriumProfile& profile,
                                     double xi_abs, const PhysicalParams& params) {
  constexpr std::size_t PHI = 0, PSI = 1;
  const double k = xi_abs;
  const std::size_t n = mesh.num_dofs(2);
  std::vector<Eigen::Triplet<double>> t0, t1, tm;
  detail::ElementAssembler<2> a0(mesh, t0), a1(mesh, t1), am(mesh, tm);

  const auto samples = sample_coefficients(mesh, profile, params);
  for (const QuadSample& s : samples) {
    const std::size_t e = s.element;
    const double t = s.t;
    const double w = s.weight;

    detail::LinearForm<2> div_rho;  // (rho psi)' + rho |xi| phi
    div_rho.val[PHI] = s.rho * k;
    div_rho.val[PSI] = s.drho;
    div_rho.der[PSI] = s.rho;
    a0.add_square(e, t, 0.5 * w * s.h_prime, div_rho);

    detail::LinearForm<2> shear1;  // phi' - |xi| psi
    shear1.der[PHI] = 1.0;
    shear1.val[PSI] = -k;
    detail::LinearForm<2> shear2;  // psi' - |xi| phi
    shear2.der[PSI] = 1.0;
    shear2.val[PHI] = -k;
    detail::LinearForm<2> dilat;  // psi' + |xi| phi
    dilat.der[PSI] = 1.0;
    dilat.val[PHI] = k;
    a1.add_square(e, t, 0.5 * w * s.mu, shear1);
    a1.add_square(e, t, 0.5 * w * s.mu, shear2);
    a1.add_square(e, t, 0.5 * w * (s.mu / 3.0 + s.mu_prime), dilat);

    detail::LinearForm<2> phi, psi;
    phi.val[PHI] = 1.0;
    psi.val[PSI] = 1.0;
    am.add_square(e, t, 0.5 * w * s.rho, phi);
    am.add_square(e, t, 0.5 * w * s.rho, psi);
  }

  const auto bc = boundary_coefficients(profile, params, k);
  detail::add_point(t0, mesh.dof(mesh.interface_node(), PSI, 2), bc.interface);
  detail::add_point(t0, mesh.dof(mesh.top_node(), PSI, 2), bc.top);

  QuadraticForms forms;
  forms.K0 = detail::from_triplets(n, t0);
  forms.K1 = detail::from_triplets(n, t1);
  forms.M = detail::from_triplets(n, tm);
  forms.xi_abs = k;
  forms.n_fields = 2;
  forms.mesh = mesh;
  forms.alpha_lower_bound = -params.g * k;
  return forms;
}

/// E0 in its integrated-by-parts form:
///   s_-|xi|^2/2 psi(0)^2 + s_+|xi|^2/2 psi(ell)^2
///   + 1/2 int P'(rho) rho (psi' + |xi| phi)^2 - 2 g rho |xi| psi phi.
/// Agrees with assemble_forms().K0 whenever the profile is hydrostatic.
inline SparseMatrix assemble_forms_alt(const Mesh1D& mesh, const EquilibriumProfile& profile,
                                       double xi_abs, const PhysicalParams& params) {
  constexpr std::size_t PHI = 0, PSI = 1;
  const double k = xi_abs;
  std::vector<Eigen::Triplet<double>> t0;
  detail::ElementAssembler<2> a0(mesh, t0);
  for (const QuadSample& s : sample_coefficients(mesh, profile, params)) {
    const std::size_t e = s.element;
    const double t = s.t;
    const double w = s.weight;
    detail::LinearForm<2> dilat;
    dilat.der[PSI] = 1.0;
    dilat.val[PHI] = k;
    a0.add_square(e, t, 0.5 * w * s.dP * s.rho, dilat);
    detail::LinearForm<2> phi, psi;
    phi.val[PHI] = 1.0;
    psi.val[PSI] = 1.0;
    a0.add_product(e, t, -w * profile.g * s.rho * k, psi, phi);
  }
  const double k2 = k * k;
  detail::add_point(t0, mesh.dof(mesh.interface_node(), PSI, 2), 0.5 * params.sigma_minus * k2);
  detail::add_point(t0, mesh.dof(mesh.top_node(), PSI, 2), 0.5 * params.sigma_plus * k2);
  return detail::from_triplets(mesh.num_dofs(2), t0);
}

/// Three-field (phi, theta, psi) forms at a general frequency xi = (xi1, xi2), for the
/// velocity profile u = (-i phi, -i theta, psi) e^{i xi.x'}. E1 is half the viscous
/// dissipation mu/2 |D0 u|^2 + mu' |div u|^2 of that mode.
inline QuadraticForms assemble_forms_3field(const Mesh1D& mesh,
                                            const EquilibriumProfile& profile, double xi1,
                                            double xi2, const PhysicalParams& params) {
  constexpr std::size_t PHI = 0, THETA = 1, PSI = 2;
  const std::size_t n = mesh.num_dofs(3);
  std::vector<Eigen::Triplet<double>> t0, t1, tm;
  detail::ElementAssembler<3> a0(mesh, t0), a1(mesh, t1), am(mesh, tm);

  for (const QuadSample& s : sample_coefficients(mesh, profile, params)) {
    const std::size_t e = s.element;
    const double t = s.t;
    const double w = s.weight;

    detail::LinearForm<3> div_rho;
    div_rho.val[PHI] = s.rho * xi1;
    div_rho.val[THETA] = s.rho * xi2;
    div_rho.val[PSI] = s.drho;
    div_rho.der[PSI] = s.rho;
    a0.add_square(e, t, 0.5 * w * s.h_prime, div_rho);

    detail::LinearForm<3> div;  // xi1 phi + xi2 theta + psi'
    div.val[PHI] = xi1;
    div.val[THETA] = xi2;
    div.der[PSI] = 1.0;
    auto deviatoric = [&](std::size_t field, bool vertical, double xi) {
      detail::LinearForm<3> f;
      f.val[PHI] = -2.0 / 3.0 * xi1;
      f.val[THETA] = -2.0 / 3.0 * xi2;
      f.der[PSI] = -2.0 / 3.0;
      if (vertical) f.der[field] += 2.0;
      else f.val[field] += 2.0 * xi;
      return f;
    };
    a1.add_square(e, t, 0.25 * w * s.mu, deviatoric(PHI, false, xi1));
    a1.add_square(e, t, 0.25 * w * s.mu, deviatoric(THETA, false, xi2));
    a1.add_square(e, t, 0.25 * w * s.mu, deviatoric(PSI, true, 0.0));
    detail::LinearForm<3> d12, d13, d23;
    d12.val[PHI] = xi2;
    d12.val[THETA] = xi1;
    d13.val[PSI] = xi1;
    d13.der[PHI] = -1.0;
    d23.val[PSI] = xi2;
    d23.der[THETA] = -1.0;
    a1.add_square(e, t, 0.5 * w * s.mu, d12);
    a1.add_square(e, t, 0.5 * w * s.mu, d13);
    a1.add_square(e, t, 0.5 * w * s.mu, d23);
    a1.add_square(e, t, 0.5 * w * s.mu_prime, div);

    for (std::size_t f = 0; f < 3; ++f) {
      detail::LinearForm<3> v;
      v.val[f] = 1.0;
      am.add_square(e, t, 0.5 * w * s.rho, v);
    }
  }

  const double k = std::hypot(xi1, xi2);
  const auto bc = boundary_coefficients(profile, params, k);
  detail::add_point(t0, mesh.dof(mesh.interface_node(), PSI, 3), bc.interface);
  detail::add_point(t0, mesh.dof(mesh.top_node(), PSI, 3), bc.top);

  QuadraticForms forms;
  forms.K0 = detail::from_triplets(n, t0);
  forms.K1 = detail::from_triplets(n, t1);
  forms.M = detail::from_triplets(n, tm);
  forms.xi_abs = k;
  forms.n_fields = 3;
  forms.mesh = mesh;
  forms.alpha_lower_bound = -params.g * k;
  return forms;
}

struct EnergyValue {
  double E = 0.0;
  double J = 0.0;
};

/// E(v; s) = v^T (K0 + s K1) v and J(v) = v^T M v.
inline EnergyValue evaluate_energy(const QuadraticForms& forms, const Vector& v, double s) {
  return {v.dot(forms.K0 * v) + s * v.dot(forms.K1 * v), v.dot(forms.M * v)};
}

/// Coordinate text dump ("row col value", 0-based, one entry per line).
inline void write_coordinate(const SparseMatrix& m, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot open " + path);
  os.precision(17);
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int c = 0; c < m.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(m, c); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

}  // namespace rtstab
