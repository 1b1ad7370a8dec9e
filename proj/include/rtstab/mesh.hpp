#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"

namespace rtstab {

/// Uniform-per-layer 1D mesh on [-b, ell] with a shared node at x3 = 0.
///
/// Unknowns are nodal values of `n_fields` continuous piecewise-linear fields. Node 0
/// (x3 = -b) carries the essential condition and has no degrees of freedom; the remaining
/// nodes are numbered node-major: dof(i, f) = (i - 1) * n_fields + f.
struct Mesh1D {
  double b = 1.0;
  double ell = 1.0;
  std::size_t n_minus = 0;  // elements in the lower layer
  std::size_t n_plus = 0;   // elements in the upper layer
  std::vector<double> nodes;

  [[nodiscard]] std::size_t num_nodes() const noexcept { return nodes.size(); }
  [[nodiscard]] std::size_t num_elements() const noexcept { return n_minus + n_plus; }
  [[nodiscard]] std::size_t interface_node() const noexcept { return n_minus; }
  [[nodiscard]] std::size_t top_node() const noexcept { return nodes.size() - 1; }

  [[nodiscard]] Layer element_layer(std::size_t e) const noexcept {
    return e < n_minus ? Layer::lower : Layer::upper;
  }
  [[nodiscard]] double element_size(std::size_t e) const noexcept {
    return nodes[e + 1] - nodes[e];
  }

  [[nodiscard]] std::size_t num_dofs(std::size_t n_fields) const noexcept {
    return n_fields * (nodes.size() - 1);
  }

  /// Global dof of field f at node i, or -1 for the constrained bottom node.
  [[nodiscard]] std::ptrdiff_t dof(std::size_t node, std::size_t field,
                                   std::size_t n_fields) const noexcept {
    if (node == 0) return -1;
    return static_cast<std::ptrdiff_t>((node - 1) * n_fields + field);
  }
};

inline Mesh1D build_mesh(double b, double ell, std::size_t n_minus, std::size_t n_plus) {
  require(n_minus >= 2 && n_plus >= 2, ErrorCode::PreconditionViolation,
          "build_mesh needs at least 2 elements per layer");
  require(b > 0.0 && ell > 0.0, ErrorCode::PreconditionViolation,
          "build_mesh needs positive layer depths");
  Mesh1D mesh;
  mesh.b = b;
  mesh.ell = ell;
  mesh.n_minus = n_minus;
  mesh.n_plus = n_plus;
  mesh.nodes.resize(n_minus + n_plus + 1);
  for (std::size_t i = 0; i <= n_minus; ++i)
    mesh.nodes[i] = -b + b * static_cast<double>(i) / static_cast<double>(n_minus);
  for (std::size_t i = 1; i <= n_plus; ++i)
    mesh.nodes[n_minus + i] = ell * static_cast<double>(i) / static_cast<double>(n_plus);
  mesh.nodes[n_minus] = 0.0;
  mesh.nodes.back() = ell;
  return mesh;
}

/// Four-point Gauss-Legendre rule on [-1, 1].
struct Gauss4 {
  static constexpr std::array<double, 4> points = {-0.8611363115940526, -0.3399810435848563,
                                                   0.3399810435848563, 0.8611363115940526};
  static constexpr std::array<double, 4> weights = {0.3478548451374538, 0.6521451548625461,
                                                    0.6521451548625461, 0.3478548451374538};
};

/// Physical coordinate of Gauss point q on element e.
inline double gauss_point(const Mesh1D& mesh, std::size_t e, std::size_t q) {
  const double x0 = mesh.nodes[e];
  const double h = mesh.element_size(e);
  return x0 + 0.5 * h * (1.0 + Gauss4::points[q]);
}

}  // namespace rtstab
