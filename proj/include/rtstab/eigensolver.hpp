#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rtstab/error.hpp"
#include "rtstab/variational.hpp"

namespace rtstab {

enum class EigenMethod { automatic, dense, iterative };

struct EigenOptions {
  EigenMethod method = EigenMethod::automatic;
  /// automatic switches to the iterative solver above this many unknowns.
  std::size_t dense_limit = 600;
  /// Backward error ||A x - a M x|| / ((||A|| + |a| ||M||) ||x||) for the iterative solver.
  double tol = 1e-13;
  int max_iterations = 1000;
  int block_size = 6;
};

struct EigenPair {
  double alpha = 0.0;
  Vector vector;  // M-normalized: v^T M v = 1
  int iterations = 0;
};

namespace detail {

/// Smallest eigenpair of A v = a M v with M SPD, via Cholesky reduction.
inline EigenPair dense_smallest(const SparseMatrix& A, const SparseMatrix& M) {
  const Eigen::MatrixXd Ad(A);
  const Eigen::MatrixXd Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(
      Ad, Md, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  require(ges.info() == Eigen::Success, ErrorCode::SolverDivergence,
          "dense generalized eigensolver failed");
  EigenPair out;
  out.alpha = ges.eigenvalues()(0);
  out.vector = ges.eigenvectors().col(0);
  out.vector /= std::sqrt(out.vector.dot(M * out.vector));
  return out;
}

/// Shift-invert block subspace iteration with Rayleigh-Ritz projection. The shift must
/// lie below the spectrum; it is lowered until A - shift M factors as SPD. Every few
/// iterations the shift is moved up toward the current Ritz value; a successful Cholesky
/// factorization certifies that the new shift is still below the spectrum.
inline EigenPair iterative_smallest(const SparseMatrix& A, const SparseMatrix& M,
                                    double shift, const EigenOptions& opts) {
  const auto n = A.rows();
  const int p = static_cast<int>(std::min<Eigen::Index>(opts.block_size, n));

  Eigen::SimplicialLLT<SparseMatrix> llt;
  for (int attempt = 0;; ++attempt) {
    llt.compute(SparseMatrix(A - shift * M));
    if (llt.info() == Eigen::Success) break;
    require(attempt < 60, ErrorCode::SolverDivergence,
            "no shift below the spectrum was found");
    shift -= 2.0 * std::abs(shift) + 1.0;
  }

  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd X(n, p);
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = unif(rng);

  auto inf_norm = [](const SparseMatrix& m) {
    Vector rows = Vector::Zero(m.rows());
    for (int c = 0; c < m.outerSize(); ++c)
      for (SparseMatrix::InnerIterator it(m, c); it; ++it) rows(it.row()) += std::abs(it.value());
    return rows.maxCoeff();
  };
  const double normA = inf_norm(A);
  const double normM = inf_norm(M);
  int next_update = 4;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXd Y = llt.solve(M * X);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Y);
    Y = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd Ar = Y.transpose() * (A * Y);
    const Eigen::MatrixXd Mr = Y.transpose() * (M * Y);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> small(
        0.5 * (Ar + Ar.transpose()), 0.5 * (Mr + Mr.transpose()),
        Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    require(small.info() == Eigen::Success, ErrorCode::SolverDivergence,
            "Rayleigh-Ritz projection failed");
    X = Y * small.eigenvectors();

    const double alpha = small.eigenvalues()(0);
    Vector x = X.col(0);
    const Vector Mx = M * x;
    const double res = (A * x - alpha * Mx).norm() / ((normA + std::abs(alpha) * normM) * x.norm());
    if (res <= opts.tol) {
      EigenPair out;
      out.alpha = alpha;
      out.vector = x / std::sqrt(x.dot(Mx));
      out.iterations = it;
      return out;
    }

    if (it == next_update && p > 1) {
      next_update *= 2;
      // Ritz values bound the spectrum from above, so alpha - delta is a candidate shift.
      double delta = 0.05 * (small.eigenvalues()(1) - alpha);
      Eigen::SimplicialLLT<SparseMatrix> trial;
      while (alpha - delta > shift && delta > 0.0) {
        trial.compute(SparseMatrix(A - (alpha - delta) * M));
        if (trial.info() == Eigen::Success) {
          shift = alpha - delta;
          llt.compute(SparseMatrix(A - shift * M));
          break;
        }
        delta *= 4.0;
      }
    }
  }
  throw Error(ErrorCode::SolverDivergence,
              "subspace iteration did not converge in " + std::to_string(opts.max_iterations) +
                  " iterations");
}

inline void fix_sign(EigenPair& pair, std::ptrdiff_t sign_dof) {
  if (sign_dof >= 0 && pair.vector(sign_dof) < 0.0) pair.vector = -pair.vector;
}

}  // namespace detail

/// alpha(s): smallest eigenpair of (K0 + s K1) v = alpha M v, i.e. the minimum of
/// E(.; s) on J = 1. The minimizer is M-normalized with psi(0) >= 0.
inline EigenPair min_eig(const QuadraticForms& forms, double s, const EigenOptions& opts = {}) {
  require(s > 0.0 && std::isfinite(s), ErrorCode::PreconditionViolation,
          "min_eig needs s > 0");
  const SparseMatrix A = forms.K0 + s * forms.K1;
  const bool dense = opts.method == EigenMethod::dense ||
                     (opts.method == EigenMethod::automatic && forms.size() <= opts.dense_limit);
  EigenPair pair = dense ? detail::dense_smallest(A, forms.M)
                         : detail::iterative_smallest(A, forms.M,
                                                      forms.alpha_lower_bound - 1.0, opts);
  detail::fix_sign(pair, forms.interface_psi_dof());
  return pair;
}

}  // namespace rtstab
