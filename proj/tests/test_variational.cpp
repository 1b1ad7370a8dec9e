#include <random>

#include <gtest/gtest.h>

#include "scenarios.hpp"

using namespace rtstab;

namespace {

struct Fixture {
  test::Scenario sc = test::isothermal_unstable();
  EquilibriumProfile prof = sc.profile();
  Mesh1D mesh = build_mesh(1.0, 1.0, 20, 20);
};

Vector random_vector(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d;
  Vector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = d(gen);
  return v;
}

}  // namespace

TEST(Variational, MatricesAreSymmetric) {
  Fixture f;
  const auto forms = assemble_forms(f.mesh, f.prof, 2.0, f.sc.params);
  for (const SparseMatrix* m : {&forms.K0, &forms.K1, &forms.M}) {
    const SparseMatrix d = *m - SparseMatrix(m->transpose());
    EXPECT_LT(d.norm(), 1e-12 * m->norm());
  }
  EXPECT_EQ(forms.size(), 2 * (20 + 20));
}

TEST(Variational, ViscousAndMassFormsArePositive) {
  Fixture f;
  const auto forms = assemble_forms(f.mesh, f.prof, 1.5, f.sc.params);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const Vector v = random_vector(forms.size(), seed);
    EXPECT_GT(v.dot(forms.K1 * v), 0.0);
    EXPECT_GT(v.dot(forms.M * v), 0.0);
  }
}

TEST(Variational, AlternateE0FormAgrees) {
  Fixture f;
  for (double xi : {0.5, 1.0, 3.0}) {
    const auto forms = assemble_forms(f.mesh, f.prof, xi, f.sc.params);
    const SparseMatrix alt = assemble_forms_alt(f.mesh, f.prof, xi, f.sc.params);
    for (unsigned seed = 0; seed < 5; ++seed) {
      const Vector v = random_vector(forms.size(), seed);
      const double a = v.dot(forms.K0 * v), b = v.dot(alt * v);
      EXPECT_NEAR(a, b, 1e-6 * (std::abs(a) + v.dot(forms.M * v)));
    }
  }
}

TEST(Variational, MassFormIsDensityWeightedL2) {
  Fixture f;
  const auto forms = assemble_forms(f.mesh, f.prof, 1.0, f.sc.params);
  // phi = 1 on every non-removed node, psi = 0: J = 1/2 int rho (piecewise linear 1 except
  // the bottom element, where phi ramps from 0).
  Vector v = Vector::Zero(static_cast<Eigen::Index>(forms.size()));
  for (std::size_t i = 0; i < forms.size(); i += 2) v[static_cast<Eigen::Index>(i)] = 1.0;
  const double J = v.dot(forms.M * v);
  const double full = 0.5 * ((std::exp(1.0) - 1.0) + std::exp(1.0) * (std::exp(0.5) - 1.0));
  EXPECT_LT(J, full);
  EXPECT_GT(J, 0.9 * full);
}

TEST(Variational, EnergyBoundedBelow) {
  for (const auto& sc : test::unstable_family()) {
    const auto prof = sc.profile();
    const auto mesh = build_mesh(sc.params.b, sc.params.ell, 15, 15);
    const double xi = 1.7;
    const auto forms = assemble_forms(mesh, prof, xi, sc.params);
    for (unsigned seed = 0; seed < 20; ++seed) {
      Vector v = random_vector(forms.size(), seed);
      v /= std::sqrt(v.dot(forms.M * v));
      EXPECT_GE(evaluate_energy(forms, v, 0.1).E, -sc.params.g * xi - 1e-10) << sc.name;
    }
  }
}

TEST(Variational, ThreeFieldReducesAtZeroTheta) {
  Fixture f;
  const auto two = assemble_forms(f.mesh, f.prof, 1.2, f.sc.params);
  const auto three = assemble_forms_3field(f.mesh, f.prof, 1.2, 0.0, f.sc.params);
  const Vector v2 = random_vector(two.size(), 3);
  Vector v3 = Vector::Zero(static_cast<Eigen::Index>(three.size()));
  for (std::size_t i = 0; i < two.size() / 2; ++i) {
    v3[static_cast<Eigen::Index>(3 * i)] = v2[static_cast<Eigen::Index>(2 * i)];
    v3[static_cast<Eigen::Index>(3 * i + 2)] = v2[static_cast<Eigen::Index>(2 * i + 1)];
  }
  const auto e2 = evaluate_energy(two, v2, 0.3), e3 = evaluate_energy(three, v3, 0.3);
  EXPECT_NEAR(e2.E, e3.E, 1e-12 * std::abs(e2.E));
  EXPECT_NEAR(e2.J, e3.J, 1e-12 * e2.J);
}

TEST(Variational, CoordinateExport) {
  Fixture f;
  const auto forms = assemble_forms(f.mesh, f.prof, 1.0, f.sc.params);
  const std::string path = ::testing::TempDir() + "k0.mtx";
  write_coordinate(forms.K0, path);
  std::ifstream is(path);
  std::string first;
  std::getline(is, first);
  EXPECT_FALSE(first.empty());
  EXPECT_THROW(write_coordinate(forms.K0, "/nonexistent/dir/k0.mtx"), Error);
}
