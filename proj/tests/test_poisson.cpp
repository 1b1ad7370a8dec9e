#include <numbers>

#include <gtest/gtest.h>

#include "rtstab/poisson.hpp"

using namespace rtstab;

namespace {

// f = cos(x1 / L1) + 0.5 sin(2 x2 / L2) + 0.25 cos(x1 / L1 + x2 / L2)
PeriodicField sample(std::size_t N1, std::size_t N2, double L1, double L2) {
  auto f = make_field(N1, N2, L1, L2);
  for (std::size_t i = 0; i < N1; ++i)
    for (std::size_t j = 0; j < N2; ++j) {
      const double a = f.x1(i) / L1, b = f.x2(j) / L2;
      f.at(i, j) = std::cos(a) + 0.5 * std::sin(2 * b) + 0.25 * std::cos(a + b);
    }
  return f;
}

double max_abs_diff(const PeriodicField& a, const PeriodicField& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k)
    m = std::max(m, std::abs(a.values[k] - b.values[k]));
  return m;
}

}  // namespace

TEST(Poisson, VandermondeMoments) {
  for (std::size_t m = 0; m <= 6; ++m) {
    const auto p = default_extension(m);
    for (int l = 0; l <= static_cast<int>(m); ++l)
      EXPECT_NEAR(vandermonde_moment(p.lambdas, p.alphas, l), 1.0, 1e-10);
  }
}

TEST(Poisson, VandermondeClosedFormSmallCase) {
  // m = 1, lambda = (1, 2): alpha_0 + alpha_1 = 1, -alpha_0 - 2 alpha_1 = 1.
  const auto a = vandermonde_coeffs({1.0, 2.0});
  EXPECT_NEAR(a[0], 3.0, 1e-15);
  EXPECT_NEAR(a[1], -2.0, 1e-15);
}

TEST(Poisson, RejectsBadExponents) {
  EXPECT_THROW(vandermonde_coeffs({2.0, 1.0}), Error);
  EXPECT_THROW(vandermonde_coeffs({0.0, 1.0}), Error);
}

TEST(Poisson, SingleModeDecay) {
  const auto f = sample(16, 16, 1.0, 1.0);
  auto g = make_field(16, 16, 1.0, 1.0);
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) g.at(i, j) = std::cos(g.x1(i));
  const auto down = extend_down(g, 0.0).evaluate(-0.7);
  for (std::size_t i = 0; i < 16; ++i)
    EXPECT_NEAR(down.at(i, 3), std::exp(-0.7) * std::cos(g.x1(i)), 1e-14);
  (void)f;
}

TEST(Poisson, TraceAndMatching) {
  const auto f = sample(32, 24, 1.3, 0.8);
  for (std::size_t m = 0; m <= 4; ++m) {
    const auto ext = extend_interface(f, default_extension(m));
    EXPECT_LT(max_abs_diff(ext.evaluate_above(0.0), f), 1e-12);
    EXPECT_LT(max_abs_diff(ext.evaluate_below(0.0), f), 1e-12);
    for (int l = 1; l <= static_cast<int>(m); ++l) {
      const auto a = ext.evaluate_above(0.0, l), b = ext.evaluate_below(0.0, l);
      EXPECT_LT(max_abs_diff(a, b), 1e-10 * std::pow(4.0, l)) << "m=" << m << " l=" << l;
    }
    const auto a = ext.evaluate_above(0.0, static_cast<int>(m) + 1);
    const auto b = ext.evaluate_below(0.0, static_cast<int>(m) + 1);
    EXPECT_GT(max_abs_diff(a, b), 1e-3);
  }
}

TEST(Poisson, DomainChecks) {
  const auto f = sample(8, 8, 1.0, 1.0);
  EXPECT_THROW(extend_down(f, 0.0).evaluate(0.5), Error);
  EXPECT_THROW(extend_up_specialized(f, default_extension(2)).evaluate(-0.5), Error);
  PeriodicField bad{4, 4, 1.0, 1.0, std::vector<double>(3, 0.0)};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Poisson, FieldRoundTrip) {
  const auto f = sample(6, 5, 1.0, 2.0);
  const std::string path = ::testing::TempDir() + "field.csv";
  write_field(f, path);
  const auto g = read_field(path);
  EXPECT_EQ(g.N1, 6u);
  EXPECT_EQ(g.N2, 5u);
  EXPECT_EQ(g.L2, 2.0);
  EXPECT_EQ(max_abs_diff(f, g), 0.0);
}
