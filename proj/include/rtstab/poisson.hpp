#pragma once

#include <cmath>
#include <complex>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <fftw3.h>

#include "rtstab/error.hpp"

namespace rtstab {

/// Samples of a real function on the (2 pi L1) x (2 pi L2) torus, row-major N1 x N2:
/// values[i * N2 + j] = f(2 pi L1 i / N1, 2 pi L2 j / N2).
struct PeriodicField {
  std::size_t N1 = 0;
  std::size_t N2 = 0;
  double L1 = 1.0;
  double L2 = 1.0;
  std::vector<double> values;

  [[nodiscard]] double& at(std::size_t i, std::size_t j) { return values[i * N2 + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return values[i * N2 + j]; }
  [[nodiscard]] double x1(std::size_t i) const {
    return 2.0 * std::numbers::pi * L1 * static_cast<double>(i) / static_cast<double>(N1);
  }
  [[nodiscard]] double x2(std::size_t j) const {
    return 2.0 * std::numbers::pi * L2 * static_cast<double>(j) / static_cast<double>(N2);
  }

  void validate() const {
    require(N1 >= 2 && N2 >= 2, ErrorCode::InvalidInput, "grid sizes must be >= 2");
    require(L1 > 0.0 && L2 > 0.0, ErrorCode::InvalidInput, "periods must be positive");
    require(values.size() == N1 * N2, ErrorCode::InvalidInput,
            "grid holds " + std::to_string(values.size()) + " values, expected N1 * N2");
  }
};

inline PeriodicField make_field(std::size_t N1, std::size_t N2, double L1, double L2) {
  PeriodicField f{N1, N2, L1, L2, std::vector<double>(N1 * N2, 0.0)};
  f.validate();
  return f;
}

/// Matching order m, exponents 0 < lambda_0 < ... < lambda_m and coefficients alpha.
struct ExtensionParams {
  std::vector<double> lambdas;
  std::vector<double> alphas;
  [[nodiscard]] std::size_t m() const { return lambdas.size() - 1; }
};

/// sum_j alpha_j (-lambda_j)^l, summed in double precision.
inline double vandermonde_moment(const std::vector<double>& lambdas,
                                 const std::vector<double>& alphas, int l) {
  double s = 0.0;
  for (std::size_t j = 0; j < lambdas.size(); ++j) s += alphas[j] * std::pow(-lambdas[j], l);
  return s;
}

/// Solves V alpha = (1, ..., 1) with V_ij = (-lambda_j)^i. The solution is the Lagrange
/// basis on the nodes -lambda_j evaluated at 1, alpha_j = prod_{k != j} (1 + lambda_k) /
/// (lambda_k - lambda_j), which is exact for integer exponents.
inline std::vector<double> vandermonde_coeffs(const std::vector<double>& lambdas) {
  require(!lambdas.empty(), ErrorCode::InvalidInput, "need at least one exponent");
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    require(std::isfinite(lambdas[j]) && lambdas[j] > 0.0, ErrorCode::InvalidInput,
            "exponents must be positive");
    if (j > 0)
      require(lambdas[j] > lambdas[j - 1], ErrorCode::InvalidInput,
              "exponents must be strictly increasing");
  }
  const std::size_t n = lambdas.size();
  std::vector<double> alphas(n);
  for (std::size_t j = 0; j < n; ++j) {
    long double p = 1.0L;
    for (std::size_t k = 0; k < n; ++k) {
      if (k == j) continue;
      p *= (1.0L + lambdas[k]) / (static_cast<long double>(lambdas[k]) - lambdas[j]);
    }
    alphas[j] = static_cast<double>(p);
  }
  for (std::size_t l = 0; l < n; ++l) {
    const double r = std::abs(vandermonde_moment(lambdas, alphas, static_cast<int>(l)) - 1.0);
    require(r <= 1e-8, ErrorCode::IllConditioned,
            "Vandermonde residual " + std::to_string(r) + " at row " + std::to_string(l) +
                " (exponents too closely spaced)");
  }
  return alphas;
}

/// Default exponents lambda_j = j + 1.
inline ExtensionParams default_extension(std::size_t m) {
  ExtensionParams p;
  for (std::size_t j = 0; j <= m; ++j) p.lambdas.push_back(static_cast<double>(j + 1));
  p.alphas = vandermonde_coeffs(p.lambdas);
  return p;
}

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace detail

/// Fourier coefficients f^(xi) = int f e^{-i xi.x'} / (2 pi sqrt(L1 L2)) dx' of a sampled
/// field, stored in the half-spectrum layout of a real transform (N1 x (N2/2 + 1)).
class Spectrum {
 public:
  explicit Spectrum(const PeriodicField& f)
      : N1_(f.N1), N2_(f.N2), L1_(f.L1), L2_(f.L2), coeffs_(f.N1 * (f.N2 / 2 + 1)) {
    f.validate();
    std::vector<double> in = f.values;
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      plan = fftw_plan_dft_r2c_2d(static_cast<int>(N1_), static_cast<int>(N2_), in.data(),
                                  reinterpret_cast<fftw_complex*>(coeffs_.data()),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    const double norm = 2.0 * std::numbers::pi * std::sqrt(L1_ * L2_) /
                        static_cast<double>(N1_ * N2_);
    for (auto& c : coeffs_) c *= norm;
  }

  [[nodiscard]] std::size_t half() const noexcept { return N2_ / 2 + 1; }

  /// |xi| of the coefficient at (row a, half-column b).
  [[nodiscard]] double xi_abs(std::size_t a, std::size_t b) const {
    const auto m = static_cast<double>(a <= N1_ / 2 ? static_cast<long>(a)
                                                    : static_cast<long>(a) - static_cast<long>(N1_));
    const auto n = static_cast<double>(b);
    return std::hypot(m / L1_, n / L2_);
  }

  [[nodiscard]] std::complex<double> coeff(std::size_t a, std::size_t b) const {
    return coeffs_[a * half() + b];
  }

  /// Field whose coefficients are f^(xi) * multiplier(|xi|), sampled on the same grid.
  template <class Multiplier>
  [[nodiscard]] PeriodicField synthesize(Multiplier mult) const {
    std::vector<std::complex<double>> c(coeffs_.size());
    const double inv = 1.0 / (2.0 * std::numbers::pi * std::sqrt(L1_ * L2_));
    for (std::size_t a = 0; a < N1_; ++a)
      for (std::size_t b = 0; b < half(); ++b)
        c[a * half() + b] = coeffs_[a * half() + b] * mult(xi_abs(a, b)) * inv;
    PeriodicField out{N1_, N2_, L1_, L2_, std::vector<double>(N1_ * N2_)};
    fftw_plan plan;
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      plan = fftw_plan_dft_c2r_2d(static_cast<int>(N1_), static_cast<int>(N2_),
                                  reinterpret_cast<fftw_complex*>(c.data()), out.values.data(),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard<std::mutex> lock(detail::fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
    return out;
  }

 private:
  std::size_t N1_, N2_;
  double L1_, L2_;
  std::vector<std::complex<double>> coeffs_;
};

/// Downward extension from the plane x3 = j: multiplier e^{|xi| (x3 - j)}.
class DownwardExtension {
 public:
  DownwardExtension(const PeriodicField& f, double level) : spec_(f), level_(level) {}

  /// d^l/dx3^l of the extension at height x3 (x3 <= level).
  [[nodiscard]] PeriodicField evaluate(double x3, int l = 0) const {
    require(x3 <= level_, ErrorCode::DomainError, "downward extension needs x3 <= level");
    return spec_.synthesize([&](double k) { return multiplier(k, x3 - level_, l); });
  }

  [[nodiscard]] static double multiplier(double k, double depth, int l) {
    return std::pow(k, l) * std::exp(k * depth);
  }

 private:
  Spectrum spec_;
  double level_;
};

/// Upward extension from x3 = 0 with multiplier sum_j alpha_j e^{-|xi| lambda_j x3}.
class UpwardExtension {
 public:
  UpwardExtension(const PeriodicField& f, ExtensionParams params)
      : spec_(f), params_(std::move(params)) {
    require(params_.lambdas.size() == params_.alphas.size() && !params_.lambdas.empty(),
            ErrorCode::InvalidInput, "extension parameters are inconsistent");
  }

  [[nodiscard]] PeriodicField evaluate(double x3, int l = 0) const {
    require(x3 >= 0.0, ErrorCode::DomainError, "upward extension needs x3 >= 0");
    return spec_.synthesize([&](double k) { return multiplier(params_, k, x3, l); });
  }

  [[nodiscard]] static double multiplier(const ExtensionParams& p, double k, double x3, int l) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.lambdas.size(); ++j) {
      const double r = -k * p.lambdas[j];
      s += p.alphas[j] * std::pow(r, l) * std::exp(r * x3);
    }
    return s;
  }

 private:
  Spectrum spec_;
  ExtensionParams params_;
};

/// Two-sided extension of a field on the internal interface: the downward extension from
/// 0 below, the specialized upward extension above. Derivatives in x3 of order <= m agree
/// across x3 = 0.
class InterfaceExtension {
 public:
  InterfaceExtension(const PeriodicField& f, ExtensionParams params)
      : down_(f, 0.0), up_(f, std::move(params)) {}

  [[nodiscard]] PeriodicField evaluate(double x3, int l = 0) const {
    return x3 > 0.0 ? up_.evaluate(x3, l) : down_.evaluate(x3, l);
  }
  [[nodiscard]] PeriodicField evaluate_below(double x3, int l = 0) const {
    return down_.evaluate(x3, l);
  }
  [[nodiscard]] PeriodicField evaluate_above(double x3, int l = 0) const {
    return up_.evaluate(x3, l);
  }

 private:
  DownwardExtension down_;
  UpwardExtension up_;
};

inline DownwardExtension extend_down(const PeriodicField& f, double level) {
  return DownwardExtension(f, level);
}
inline UpwardExtension extend_up_specialized(const PeriodicField& f, ExtensionParams p) {
  return UpwardExtension(f, std::move(p));
}
inline InterfaceExtension extend_interface(const PeriodicField& f, ExtensionParams p) {
  return InterfaceExtension(f, std::move(p));
}

/// Grid CSV: "N1,N2,L1,L2" header line, a values line, then N1 rows of N2 values.
inline void write_field(const PeriodicField& f, std::ostream& os) {
  os.precision(17);
  os << "N1,N2,L1,L2\n" << f.N1 << ',' << f.N2 << ',' << f.L1 << ',' << f.L2 << '\n';
  for (std::size_t i = 0; i < f.N1; ++i) {
    for (std::size_t j = 0; j < f.N2; ++j) os << (j ? "," : "") << f.at(i, j);
    os << '\n';
  }
}

inline void write_field(const PeriodicField& f, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write grid to " + path);
  write_field(f, os);
}

inline PeriodicField read_field(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::IoError, "cannot read grid " + path);
  std::string line;
  std::getline(is, line);
  require(line.rfind("N1", 0) == 0, ErrorCode::IoError, path + ": missing N1,N2,L1,L2 header");
  std::getline(is, line);
  for (char& c : line) if (c == ',') c = ' ';
  PeriodicField f;
  std::istringstream hs(line);
  hs >> f.N1 >> f.N2 >> f.L1 >> f.L2;
  require(!hs.fail(), ErrorCode::IoError, path + ": malformed grid header");
  f.values.reserve(f.N1 * f.N2);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    for (char& c : line) if (c == ',') c = ' ';
    std::istringstream ss(line);
    double v;
    while (ss >> v) f.values.push_back(v);
  }
  f.validate();
  return f;
}

}  // namespace rtstab
