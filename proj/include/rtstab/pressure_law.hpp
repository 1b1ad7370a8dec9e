#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "rtstab/error.hpp"

namespace rtstab {

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)), m_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_.front() = d.front();
    m_.back() = d.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) continue;
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double w1 = 2.0 * h1 + h0;
      const double w2 = h1 + 2.0 * h0;
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }

  [[nodiscard]] double operator()(double x) const {
    const auto [i, t, h] = locate(x);
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
  }

  [[nodiscard]] double prime(double x) const {
    const auto [i, t, h] = locate(x);
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * y_[i] + (6 * t - 6 * t2) * y_[i + 1]) / h +
           (3 * t2 - 4 * t + 1) * m_[i] + (3 * t2 - 2 * t) * m_[i + 1];
  }

 private:
  struct Cell {
    std::size_t i;
    double t;
    double h;
  };

  [[nodiscard]] Cell locate(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    return {i, (x - x_[i]) / h, h};
  }

  std::vector<double> x_, y_, m_;
};

enum class LawKind { isothermal, polytropic, tabulated };

constexpr std::string_view to_string(LawKind kind) noexcept {
  switch (kind) {
    case LawKind::isothermal: return "isothermal";
    case LawKind::polytropic: return "polytropic";
    case LawKind::tabulated: return "tabulated";
  }
  return "unknown";
}

/// Barotropic pressure law P(rho) with derivative and inverse.
///
/// isothermal: P = K rho; polytropic: P = K rho^gamma (gamma >= 1);
/// tabulated: monotone cubic (PCHIP) through strictly increasing (rho, p) samples.
class PressureLaw {
 public:
  static PressureLaw isothermal(double K) {
    require(K > 0.0 && std::isfinite(K), ErrorCode::InvalidInput,
            "isothermal law requires K > 0");
    PressureLaw law;
    law.kind_ = LawKind::isothermal;
    law.K_ = K;
    return law;
  }

  static PressureLaw polytropic(double K, double gamma) {
    require(K > 0.0 && std::isfinite(K), ErrorCode::InvalidInput,
            "polytropic law requires K > 0");
    require(gamma >= 1.0 && std::isfinite(gamma), ErrorCode::InvalidInput,
            "polytropic law requires gamma >= 1");
    PressureLaw law;
    law.kind_ = LawKind::polytropic;
    law.K_ = K;
    law.gamma_ = gamma;
    return law;
  }

  static PressureLaw tabulated(std::vector<double> rho, std::vector<double> p) {
    require(rho.size() == p.size(), ErrorCode::InvalidInput,
            "tabulated law: rho and p tables differ in length");
    require(rho.size() >= 4, ErrorCode::InvalidInput,
            "tabulated law needs at least four samples");
    for (std::size_t i = 0; i < rho.size(); ++i) {
      require(rho[i] > 0.0 && p[i] > 0.0, ErrorCode::InvalidInput,
              "tabulated law: samples must be positive");
      if (i > 0) {
        require(rho[i] > rho[i - 1] && p[i] > p[i - 1], ErrorCode::InvalidInput,
                "tabulated law: samples must be strictly increasing");
      }
    }
    PressureLaw law;
    law.kind_ = LawKind::tabulated;
    law.rho_table_ = rho;
    law.p_table_ = p;
    law.spline_ = std::make_shared<const Spline>(std::move(rho), std::move(p));
    law.verify_monotone();
    return law;
  }

  [[nodiscard]] LawKind kind() const noexcept { return kind_; }
  [[nodiscard]] double K() const noexcept { return K_; }
  [[nodiscard]] double gamma() const noexcept { return gamma_; }
  [[nodiscard]] const std::vector<double>& rho_table() const noexcept { return rho_table_; }
  [[nodiscard]] const std::vector<double>& p_table() const noexcept { return p_table_; }

  [[nodiscard]] double pressure(double rho) const {
    switch (kind_) {
      case LawKind::isothermal: return K_ * rho;
      case LawKind::polytropic: return K_ * std::pow(rho, gamma_);
      case LawKind::tabulated:
        check_table_range(rho);
        return (*spline_)(rho);
    }
    return 0.0;
  }

  /// dP/drho.
  [[nodiscard]] double derivative(double rho) const {
    switch (kind_) {
      case LawKind::isothermal: return K_;
      case LawKind::polytropic: return K_ * gamma_ * std::pow(rho, gamma_ - 1.0);
      case LawKind::tabulated:
        check_table_range(rho);
        return spline_->prime(rho);
    }
    return 0.0;
  }

  /// P^{-1}(p); throws InverseFailure when p is outside the law's range.
  [[nodiscard]] double inverse(double p) const {
    require(p > 0.0 && std::isfinite(p), ErrorCode::InverseFailure,
            "pressure " + std::to_string(p) + " has no preimage (must be positive)");
    switch (kind_) {
      case LawKind::isothermal: return p / K_;
      case LawKind::polytropic: return std::pow(p / K_, 1.0 / gamma_);
      case LawKind::tabulated: return tabulated_inverse(p);
    }
    return 0.0;
  }

 private:
  using Spline = MonotoneCubic;

  PressureLaw() = default;

  void check_table_range(double rho) const {
    require(rho >= rho_table_.front() && rho <= rho_table_.back(), ErrorCode::DomainError,
            "density " + std::to_string(rho) + " outside tabulated range [" +
                std::to_string(rho_table_.front()) + ", " + std::to_string(rho_table_.back()) +
                "]");
  }

  void verify_monotone() const {
    constexpr int per_interval = 32;
    for (std::size_t i = 0; i + 1 < rho_table_.size(); ++i) {
      const double a = rho_table_[i];
      const double b = rho_table_[i + 1];
      for (int k = 0; k <= per_interval; ++k) {
        const double r = a + (b - a) * k / per_interval;
        require(spline_->prime(r) > 0.0, ErrorCode::DegeneratePressure,
                "tabulated law interpolant is not strictly increasing near rho = " +
                    std::to_string(r));
      }
    }
  }

  [[nodiscard]] double tabulated_inverse(double p) const {
    require(p >= p_table_.front() && p <= p_table_.back(), ErrorCode::InverseFailure,
            "pressure " + std::to_string(p) + " outside tabulated range");
    const auto it = std::lower_bound(p_table_.begin(), p_table_.end(), p);
    if (it != p_table_.end() && *it == p) return rho_table_[it - p_table_.begin()];
    const std::size_t hi = static_cast<std::size_t>(it - p_table_.begin());
    double lo_r = rho_table_[hi - 1];
    double hi_r = rho_table_[hi];
    // Bisection to a tight bracket, then Newton polish inside it.
    for (int k = 0; k < 200 && hi_r - lo_r > 1e-15 * hi_r; ++k) {
      const double mid = 0.5 * (lo_r + hi_r);
      if ((*spline_)(mid) < p) lo_r = mid; else hi_r = mid;
    }
    double r = 0.5 * (lo_r + hi_r);
    for (int k = 0; k < 3; ++k) {
      const double d = spline_->prime(r);
      if (d <= 0.0) break;
      const double next = r - ((*spline_)(r) - p) / d;
      if (next < lo_r || next > hi_r) break;
      r = next;
    }
    return r;
  }

  LawKind kind_ = LawKind::isothermal;
  double K_ = 1.0;
  double gamma_ = 1.0;
  std::vector<double> rho_table_;
  std::vector<double> p_table_;
  std::shared_ptr<const Spline> spline_;
};

}  // namespace rtstab
