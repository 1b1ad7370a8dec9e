#pragma once

#include <string_view>

#include "rtstab/error.hpp"

namespace rtstab {

enum class Regime {
  stable_almost_exponential_decay,
  stable_exponential_decay,
  locally_well_posed,
  nonlinearly_unstable,
};

constexpr std::string_view to_string(Regime r) noexcept {
  switch (r) {
    case Regime::stable_almost_exponential_decay: return "stable_almost_exponential_decay";
    case Regime::stable_exponential_decay: return "stable_exponential_decay";
    case Regime::locally_well_posed: return "locally_well_posed";
    case Regime::nonlinearly_unstable: return "nonlinearly_unstable";
  }
  return "unknown";
}

/// Short statement of the decay/growth claim attached to each regime.
constexpr std::string_view decay_claim(Regime r) noexcept {
  switch (r) {
    case Regime::stable_almost_exponential_decay: return "nonlinearly stable, almost exponential decay";
    case Regime::stable_exponential_decay: return "nonlinearly stable, exponential decay";
    case Regime::locally_well_posed: return "locally well-posed, stability open";
    case Regime::nonlinearly_unstable: return "nonlinearly unstable";
  }
  return "";
}

/// Stability regime from the sign of the jump and the position of sigma_- against sigma_c.
/// Comparisons are exact; round inputs before calling if a tolerance is wanted.
inline Regime classify_regime(double jump, double sigma_plus, double sigma_minus,
                              double sigma_c) {
  require(sigma_plus >= 0.0 && sigma_minus >= 0.0, ErrorCode::InvalidInput,
          "surface tensions must be >= 0");
  if (sigma_plus == 0.0) {
    require(sigma_minus == 0.0, ErrorCode::InvalidInput,
            "sigma_+ = 0 with sigma_- > 0 is not a classified case");
    if (jump < 0.0) return Regime::stable_almost_exponential_decay;
    if (jump == 0.0) return Regime::locally_well_posed;
    return Regime::nonlinearly_unstable;
  }
  if (jump <= 0.0) return Regime::stable_exponential_decay;
  if (sigma_minus < sigma_c) return Regime::nonlinearly_unstable;
  if (sigma_minus == sigma_c) return Regime::locally_well_posed;
  return Regime::stable_exponential_decay;
}

}  // namespace rtstab
