#pragma once

#include <fstream>
#include <optional>
#include <string>

#include <json.hpp>

#include "rtstab/equilibrium.hpp"
#include "rtstab/error.hpp"
#include "rtstab/pressure_law.hpp"

namespace rtstab {

struct Numerics {
  std::size_t n_minus = 100;
  std::size_t n_plus = 100;
  std::size_t n_samples = 257;
  double eig_tol = 1e-13;
  double root_tol = 1e-10;
  double s_max_factor = 1.25;
  double xi_cutoff = 8.0;
  std::optional<double> dt;       // default 0.01 / lambda
  std::optional<double> t_final;  // default max(20, 10 / lambda)
  double zero_epsilon = 1e-12;
};

struct RunConfig {
  PhysicalParams params;
  PressureLaw law_plus = PressureLaw::isothermal(1.0);
  PressureLaw law_minus = PressureLaw::isothermal(1.0);
  Numerics numerics;
};

namespace detail {

using json = nlohmann::json;

inline const json& section(const json& j, const char* key, const std::string& where) {
  require(j.is_object() && j.contains(key), ErrorCode::InvalidInput,
          "missing \"" + std::string(key) + "\" in " + where);
  return j.at(key);
}

inline double number(const json& j, const char* key, const std::string& where) {
  const json& v = section(j, key, where);
  require(v.is_number(), ErrorCode::InvalidInput,
          where + "." + key + " must be a number");
  return v.get<double>();
}

inline double number_or(const json& j, const char* key, double fallback,
                        const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return number(j, key, where);
}

inline PressureLaw parse_law(const json& j, const std::string& where) {
  const json& kind = section(j, "kind", where);
  require(kind.is_string(), ErrorCode::InvalidInput, where + ".kind must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "isothermal") return PressureLaw::isothermal(number(j, "K", where));
  if (k == "polytropic")
    return PressureLaw::polytropic(number(j, "K", where), number(j, "gamma", where));
  if (k == "tabulated") {
    const json& rho = section(j, "rho", where);
    const json& p = section(j, "p", where);
    require(rho.is_array() && p.is_array(), ErrorCode::InvalidInput,
            where + ": tabulated rho and p must be arrays");
    return PressureLaw::tabulated(rho.get<std::vector<double>>(), p.get<std::vector<double>>());
  }
  throw Error(ErrorCode::InvalidInput, where + ".kind \"" + k + "\" is not one of "
                                       "isothermal, polytropic, tabulated");
}

inline std::size_t count(const json& j, const char* key, std::size_t fallback,
                         const std::string& where) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  require(v.is_number_integer() && v.get<long long>() > 0, ErrorCode::InvalidInput,
          where + "." + key + " must be a positive integer");
  return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

/// Parses and validates a run configuration (throws InvalidInput naming the violation).
inline RunConfig parse_config(const nlohmann::json& j) {
  using detail::number;
  RunConfig c;
  const auto& geo = detail::section(j, "geometry", "config");
  c.params.b = number(geo, "b", "geometry");
  c.params.ell = number(geo, "ell", "geometry");
  c.params.L1 = number(geo, "L1", "geometry");
  c.params.L2 = number(geo, "L2", "geometry");
  c.params.g = number(detail::section(j, "gravity", "config"), "g", "gravity");
  c.params.p_atm = number(detail::section(j, "atmosphere", "config"), "p_atm", "atmosphere");

  const auto& fluids = detail::section(j, "fluids", "config");
  const auto& plus = detail::section(fluids, "plus", "fluids");
  const auto& minus = detail::section(fluids, "minus", "fluids");
  c.law_plus = detail::parse_law(detail::section(plus, "law", "fluids.plus"), "fluids.plus.law");
  c.law_minus =
      detail::parse_law(detail::section(minus, "law", "fluids.minus"), "fluids.minus.law");
  c.params.mu_plus = number(plus, "mu", "fluids.plus");
  c.params.mu_prime_plus = number(plus, "mu_prime", "fluids.plus");
  c.params.mu_minus = number(minus, "mu", "fluids.minus");
  c.params.mu_prime_minus = number(minus, "mu_prime", "fluids.minus");

  const auto& st = detail::section(j, "surface_tension", "config");
  c.params.sigma_plus = number(st, "sigma_plus", "surface_tension");
  c.params.sigma_minus = number(st, "sigma_minus", "surface_tension");
  c.params.validate();

  if (j.contains("numerics")) {
    const auto& nj = j.at("numerics");
    require(nj.is_object(), ErrorCode::InvalidInput, "numerics must be an object");
    Numerics& n = c.numerics;
    n.n_minus = detail::count(nj, "n_minus", n.n_minus, "numerics");
    n.n_plus = detail::count(nj, "n_plus", n.n_plus, "numerics");
    n.n_samples = detail::count(nj, "n_samples", n.n_samples, "numerics");
    n.eig_tol = detail::number_or(nj, "eig_tol", n.eig_tol, "numerics");
    n.root_tol = detail::number_or(nj, "root_tol", n.root_tol, "numerics");
    n.s_max_factor = detail::number_or(nj, "s_max_factor", n.s_max_factor, "numerics");
    n.xi_cutoff = detail::number_or(nj, "xi_cutoff", n.xi_cutoff, "numerics");
    n.zero_epsilon = detail::number_or(nj, "zero_epsilon", n.zero_epsilon, "numerics");
    if (nj.contains("dt") && !nj.at("dt").is_null()) n.dt = number(nj, "dt", "numerics");
    if (nj.contains("t_final") && !nj.at("t_final").is_null())
      n.t_final = number(nj, "t_final", "numerics");
  }
  const Numerics& n = c.numerics;
  auto positive = [](double v, const char* name) {
    require(std::isfinite(v) && v > 0.0, ErrorCode::InvalidInput,
            std::string("numerics.") + name + " must be > 0");
  };
  require(n.n_minus >= 2 && n.n_plus >= 2, ErrorCode::InvalidInput,
          "numerics.n_minus and numerics.n_plus must be >= 2");
  require(n.n_samples >= 5, ErrorCode::InvalidInput, "numerics.n_samples must be >= 5");
  positive(n.eig_tol, "eig_tol");
  positive(n.root_tol, "root_tol");
  positive(n.xi_cutoff, "xi_cutoff");
  positive(n.zero_epsilon, "zero_epsilon");
  require(n.s_max_factor >= 1.0 && std::isfinite(n.s_max_factor), ErrorCode::InvalidInput,
          "numerics.s_max_factor must be >= 1");
  if (n.dt) positive(*n.dt, "dt");
  if (n.t_final) positive(*n.t_final, "t_final");
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  require(static_cast<bool>(is), ErrorCode::InvalidInput, "cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidInput, path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace rtstab
