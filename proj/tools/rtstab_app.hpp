#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rtstab/rtstab.hpp"

namespace rtstab::app {

using json = nlohmann::json;

/// Exit statuses of the command-line tool.
enum Exit : int { ok = 0, validation = 2, solver = 3 };

namespace detail {

inline json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

struct Context {
  RunConfig cfg;
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::ostream* out = nullptr;

  [[nodiscard]] std::string path(const std::string& name) const {
    return (out_dir / name).string();
  }
};

inline EquilibriumProfile equilibrium(const Context& c) {
  return solve_equilibrium(c.cfg.law_plus, c.cfg.law_minus, c.cfg.params,
                           c.cfg.numerics.n_samples);
}

inline Mesh1D mesh(const Context& c) {
  return build_mesh(c.cfg.params.b, c.cfg.params.ell, c.cfg.numerics.n_minus,
                    c.cfg.numerics.n_plus);
}

inline DispersionOptions dispersion_options(const Context& c) {
  DispersionOptions o;
  o.s_max_factor = c.cfg.numerics.s_max_factor;
  o.root_tol = c.cfg.numerics.root_tol;
  o.eigen.tol = c.cfg.numerics.eig_tol;
  return o;
}

inline void write_json(const json& j, const std::string& path) {
  std::ofstream os(path);
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + path);
  os << j.dump(2) << '\n';
}

inline void cmd_equilibrium(const Context& c) {
  const auto prof = equilibrium(c);
  std::ofstream os(c.path("equilibrium.csv"));
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + c.path("equilibrium.csv"));
  os.precision(17);
  os << "x3,rho,pressure,h_prime,layer\n";
  for (Layer layer : {Layer::lower, Layer::upper}) {
    const auto& xs = layer == Layer::upper ? prof.x_upper : prof.x_lower;
    const auto& rs = layer == Layer::upper ? prof.rho_upper : prof.rho_lower;
    const PressureLaw& P = prof.law(layer);
    for (std::size_t i = 0; i < xs.size(); ++i)
      os << xs[i] << ',' << rs[i] << ',' << P.pressure(rs[i]) << ','
         << P.derivative(rs[i]) / rs[i] << ',' << to_string(layer) << '\n';
  }
  const auto rep = check_admissibility(prof);
  json j;
  j["rho1"] = prof.rho1();
  j["rho_top_interface"] = prof.rho_top_interface();
  j["rho_bot_interface"] = prof.rho_bot_interface();
  j["jump"] = prof.jump();
  j["admissible"] = rep.passed;
  j["min_density"] = rep.min_density;
  j["max_hydrostatic_residual"] = rep.max_hydrostatic_residual;
  j["continuity_residual"] = rep.continuity_residual;
  j["top_residual"] = rep.top_residual;
  write_json(j, c.path("equilibrium.json"));
}

inline void cmd_alpha(const Context& c, double xi, double s) {
  const auto prof = equilibrium(c);
  const auto forms = assemble_forms(mesh(c), prof, xi, c.cfg.params);
  EigenOptions eo;
  eo.tol = c.cfg.numerics.eig_tol;
  const auto pair = min_eig(forms, s, eo);
  std::ostringstream ss;
  ss.precision(17);
  ss << pair.alpha << '\n';
  *c.out << ss.str();
}

inline json point_json(const DispersionPoint& p) {
  json j;
  j["xi"] = {p.xi1, p.xi2};
  j["xi_abs"] = p.xi_abs;
  j["lambda"] = p.lambda;
  j["alpha_at_star"] = p.alpha_at_star;
  j["iterations"] = p.iterations;
  j["converged"] = p.converged;
  return j;
}

inline void cmd_dispersion(const Context& c) {
  const auto prof = equilibrium(c);
  const auto sum = sweep_lattice(prof, mesh(c), c.cfg.params, c.cfg.numerics.xi_cutoff,
                                 dispersion_options(c), c.threads);
  std::ofstream os(c.path("dispersion.csv"));
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + c.path("dispersion.csv"));
  os.precision(17);
  os << "xi1,xi2,xi_abs,lambda,alpha_at_star,iterations,converged\n";
  for (const auto& p : sum.curve)
    os << p.xi1 << ',' << p.xi2 << ',' << p.xi_abs << ',' << p.lambda << ',' << p.alpha_at_star
       << ',' << p.iterations << ',' << (p.converged ? 1 : 0) << '\n';
  json j;
  j["Lambda"] = sum.Lambda;
  j["lambda_star"] = sum.lambda_star;
  j["argmax_xi"] = {sum.argmax_xi1, sum.argmax_xi2};
  j["attained"] = sum.attained;
  j["sigma_c"] = critical_tension(prof, c.cfg.params);
  j["xi_c"] = prof.jump() > 0.0 ? number(critical_frequency(prof, c.cfg.params)) : json(nullptr);
  write_json(j, c.path("summary.json"));
}

inline void cmd_growth(const Context& c, double xi) {
  const auto prof = equilibrium(c);
  const auto p = growth_rate(prof, xi, mesh(c), c.cfg.params, dispersion_options(c));
  write_json(point_json(p), c.path("growth.json"));
}

inline void cmd_classify(const Context& c) {
  const auto prof = equilibrium(c);
  const PhysicalParams& pp = c.cfg.params;
  const double eps = c.cfg.numerics.zero_epsilon;
  double jump = prof.jump();
  const double sigma_c = critical_tension(prof, pp);
  double sigma_minus = pp.sigma_minus;
  if (std::abs(jump) <= eps) jump = 0.0;
  if (std::abs(sigma_minus - sigma_c) <= eps) sigma_minus = sigma_c;
  const Regime r = classify_regime(jump, pp.sigma_plus, sigma_minus, sigma_c);
  json j;
  j["jump"] = prof.jump();
  j["sigma_plus"] = pp.sigma_plus;
  j["sigma_minus"] = pp.sigma_minus;
  j["sigma_c"] = sigma_c;
  j["regime"] = std::string(to_string(r));
  j["decay_claim"] = std::string(decay_claim(r));
  write_json(j, c.path("classify.json"));
}

inline void cmd_mode(const Context& c, double xi) {
  const auto prof = equilibrium(c);
  const auto m = mesh(c);
  const auto p = growth_rate(prof, xi, m, c.cfg.params, dispersion_options(c));
  require(p.lambda > 0.0, ErrorCode::DegenerateMode,
          "no growing mode at |xi| = " + std::to_string(xi));
  export_mode(assemble_mode(p, prof, m, c.cfg.params), c.path("mode.csv"));
}

inline void cmd_oracle(const Context& c, double xi) {
  const auto prof = equilibrium(c);
  const auto m = mesh(c);
  const auto p = growth_rate(prof, xi, m, c.cfg.params, dispersion_options(c));
  const auto sd = semidiscretize(prof, m, xi, 0.0, c.cfg.params);
  IntegratorParams ip;
  const double scale = p.lambda > 0.0 ? p.lambda : 1.0;
  ip.dt = c.cfg.numerics.dt.value_or(0.01 / scale);
  ip.t_final = c.cfg.numerics.t_final.value_or(std::max(20.0, 10.0 / scale));
  ip.sample_every = std::max(1, static_cast<int>(ip.t_final / ip.dt / 2000));
  const Trajectory tr = advance(generic_state(sd), sd, ip);
  write_trajectory(tr, c.path("trajectory.csv"));
  json j;
  j["xi"] = {xi, 0.0};
  j["lambda"] = p.lambda;
  j["dt"] = ip.dt;
  j["t_final"] = ip.t_final;
  try {
    const double rate = measure_growth(tr, ip.fit_window);
    j["fitted_rate"] = rate;
    j["relative_gap"] = p.lambda > 0.0 ? number(std::abs(rate - p.lambda) / p.lambda)
                                       : json(nullptr);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroSignal) throw;
    j["fitted_rate"] = nullptr;
    j["relative_gap"] = nullptr;
  }
  write_json(j, c.path("oracle.json"));
}

inline void cmd_extend(const Context& c, const std::string& input, int m,
                       const std::vector<double>& heights) {
  require(m >= 0, ErrorCode::InvalidInput, "--m must be >= 0");
  const PeriodicField f = read_field(input);
  const auto ext = extend_interface(f, default_extension(static_cast<std::size_t>(m)));
  std::ofstream os(c.path("extension.csv"));
  require(static_cast<bool>(os), ErrorCode::IoError, "cannot write " + c.path("extension.csv"));
  os.precision(17);
  os << "x3,x1,x2,value\n";
  for (double h : heights) {
    const PeriodicField v = ext.evaluate(h);
    for (std::size_t i = 0; i < v.N1; ++i)
      for (std::size_t jj = 0; jj < v.N2; ++jj)
        os << h << ',' << v.x1(i) << ',' << v.x2(jj) << ',' << v.at(i, jj) << '\n';
  }
}

}  // namespace detail

/// Parses the command line and runs one subcommand; returns the process exit status.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Linear Rayleigh-Taylor stability analyzer for two compressible viscous layers",
               "rtstab"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir = ".";
  unsigned threads = 1;
  app.add_option("--config", config_path, "run configuration (JSON)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for the dispersion sweep")
      ->check(CLI::PositiveNumber);

  double xi = 0.0, s = 0.0;
  int m = 2;
  std::string input;
  std::vector<double> heights = {-1.0, -0.5, 0.0, 0.5, 1.0};
  auto* c_eq = app.add_subcommand("equilibrium", "equilibrium profile CSV");
  auto* c_alpha = app.add_subcommand("alpha", "print alpha(s) at one frequency");
  c_alpha->add_option("--xi", xi, "|xi|")->required();
  c_alpha->add_option("--s", s, "s > 0")->required();
  auto* c_disp = app.add_subcommand("dispersion", "lattice sweep: curve CSV and summary JSON");
  auto* c_growth = app.add_subcommand("growth", "growth rate at one frequency");
  c_growth->add_option("--xi", xi, "|xi|")->required();
  auto* c_class = app.add_subcommand("classify", "stability regime JSON");
  auto* c_mode = app.add_subcommand("mode", "growing mode CSV and JSON");
  c_mode->add_option("--xi", xi, "|xi|")->required();
  auto* c_oracle = app.add_subcommand("oracle", "time-evolution check of the growth rate");
  c_oracle->add_option("--xi", xi, "|xi|")->required();
  auto* c_ext = app.add_subcommand("extend", "Poisson extensions of a periodic grid");
  c_ext->add_option("--input", input, "grid CSV")->required();
  c_ext->add_option("--m", m, "matching order")->required();
  c_ext->add_option("--x3", heights, "evaluation heights");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return validation;
  }

  try {
    detail::Context ctx;
    ctx.cfg = load_config(config_path);
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    ctx.out = &out;
    std::filesystem::create_directories(ctx.out_dir);

    if (*c_eq) detail::cmd_equilibrium(ctx);
    else if (*c_alpha) detail::cmd_alpha(ctx, xi, s);
    else if (*c_disp) detail::cmd_dispersion(ctx);
    else if (*c_growth) detail::cmd_growth(ctx, xi);
    else if (*c_class) detail::cmd_classify(ctx);
    else if (*c_mode) detail::cmd_mode(ctx, xi);
    else if (*c_oracle) detail::cmd_oracle(ctx, xi);
    else if (*c_ext) detail::cmd_extend(ctx, input, m, heights);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_validation() ? validation : solver;
  } catch (const nlohmann::json::exception& e) {
    err << "error: invalid config: " << e.what() << '\n';
    return validation;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return solver;
  }
  return ok;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace rtstab::app
