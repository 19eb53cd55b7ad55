#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "io.hpp"
#include "nlsstab/acceptance.hpp"
#include "nlsstab/dcurve.hpp"
#include "nlsstab/delta_nls.hpp"
#include "nlsstab/dynamics.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/parallel.hpp"
#include "nlsstab/pipelines.hpp"
#include "nlsstab/spectral.hpp"
#include "nlsstab/system_nls.hpp"

namespace fs = std::filesystem;
using namespace nlsstab;
using io::json;

namespace {

enum Exit { ok = 0, checks_failed = 1, bad_config = 2, numeric_failure = 3, partial_failure = 4 };

/// Rejected configuration; exits with code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model_kind = "delta";
  double p = 4.0;
  double gamma = 1.0;
  std::optional<double> omega;
  std::string omega_range;  // lo:hi:count
  std::optional<int> n_points;  // model default when absent
  std::optional<double> half_width;
  std::string sector = "even";
  std::string out_dir = ".";
  std::string format = "both";
  unsigned seed = 1;
  int jobs = default_jobs();

  // operators and conditions
  std::string op = "L";
  int k = 6;
  double a = 1.0;
  int dim = 1;
  std::string pipeline = "collapse";
  bool semitrivial = false;

  // dynamics
  std::string direction = "psi";
  double amplitude = 1e-3;
  double dt = 1e-3;
  double t_end = 1.0;
  int stride = 10;
  std::string scheme = "cn";
  double radius_rel = 0.05;
  bool stop_on_exit = false;

  std::vector<int> only;
};

Sector parse_sector(const std::string& s) {
  if (s == "full") return Sector::full;
  if (s == "even") return Sector::even;
  if (s == "odd") return Sector::odd;
  throw ConfigError("sector must be full, even or odd (got '" + s + "')");
}

double require_omega(const RunConfig& c) {
  if (!c.omega) throw ConfigError("--omega is required");
  return *c.omega;
}

int delta_n(const RunConfig& c) { return c.n_points.value_or(2001); }

void validate_delta(const RunConfig& c, std::optional<double> omega) {
  if (!(c.p > 1.0)) throw ConfigError("p must exceed 1 (got " + io::number(c.p) + ")");
  if (!(c.gamma >= 0.0)) throw ConfigError("gamma must be nonnegative (got " + io::number(c.gamma) + ")");
  if (omega && !(*omega < -0.25 * c.gamma * c.gamma))
    throw ConfigError("omega must lie below -gamma^2/4 = " + io::number(-0.25 * c.gamma * c.gamma) +
                      " (got " + io::number(*omega) + ")");
  if (delta_n(c) < 11 || delta_n(c) % 2 == 0) throw ConfigError("n must be odd and at least 11");
  if (c.half_width && !(*c.half_width > 0.0)) throw ConfigError("half-width must be positive");
}

Grid delta_grid(const RunConfig& c, double omega) {
  if (c.half_width) return Grid::full_line(*c.half_width, delta_n(c));
  return default_delta_grid(c.p, c.gamma, omega, delta_n(c));
}

void emit(const RunConfig& c, const std::string& stem, const json& doc,
          const std::optional<io::Csv>& csv = std::nullopt) {
  const fs::path dir(c.out_dir);
  if (c.format == "json" || c.format == "both") io::write_json(dir / (stem + ".json"), doc);
  if (csv && (c.format == "csv" || c.format == "both")) io::write_atomic(dir / (stem + ".csv"), csv->str());
}

json config_json(const RunConfig& c) {
  json j;
  j["model_kind"] = c.model_kind;
  j["p"] = c.p;
  j["gamma"] = c.gamma;
  if (c.omega) j["omega"] = *c.omega;
  if (c.n_points) j["n"] = *c.n_points;
  if (c.half_width) j["half_width"] = *c.half_width;
  j["seed"] = c.seed;
  return j;
}

// ---------------------------------------------------------------------------------------------

int cmd_profile(const RunConfig& c) {
  const double w = require_omega(c);
  validate_delta(c, w);
  const Sector s = parse_sector(c.sector);
  if (s == Sector::odd) throw ConfigError("the bound state has no odd part");
  const DeltaProfile pr = profile(c.p, c.gamma, w, delta_grid(c, w), s);
  DeltaNls model(c.p, c.gamma, pr.field.disc_ptr());
  json doc = io::document("profile");
  doc["config"] = config_json(c);
  doc["sector"] = to_string(s);
  doc["b_omega"] = pr.b_omega;
  doc["charge"] = charge(model, pr.field);
  doc["energy"] = model.energy(pr.field);
  doc["residual_h"] = pr.residual_h;
  doc["residual_x"] = pr.residual_x;
  io::Csv csv({"x", "phi", "closed_form", "dphi_domega"});
  const auto& x = pr.field.disc().x();
  for (Eigen::Index j = 0; j < x.size(); ++j)
    csv.row({io::number(x[j]), io::number(pr.field.values()[j].real()),
             io::number(pr.closed_form.values()[j].real()), io::number(pr.d_omega_field.values()[j].real())});
  emit(c, "profile", doc, csv);
  std::printf("b_omega %.17g  residual_h %.3e\n", pr.b_omega, pr.residual_h);
  return ok;
}

std::vector<double> parse_range(const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  if (parts.size() != 3) throw ConfigError("omega range must read lo:hi:count");
  double lo = 0, hi = 0;
  int count = 0;
  try {
    lo = std::stod(parts[0]);
    hi = std::stod(parts[1]);
    count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("omega range must read lo:hi:count (got '" + spec + "')");
  }
  if (count < 2) throw ConfigError("omega range needs at least two points");
  std::vector<double> w(count);
  for (int k = 0; k < count; ++k) w[k] = lo + (hi - lo) * k / (count - 1);
  return w;
}

int cmd_dcurve(const RunConfig& c) {
  validate_delta(c, std::nullopt);
  const std::vector<double> omegas =
      c.omega_range.empty() ? omega_sweep(c.gamma) : parse_range(c.omega_range);
  for (double w : omegas) validate_delta(c, w);
  DCurveOptions opt;
  opt.n_points = delta_n(c);
  opt.half_width = c.half_width;
  const SweepResult s = d_sweep(c.p, c.gamma, omegas, opt, c.jobs);
  io::Csv csv(io::dcurve_header());
  json rows = json::array();
  int failed = 0, changes = 0;
  std::optional<Sign> prev;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    if (!s.rows[i]) {
      ++failed;
      csv.row({io::number(omegas[i]), "", "", "", "", "", "", "", "", "", "", "", "", s.errors[i]});
      rows.push_back(json{{"omega", omegas[i]}, {"error", s.errors[i]}});
      continue;
    }
    const DCurveRow& r = *s.rows[i];
    const Sign sg = d2_sign(r.d2_identity, r.d);
    const bool change = prev && sg != Sign::undecided && *prev != Sign::undecided && sg != *prev;
    if (sg != Sign::undecided) prev = sg;
    changes += change;
    csv.row({io::number(r.omega), io::number(r.d), io::number(r.d1), io::number(r.d2), io::number(r.d3),
             io::number(r.charge), io::number(r.d2_identity), io::number(r.d3_identity),
             io::number(r.resid_d1), io::number(r.resid_d2), io::number(r.resid_d3), io::sign_name(sg),
             change ? "1" : "0", ""});
    json j = io::to_json(r);
    j["d2_sign"] = io::sign_name(sg);
    j["sign_change"] = change;
    rows.push_back(j);
  }
  json doc = io::document("dcurve");
  doc["config"] = config_json(c);
  doc["rows"] = rows;
  doc["sign_changes"] = changes;
  doc["failed_rows"] = failed;
  emit(c, "dcurve", doc, csv);
  std::printf("%zu rows, %d sign change(s), %d failed\n", omegas.size(), changes, failed);
  for (std::size_t i = 0; i < omegas.size(); ++i)
    if (!s.rows[i]) std::fprintf(stderr, "row omega=%.17g: %s\n", omegas[i], s.errors[i].c_str());
  return failed ? partial_failure : ok;
}

int cmd_critical(const RunConfig& c) {
  validate_delta(c, std::nullopt);
  CriticalOptions opt;
  opt.grid.n_points = delta_n(c);
  opt.grid.half_width = c.half_width;
  const CriticalOmega r = find_omega_star(c.p, c.gamma, opt);
  json doc = io::document("critical-omega");
  doc["config"] = config_json(c);
  doc["result"] = io::to_json(r);
  emit(c, "critical_omega", doc);
  std::printf("omega* %.17g  d''' %.6g (identity) %.6g (stencil)\n", r.omega_star, r.d3_identity,
              r.d3_stencil);
  return ok;
}

int cmd_spectrum(const RunConfig& c) {
  json doc = io::document("spectrum");
  doc["config"] = config_json(c);
  doc["operator"] = c.op;
  SpectrumReport rep;
  if (c.op == "L" || c.op == "M") {
    const double w = require_omega(c);
    validate_delta(c, w);
    const Sector s = parse_sector(c.sector);
    const Grid g = delta_grid(c, w);
    const auto disc = Discretization::make(g, s);
    const SparseMat op = c.op == "L" ? operator_L(c.p, c.gamma, w, g, s) : operator_M(c.p, c.gamma, w, g, s);
    rep = spectrum(op, mass_matrix(*disc), to_string(s), c.k);
  } else if (c.op == "La") {
    const double w = require_omega(c);
    if (!(w < 0.0)) throw ConfigError("omega must be negative");
    if (c.dim != 1 && c.dim != 3) throw ConfigError("dim must be 1 or 3");
    if (!(c.a <= 2.0)) throw ConfigError("L_a is classified for a <= 2 only");
    const GroundState2 gs = ground_state(w, default_system_grid(w, c.dim, c.n_points.value_or(1201)));
    const LaClassification cl = classify_La(gs.varphi, w, c.a);
    rep = cl.report;
    doc["a"] = c.a;
    doc["regime"] = cl.regime;
    doc["consistent"] = cl.consistent;
    doc["kernel_cosine"] = cl.kernel_cosine;
    doc["min_on_phi_perp"] = cl.min_on_phi_perp;
  } else {
    throw ConfigError("operator must be L, M or La");
  }
  doc["spectrum"] = io::to_json(rep);
  emit(c, "spectrum", doc);
  std::printf("n_negative %d  kernel_dim %d  lowest %.6g\n", rep.n_negative, rep.kernel_dim_est,
              rep.eigenvalues.size() ? rep.eigenvalues[0] : 0.0);
  return ok;
}

int cmd_conditions(const RunConfig& c) {
  const Pipeline pl = [&] {
    try {
      return parse_pipeline(c.pipeline);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  validate_delta(c, c.omega);
  double w = 0.0;
  if (c.omega) {
    w = *c.omega;
  } else if (pl == Pipeline::degenerate) {
    CriticalOptions opt;
    opt.grid.n_points = delta_n(c);
    w = find_omega_star(c.p, c.gamma, opt).omega_star;
  } else {
    throw ConfigError("--omega is required for this pipeline");
  }
  const std::vector<ConditionReport> reps = run_pipeline(pl, c.p, c.gamma, w, delta_n(c));
  json doc = io::document("conditions");
  doc["config"] = config_json(c);
  doc["pipeline"] = to_string(pl);
  doc["omega"] = w;
  doc["reports"] = io::to_json(reps);
  doc["all_hold"] = all_hold(reps);
  emit(c, "conditions", doc);
  for (const auto& r : reps) std::printf("%-32s %s\n", r.condition.c_str(), r.holds ? "holds" : "fails");
  return all_hold(reps) ? ok : checks_failed;
}

int cmd_simulate(const RunConfig& c) {
  const double w = require_omega(c);
  validate_delta(c, w);
  const Sector s = parse_sector(c.sector);
  if (s == Sector::odd) throw ConfigError("the bound state has no odd part");
  const Direction dir = [&] {
    try {
      return parse_direction(c.direction);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  IntegratorConfig cfg;
  cfg.dt = c.dt;
  cfg.t_end = c.t_end;
  cfg.diag_stride = c.stride;
  cfg.stop_on_exit = c.stop_on_exit;
  if (c.scheme == "strang")
    cfg.scheme = Scheme::strang;
  else if (c.scheme != "cn")
    throw ConfigError("scheme must be cn or strang");
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(c.radius_rel > 0.0)) throw ConfigError("tube radius must be positive");

  const Field phi = bound_state(c.p, c.gamma, w, delta_grid(c, w), s);
  const DeltaNls model(c.p, c.gamma, phi.disc_ptr());
  const Field u0 = perturbed_state(model, w, phi, dir, c.amplitude, c.seed);
  OrbitReference ref{phi, w, std::nullopt, TubeOptions{c.radius_rel}};
  // A, Lambda, P need a psi orthogonal to phi and J phi
  ref.psi = charge_constrained_minimizer(model, w, phi).psi;
  const EvolveResult r = evolve(model, u0, cfg, ref);
  json doc = io::document("simulate");
  doc["config"] = config_json(c);
  doc["integrator"] = json{{"scheme", to_string(cfg.scheme)}, {"dt", cfg.dt}, {"t_end", cfg.t_end},
                           {"diag_stride", cfg.diag_stride}};
  doc["perturbation"] = json{{"direction", c.direction}, {"amplitude", c.amplitude}};
  doc["tube_radius"] = c.radius_rel * norm_x(model, phi);
  doc["diagnostics"] = io::to_json(r.diagnostics);
  try {
    doc["identity_residual"] = lyapunov_identity_residual(r.diagnostics);
  } catch (const InsufficientDataError&) {
    doc["identity_residual"] = nullptr;
  }
  emit(c, "simulate", doc, io::trajectory_csv(r.diagnostics));
  const auto& d = r.diagnostics;
  std::printf("steps %ld  exit %s  E drift %.2e  Q drift %.2e\n", d.steps,
              d.exit_time ? io::number(*d.exit_time).c_str() : "none", d.energy_drift, d.charge_drift);
  return d.valid ? ok : checks_failed;
}

int cmd_system(const RunConfig& c) {
  const double w = c.omega.value_or(-1.0);
  if (!(w < 0.0)) throw ConfigError("omega must be negative");
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (c.dim != 1 && c.dim != 3) throw ConfigError("dim must be 1 or 3");
  const GroundState2 gs = ground_state(w, default_system_grid(w, c.dim, c.n_points.value_or(1201)));
  json doc = io::document("system");
  doc["config"] = config_json(c);
  doc["dim"] = c.dim;
  doc["ground_state"] = json{{"phi0", gs.phi0}, {"residual", gs.residual}};
  bool pass = true;
  json la = json::array();
  for (double a : {1.0, 2.0, 0.5, 1.5}) {
    const LaClassification cl = classify_La(gs.varphi, w, a);
    la.push_back(json{{"a", a}, {"regime", cl.regime}, {"consistent", cl.consistent},
                      {"lowest", cl.report.eigenvalues[0]}, {"n_negative", cl.report.n_negative}});
    pass = pass && cl.consistent;
  }
  doc["classification"] = la;
  if (c.gamma <= 1.0) {
    const CouplingCoefficients cc = coefficients(c.gamma);
    doc["coefficients"] = json{{"alpha", cc.alpha}, {"beta", cc.beta},
                               {"eig_R2", (2.0 - c.gamma) * cc.beta}, {"eig_I2", (1.0 - 2.0 * c.gamma) * cc.beta}};
  }
  if (c.gamma < 1.0) {
    if (c.dim == 1) {
      const SystemOperators o = operators_RI(c.gamma, w, gs.varphi);
      doc["diagonalization"] = json{{"residual_R", o.diag_residual_R}, {"residual_I", o.diag_residual_I}};
      pass = pass && o.diag_residual_R < 1e-10 && o.diag_residual_I < 1e-10;
    }
    const auto reps = check_instability_conditions(c.gamma, w, gs.varphi);
    doc["branch_conditions"] = io::to_json(reps);
    pass = pass && all_hold(reps);
  }
  if (c.semitrivial) {
    const auto reps = check_semitrivial_degenerate(w, gs.varphi);
    doc["semitrivial_gamma_1"] = io::to_json(reps);
    pass = pass && all_hold(reps);
  }
  doc["all_hold"] = pass;
  emit(c, "system", doc);
  std::printf("system checks %s\n", pass ? "hold" : "fail");
  return pass ? ok : checks_failed;
}

int cmd_linear(const RunConfig& c) {
  const std::vector<ConditionReport> reps = check_counterexample();
  json doc = io::document("linear-demo");
  doc["reports"] = io::to_json(reps);
  // phi_2 under exact evolution with random perturbations of X size amplitude
  std::mt19937 rng(c.seed);
  std::normal_distribution<double> n01;
  double far = 0.0;
  for (int k = 0; k < 50; ++k) {
    SineState s = sine_mode_state(32, 2);
    Eigen::VectorXcd dv(32);
    double xn = 0.0;
    for (int n = 1; n <= 32; ++n) {
      dv[n - 1] = cplx(n01(rng), n01(rng)) / double(n * n);
      xn += n * n * std::norm(dv[n - 1]);
    }
    s.coefficients += (c.amplitude / std::sqrt(xn)) * dv;
    for (int step = 0; step <= 200; ++step) far = std::max(far, sine_tube_distance(exact_evolve(s, 0.5 * step)));
  }
  doc["perturbation_amplitude"] = c.amplitude;
  doc["max_tube_distance_t100"] = far;
  const bool expected = reps[0].holds && reps[1].holds && !reps[2].holds && reps[3].holds;
  doc["expected_pattern"] = expected;
  emit(c, "linear_demo", doc);
  for (const auto& r : reps) std::printf("%-10s %s\n", r.condition.c_str(), r.holds ? "holds" : "fails");
  std::printf("max tube distance %.3e\n", far);
  return expected ? ok : checks_failed;
}

int cmd_verify(const RunConfig& c) {
  acceptance::Options opt;
  opt.jobs = c.jobs;
  json doc = io::document("verify-all");
  json list = json::array();
  bool pass = true;
  for (const auto& crit : acceptance::criteria()) {
    if (!c.only.empty() && std::find(c.only.begin(), c.only.end(), crit.id) == c.only.end()) continue;
    const acceptance::CriterionResult r = acceptance::run_criterion(crit, opt);
    std::printf("[%s] %2d %s (%.1f s)\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds);
    for (const auto& k : r.checks)
      if (!k.ok) std::printf("       %s\n", acceptance::describe(k).c_str());
    if (!r.error.empty()) std::printf("       error: %s\n", r.error.c_str());
    std::fflush(stdout);
    pass = pass && r.passed;
    list.push_back(io::to_json(r));
  }
  doc["criteria"] = list;
  doc["all_passed"] = pass;
  emit(c, "verify_all", doc);
  return pass ? ok : checks_failed;
}

void model_options(CLI::App* s, RunConfig& c, bool with_omega = true) {
  s->add_option("--p", c.p, "Nonlinearity exponent");
  s->add_option("--gamma", c.gamma, "Coupling strength");
  if (with_omega) s->add_option("--omega", c.omega, "Frequency");
  s->add_option("--n", c.n_points, "Grid points");
  s->add_option("--half-width", c.half_width, "Truncation half-width (default from the decay rate)");
}

void output_options(CLI::App* s, RunConfig& c) {
  s->add_option("--out", c.out_dir, "Output directory");
  s->add_option("--format", c.format, "json | csv | both")->check(CLI::IsMember({"json", "csv", "both"}));
  s->add_option("--seed", c.seed, "Random seed");
  s->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stability analysis of bound states for nonlinear Schrodinger models"};
  app.set_config("--config", "", "TOML-style configuration file; flags override its values");
  app.require_subcommand(1);
  RunConfig c;

  auto* profile_cmd = app.add_subcommand("profile", "Bound-state profile, shift and residuals");
  model_options(profile_cmd, c);
  profile_cmd->add_option("--sector", c.sector, "full | even");
  output_options(profile_cmd, c);

  auto* dcurve_cmd = app.add_subcommand("dcurve", "d(omega) and its derivatives over a sweep");
  model_options(dcurve_cmd, c, false);
  dcurve_cmd->add_option("--omega-range", c.omega_range, "lo:hi:count (default: geometric sweep)");
  output_options(dcurve_cmd, c);

  auto* crit_cmd = app.add_subcommand("critical-omega", "Frequency where d'' changes sign");
  model_options(crit_cmd, c, false);
  output_options(crit_cmd, c);

  auto* spec_cmd = app.add_subcommand("spectrum", "Lowest eigenvalues of a linearized operator");
  model_options(spec_cmd, c);
  spec_cmd->add_option("--operator", c.op, "L | M (delta model) or La (scalar system operator)");
  spec_cmd->add_option("--sector", c.sector, "full | even | odd");
  spec_cmd->add_option("--k", c.k, "Number of eigenvalues")->check(CLI::PositiveNumber);
  spec_cmd->add_option("--a", c.a, "Coefficient a of L_a");
  spec_cmd->add_option("--dim", c.dim, "Space dimension for L_a");
  output_options(spec_cmd, c);

  auto* cond_cmd = app.add_subcommand("conditions", "Instability condition pipelines");
  model_options(cond_cmd, c);
  cond_cmd->add_option("--pipeline", c.pipeline, "degenerate | collapse | two-negative");
  output_options(cond_cmd, c);

  auto* sim_cmd = app.add_subcommand("simulate", "Evolve a perturbed bound state");
  model_options(sim_cmd, c);
  sim_cmd->add_option("--sector", c.sector, "full | even");
  sim_cmd->add_option("--direction", c.direction, "psi | chi1 | phi-prime | random");
  sim_cmd->add_option("--amplitude", c.amplitude, "Perturbation size");
  sim_cmd->add_option("--dt", c.dt, "Time step");
  sim_cmd->add_option("--t-end", c.t_end, "Final time");
  sim_cmd->add_option("--stride", c.stride, "Steps between diagnostic samples");
  sim_cmd->add_option("--scheme", c.scheme, "cn | strang");
  sim_cmd->add_option("--radius", c.radius_rel, "Tube radius relative to |phi|_X");
  sim_cmd->add_flag("--stop-on-exit", c.stop_on_exit, "Stop at the first sample outside the tube");
  output_options(sim_cmd, c);

  auto* sys_cmd = app.add_subcommand("system", "Two-component system: coefficients, operators, conditions");
  model_options(sys_cmd, c);
  sys_cmd->add_option("--dim", c.dim, "Space dimension (radial)");
  sys_cmd->add_flag("--semitrivial", c.semitrivial, "Also check the degenerate semitrivial state");
  output_options(sys_cmd, c);

  auto* lin_cmd = app.add_subcommand("linear-demo", "Linear Schrodinger equation on an interval");
  lin_cmd->add_option("--amplitude", c.amplitude, "Perturbation size for the stability sweep");
  output_options(lin_cmd, c);

  auto* verify_cmd = app.add_subcommand("verify-all", "Run the acceptance suite");
  verify_cmd->add_option("--only", c.only, "Criterion numbers to run");
  output_options(verify_cmd, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bad_config;
  }

  try {
    if (*profile_cmd) return cmd_profile(c);
    if (*dcurve_cmd) return cmd_dcurve(c);
    if (*crit_cmd) return cmd_critical(c);
    if (*spec_cmd) return cmd_spectrum(c);
    if (*cond_cmd) return cmd_conditions(c);
    if (*sim_cmd) return cmd_simulate(c);
    if (*sys_cmd) return cmd_system(c);
    if (*lin_cmd) return cmd_linear(c);
    if (*verify_cmd) return cmd_verify(c);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return bad_config;
  } catch (const nlsstab::Error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return numeric_failure;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return numeric_failure;
  }
  return bad_config;
}
