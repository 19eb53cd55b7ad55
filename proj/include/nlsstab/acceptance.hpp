#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nlsstab/dcurve.hpp"
#include "nlsstab/delta_nls.hpp"
#include "nlsstab/dynamics.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/lyapunov.hpp"
#include "nlsstab/pipelines.hpp"
#include "nlsstab/spectral.hpp"
#include "nlsstab/system_nls.hpp"

namespace nlsstab::acceptance {

/// One measured quantity against a pinned bound.
struct Check {
  std::string name;
  double value = 0;
  std::string relation;  // "<", ">", "==", "in"
  double bound = 0;
  double bound_hi = 0;   // upper end for "in"
  bool ok = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0;
  std::vector<Check> checks;
  std::string error;  // set when the criterion threw
};

struct Options {
  int jobs = 1;
};

namespace detail {

inline void less(CriterionResult& r, std::string name, double v, double bound) {
  r.checks.push_back({std::move(name), v, "<", bound, 0, v < bound});
}
inline void greater(CriterionResult& r, std::string name, double v, double bound) {
  r.checks.push_back({std::move(name), v, ">", bound, 0, v > bound});
}
inline void equal(CriterionResult& r, std::string name, double v, double target) {
  r.checks.push_back({std::move(name), v, "==", target, 0, v == target});
}
inline void within(CriterionResult& r, std::string name, double v, double lo, double hi) {
  r.checks.push_back({std::move(name), v, "in", lo, hi, v >= lo && v <= hi});
}
inline void truth(CriterionResult& r, std::string name, bool v) {
  r.checks.push_back({std::move(name), v ? 1.0 : 0.0, "==", 1.0, 0, v});
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace detail

// 1
inline void coefficient_identities(CriterionResult& r, const Options&) {
  double e1 = 0.0, e2 = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double g = k / 101.0;
    const CouplingCoefficients c = coefficients(g);
    e1 = std::max(e1, std::abs(std::abs(c.alpha) + g * c.beta - 1.0));
    e2 = std::max(e2, std::abs(g * c.alpha * c.alpha + 2.0 * c.beta * c.beta - 2.0 * c.beta));
  }
  detail::less(r, "max |alpha| + gamma beta - 1", e1, 1e-12);
  detail::less(r, "max gamma alpha^2 + 2 beta^2 - 2 beta", e2, 1e-12);
  const CouplingCoefficients one = coefficients(1.0);
  detail::equal(r, "alpha(1)", one.alpha, 0.0);
  detail::equal(r, "beta(1)", one.beta, 1.0);
}

// 2
inline void regime_bounds(CriterionResult& r, const Options&) {
  double lo = 1e300, hi = -1e300, top = -1e300;
  for (int k = 1; k <= 100; ++k) {
    const double g = k / 101.0;
    const CouplingCoefficients c = coefficients(g);
    lo = std::min(lo, (2.0 - g) * c.beta);
    hi = std::max(hi, (2.0 - g) * c.beta);
    top = std::max(top, (1.0 - 2.0 * g) * c.beta);
  }
  detail::greater(r, "min (2 - gamma) beta", lo, 1.0);
  detail::less(r, "max (2 - gamma) beta", hi, 2.0);
  detail::less(r, "max (1 - 2 gamma) beta", top, 1.0);
}

// 3
inline void slope_regimes(CriterionResult& r, const Options& opt) {
  DCurveOptions dopt;
  dopt.n_points = 4001;
  for (double p : {2.0, 3.0, 5.0, 6.0})
    for (double g : {0.5, 1.0}) {
      const Sign want = p < 4.0 ? Sign::positive : Sign::negative;
      const SweepResult s = d_sweep(p, g, omega_sweep(g, 40, 100.0), dopt, opt.jobs);
      int agree = 0, failed = 0;
      for (std::size_t i = 0; i < s.rows.size(); ++i) {
        if (!s.rows[i]) {
          ++failed;
          continue;
        }
        const DCurveRow& row = *s.rows[i];
        if (d2_sign(row.d2, row.d) == want && d2_sign(row.d2_identity, row.d) == want) ++agree;
      }
      const std::string tag = "p=" + detail::fmt(p) + " gamma=" + detail::fmt(g);
      detail::equal(r, tag + ": rows with d'' " + (want == Sign::positive ? "> 0" : "< 0"), agree, 40);
      detail::equal(r, tag + ": failed rows", failed, 0);
    }
  CriticalOptions copt;
  copt.grid = dopt;
  copt.sweep_factor = 100.0;
  const CriticalOmega c = find_omega_star(4.0, 1.0, copt);
  detail::less(r, "p=4 gamma=1: d'''(omega*) identity", c.d3_identity, 0.0);
  detail::less(r, "p=4 gamma=1: d'''(omega*) stencil", c.d3_stencil, 0.0);
}

// 4
inline void identity_cross_checks(CriterionResult& r, const Options& opt) {
  struct Point {
    double p, g, w;
  };
  std::vector<Point> pts;
  for (double p : {2.0, 2.5, 3.0, 4.0, 5.0, 6.0}) {
    pts.push_back({p, 0.5, -1.0});
    pts.push_back({p, 1.0, -2.0});
  }
  std::vector<DCurveRow> rows(pts.size());
  DCurveOptions dopt;
  dopt.n_points = 4001;
  parallel_for(pts.size(), opt.jobs,
               [&](std::size_t i) { rows[i] = d_derivatives(pts[i].p, pts[i].g, pts[i].w, dopt); });
  double d1 = 0.0, d2 = 0.0;
  for (const auto& row : rows) {
    d1 = std::max(d1, row.resid_d1 / row.charge);
    d2 = std::max(d2, row.resid_d2 / std::abs(row.d2_identity));
  }
  detail::less(r, "max |d' + Q| / Q over 12 points", d1, 1e-5);
  detail::less(r, "max |d''_stencil - d''_identity| / |d''| over 12 points", d2, 1e-4);
}

// 5
inline void spectral_counts(CriterionResult& r, const Options&) {
  for (auto [p, g, w] : {std::tuple{3.0, 1.0, -2.0}, std::tuple{6.0, 0.5, -1.0}})
    for (int n : {2001, 4001}) {
      const Grid grid = default_delta_grid(p, g, w, n);
      const std::string tag =
          "p=" + detail::fmt(p) + " gamma=" + detail::fmt(g) + " n=" + std::to_string(n);
      for (Sector s : {Sector::even, Sector::odd}) {
        const auto disc = Discretization::make(grid, s);
        const SpectrumReport rep =
            spectrum(operator_L(p, g, w, grid, s), mass_matrix(*disc), to_string(s), 3);
        detail::equal(r, tag + ": negative eigenvalues of L (" + to_string(s) + ")", rep.n_negative, 1);
      }
      const Field phi = bound_state(p, g, w, grid);
      const SpectrumReport m = spectrum(operator_M(p, g, w, grid), mass_matrix(phi.disc()), "full", 2);
      const Eigen::VectorXd v = phi.values().real();
      const double cos =
          std::abs(m.eigenvectors.col(0).dot(phi.disc().weights().cwiseProduct(v))) / norm_h(phi);
      detail::less(r, tag + ": |lowest eigenvalue of M|", std::abs(m.eigenvalues[0]), 1e-6);
      detail::greater(r, tag + ": cosine(kernel of M, phi)", cos, 0.999);
    }
}

// 6
inline void trial_function(CriterionResult& r, const Options&) {
  const double pts[6][3] = {{2, 1, -0.5}, {2, 1, -2}, {3, 1, -0.5}, {3, 0.5, -2}, {5, 1, -2}, {6, 0.5, -1}};
  double worst = 0.0, slope = 1e300;
  for (const auto& q : pts) {
    worst = std::max(worst, std::abs(odd_trial_form(q[0], q[1], q[2], 0.0)));
    const double ds = 1e-3;
    slope = std::min(slope, (odd_trial_form(q[0], q[1], q[2], ds) - odd_trial_form(q[0], q[1], q[2], -ds)) /
                                (2.0 * ds));
  }
  detail::less(r, "max |f(0)|", worst, 1e-8);
  detail::greater(r, "min f'(0)", slope, 0.0);
}

// 7
inline void scalar_classification(CriterionResult& r, const Options&) {
  for (int dim : {1, 3}) {
    const double w = -1.0;
    const GroundState2 gs = ground_state(w, default_system_grid(w, dim));
    const std::string tag = "N=" + std::to_string(dim);
    for (double a : {1.0, 2.0, 0.5, 1.5}) {
      const LaClassification c = classify_La(gs.varphi, w, a);
      detail::truth(r, tag + " a=" + detail::fmt(a) + ": " + c.regime, c.consistent);
      if (a == 1.0) {
        detail::less(r, tag + ": |kernel eigenvalue of L_1|", std::abs(c.report.eigenvalues[0]), 1e-6);
        detail::greater(r, tag + ": cosine(kernel of L_1, phi)", c.kernel_cosine, 0.999);
      }
    }
  }
}

// 8
inline void block_diagonalization(CriterionResult& r, const Options&) {
  const GroundState2 gs = ground_state(-1.0, default_system_grid(-1.0, 1));
  for (double g : {0.25, 0.5, 0.75}) {
    const SystemOperators o = operators_RI(g, -1.0, gs.varphi);
    detail::less(r, "gamma=" + detail::fmt(g) + ": real block residual", o.diag_residual_R, 1e-10);
    detail::less(r, "gamma=" + detail::fmt(g) + ": imaginary block residual", o.diag_residual_I, 1e-10);
  }
}

// 9
inline void alignment_machinery(CriterionResult& r, const Options&) {
  const double w = -2.0;
  const PipelineSetup s = pipeline_setup(Pipeline::collapse, 6.0, 1.0, w, 2001);
  const LyapunovFunctionals<DeltaNls> lf(s.model, w, s.phi, s.psi);
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  const double size = 0.01 * norm_x(s.model, s.phi);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Field u = s.phi + size * random_direction(s.model, rng);
    const double shift = angle(rng);
    const double t0 = lf.align(u).theta;
    const double t1 = lf.align(apply_T(s.model, shift, u)).theta;
    worst = std::max(worst, std::abs(detail::wrap_angle(t1 - (t0 - shift))));
  }
  detail::less(r, "max |theta(T(s)u) - theta(u) + s| (mod 2 pi), 20 states", worst, 1e-8);

  auto residual = [&](double dt) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 1.0;
    cfg.diag_stride = 10;
    cfg.stop_on_exit = true;
    const OrbitReference ref{s.phi, w, s.psi, {}};
    return lyapunov_identity_residual(evolve(s.model, s.phi + 1e-3 * s.psi, cfg, ref).diagnostics);
  };
  const double r1 = residual(1e-3), r2 = residual(5e-4);
  detail::less(r, "dA/dt + P residual at dt = 1e-3", r1, 1e-3);
  detail::within(r, "residual reduction when dt is halved", r1 / r2, 3.0, 5.0);
}

/// Least-squares coefficient of lambda^3 in S(phi_lambda) - S(phi) over lambda in +-{0.01..0.08}.
inline double cubic_coefficient(const PipelineSetup& s) {
  const double base = action(s.model, s.omega, s.phi);
  Eigen::MatrixXd a(16, 3);
  Eigen::VectorXd b(16);
  int row = 0;
  for (int k = 1; k <= 8; ++k)
    for (double sign : {-1.0, 1.0}) {
      const double l = sign * 0.01 * k;
      const Field u = charge_preserving_curve(s.model, s.phi, s.psi, l);
      a.row(row) << l * l, l * l * l, l * l * l * l;
      b[row] = action(s.model, s.omega, u) - base;
      ++row;
    }
  return a.colPivHouseholderQr().solve(b)[1];
}

// 10
inline void energy_gaps(CriterionResult& r, const Options&) {
  {
    const double w = -2.0;
    const PipelineSetup s = pipeline_setup(Pipeline::collapse, 6.0, 1.0, w, 2001);
    const LyapunovFunctionals<DeltaNls> lf(s.model, w, s.phi, s.psi);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = 0.02 * norm_x(s.model, s.phi);
    double worst = 1e300;
    for (int k = 0; k < 200; ++k) {
      const Field u = s.phi + (radius * unit(rng)) * random_direction(s.model, rng);
      worst = std::min(worst, lf.gap_lambda_p(normalize_charge(s.model, u, s.phi)));
    }
    detail::greater(r, "min E(u) - E(phi) - Lambda P over 200 samples", worst, -1e-10);
  }
  {
    CriticalOptions copt;
    copt.grid.n_points = 4001;
    const double ws = find_omega_star(4.0, 1.0, copt).omega_star;
    const PipelineSetup s = pipeline_setup(Pipeline::degenerate, 4.0, 1.0, ws, 4001);
    const ConditionReport a2b = check_A2b(s.model, ws, s.phi, s.psi);
    const double nu = a2b.scalars.at("nu");
    const double c3 = cubic_coefficient(s);
    detail::less(r, "|c3 + nu/6| / |nu/6| at omega*", std::abs(c3 + nu / 6.0) / std::abs(nu / 6.0), 0.05);
  }
}

// 11
inline void condition_pipelines(CriterionResult& r, const Options&) {
  auto record = [&](const std::string& tag, const std::vector<ConditionReport>& reps) {
    for (const auto& c : reps) detail::truth(r, tag + ": " + c.condition, c.holds);
  };
  record("collapse p=6", run_pipeline(Pipeline::collapse, 6.0, 1.0, -2.0));
  record("two-negative p=2", run_pipeline(Pipeline::two_negative, 2.0, 1.0, -2.0));
  const double ws = find_omega_star(4.0, 1.0).omega_star;
  record("degenerate p=4", run_pipeline(Pipeline::degenerate, 4.0, 1.0, ws));

  const std::vector<ConditionReport> ce = check_counterexample();
  detail::truth(r, "interval: A1", ce[0].holds);
  detail::truth(r, "interval: A2a", ce[1].holds);
  detail::truth(r, "interval: A3 fails", !ce[2].holds);
  detail::less(r, "interval: |three-constraint minimum + 3|", std::abs(ce[2].scalars.at("k0_estimate") + 3.0), 1e-8);
  detail::less(r, "interval: |four-constraint minimum - 5|", std::abs(ce[3].scalars.at("min_h") - 5.0), 1e-8);
}

struct ExitRun {
  std::optional<double> exit;
  double max_distance = 0, energy_drift = 0, charge_drift = 0;
};

inline ExitRun run_delta(const DeltaNls& m, double omega, const Field& phi, const Field& u0,
                         double dt, double t_end, bool stop) {
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.diag_stride = std::max(1, static_cast<int>(std::lround(0.5 / dt)));
  cfg.stop_on_exit = stop;
  const TrajectoryDiagnostics d = evolve(m, u0, cfg, OrbitReference{phi, omega, std::nullopt, {}}).diagnostics;
  ExitRun out{d.exit_time, 0, d.energy_drift, d.charge_drift};
  for (double x : d.tube_distance) out.max_distance = std::max(out.max_distance, x);
  return out;
}

// 12
inline void dynamics_dichotomy(CriterionResult& r, const Options& opt) {
  double drift = 0.0;
  {
    const double w = -2.0;
    const Field phi = bound_state(2.0, 1.0, w, default_delta_grid(2.0, 1.0, w, 2001), Sector::even);
    const DeltaNls m(2.0, 1.0, phi.disc_ptr());
    std::mt19937 rng(3);
    const ExitRun e = run_delta(m, w, phi, phi + 1e-3 * random_direction(m, rng), 2e-3, 50.0, false);
    detail::less(r, "stable p=2: max tube distance for t <= 50", e.max_distance, 1e-2);
    drift = std::max({drift, e.energy_drift, e.charge_drift});
  }
  struct Case {
    std::string tag;
    Pipeline pl;
    double p, omega;
  };
  const double ws = find_omega_star(4.0, 1.0).omega_star;
  const std::vector<Case> cases{{"collapse p=6", Pipeline::collapse, 6.0, -2.0},
                                {"two-negative p=2", Pipeline::two_negative, 2.0, -2.0},
                                {"degenerate p=4", Pipeline::degenerate, 4.0, ws}};
  struct Job {
    std::size_t c;
    double dt;
    int n;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < cases.size(); ++c)
    for (auto [dt, n] : {std::pair{2e-3, 2001}, std::pair{1e-3, 2001}, std::pair{2e-3, 4001}})
      jobs.push_back({c, dt, n});
  std::vector<ExitRun> runs(jobs.size());
  parallel_for(jobs.size(), opt.jobs, [&](std::size_t i) {
    const Case& c = cases[jobs[i].c];
    const PipelineSetup s = pipeline_setup(c.pl, c.p, 1.0, c.omega, jobs[i].n);
    // the degenerate direction sits on the charge level of phi
    const Field u0 = c.pl == Pipeline::degenerate ? charge_preserving_curve(s.model, s.phi, s.psi, 1e-3)
                                                  : s.phi + 1e-3 * s.psi;
    runs[i] = run_delta(s.model, c.omega, s.phi, u0, jobs[i].dt, 200.0, true);
  });
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const std::string tag = cases[jobs[i].c].tag + " dt=" + detail::fmt(jobs[i].dt) +
                            " n=" + std::to_string(jobs[i].n) + ": exit time";
    detail::less(r, tag, runs[i].exit.value_or(std::numeric_limits<double>::infinity()), 200.0);
    drift = std::max({drift, runs[i].energy_drift, runs[i].charge_drift});
  }
  const GroundState2 gs = ground_state(-1.0, default_system_grid(-1.0, 1));
  for (double g : {0.5, 2.0}) {
    const SystemNls m(g, gs.varphi.disc_ptr());
    const Field st = semitrivial_state(gs.varphi);
    Field dir(gs.varphi.disc_ptr(), 2);
    dir.component(0) = gs.varphi.values();
    dir = (1.0 / norm_h(dir)) * dir;
    IntegratorConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_end = 100.0;
    cfg.diag_stride = 250;
    cfg.stop_on_exit = true;
    const TrajectoryDiagnostics d =
        evolve(m, st + 1e-3 * dir, cfg, OrbitReference{st, -1.0, std::nullopt, {}}).diagnostics;
    const std::string tag = "semitrivial gamma=" + detail::fmt(g);
    if (g < 1.0)
      detail::truth(r, tag + ": in tube for t <= 100", !d.exit_time);
    else
      detail::truth(r, tag + ": exits before t = 100", d.exit_time.has_value());
    drift = std::max({drift, d.energy_drift, d.charge_drift});
  }
  detail::less(r, "max relative E, Q drift over all runs", drift, 1e-6);
}

// 13
inline void exact_model(CriterionResult& r, const Options&) {
  const int n_max = 32;
  std::mt19937 rng(11);
  std::normal_distribution<double> n01;
  SineState s{Eigen::VectorXcd::Zero(n_max)};
  for (int n = 0; n < n_max; ++n) s.coefficients[n] = cplx(n01(rng), n01(rng)) / double(1 + n * n);
  double worst = 0.0;
  for (double t : {0.37, 10.0, 100.0}) {
    const SineState e = exact_evolve(s, t);
    for (int n = 0; n < n_max; ++n)
      worst = std::max(worst, std::abs(std::abs(e.coefficients[n]) - std::abs(s.coefficients[n])) /
                                  std::abs(s.coefficients[n]));
  }
  detail::less(r, "exact evolution: max relative change of |a_n|", worst, 1e-14);

  // the grid integrator keeps the discrete sine coefficients on their circles
  const auto disc = Discretization::make(Grid::line_segment(0.0, M_PI, 257));
  const LinearInterval m(disc);
  std::vector<Field> modes;
  Field u0(disc, 1);
  for (int n = 1; n <= 6; ++n) {
    modes.push_back(sine_mode(disc, n));
    u0 += s.coefficients[n - 1] * modes.back();
  }
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 5.0;
  cfg.diag_stride = 5000;
  const Field u1 = evolve(m, u0, cfg).final_state;
  double grid_worst = 0.0;
  for (const Field& f : modes) {
    const double n2 = inner_h(f, f);
    const cplx a0 = inner_hc(f, u0) / n2, a1 = inner_hc(f, u1) / n2;
    grid_worst = std::max(grid_worst, std::abs(std::abs(a1) - std::abs(a0)) / std::abs(a0));
  }
  detail::less(r, "grid evolution: max relative change of |a_n| over 5000 steps", grid_worst, 1e-11);

  double far = 0.0;
  for (int k = 0; k < 50; ++k) {
    SineState p = sine_mode_state(n_max, 2);
    Eigen::VectorXcd dv(n_max);
    double xn = 0.0;
    for (int n = 1; n <= n_max; ++n) {
      dv[n - 1] = cplx(n01(rng), n01(rng)) / double(n * n);
      xn += n * n * std::norm(dv[n - 1]);
    }
    p.coefficients += (1e-2 / std::sqrt(xn)) * dv;
    for (int step = 0; step <= 200; ++step)
      far = std::max(far, sine_tube_distance(exact_evolve(p, 0.5 * step), 2));
  }
  detail::less(r, "50 perturbations of phi_2: max tube distance for t <= 100", far, 3e-2);
}

struct Criterion {
  int id;
  std::string title;
  std::function<void(CriterionResult&, const Options&)> run;
};

inline const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {1, "coupling coefficient identities", coefficient_identities},
      {2, "coupling regime bounds", regime_bounds},
      {3, "sign regimes of d''", slope_regimes},
      {4, "d' and d'' cross-checks", identity_cross_checks},
      {5, "negative directions of the delta operators", spectral_counts},
      {6, "odd trial function", trial_function},
      {7, "classification of L_a", scalar_classification},
      {8, "block diagonalization on the branch", block_diagonalization},
      {9, "phase alignment and dA/dt = -P", alignment_machinery},
      {10, "energy gaps and the cubic law", energy_gaps},
      {11, "condition pipelines", condition_pipelines},
      {12, "stable and unstable dynamics", dynamics_dichotomy},
      {13, "exact linear model", exact_model},
  };
  return all;
}

inline CriterionResult run_criterion(const Criterion& c, const Options& opt) {
  CriterionResult r;
  r.id = c.id;
  r.title = c.title;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.run(r, opt);
    r.passed = !r.checks.empty();
    for (const auto& k : r.checks) r.passed = r.passed && k.ok;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.passed = false;
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Runs the selected criteria (all when `ids` is empty) in order.
inline std::vector<CriterionResult> run(const std::vector<int>& ids, const Options& opt = {}) {
  std::vector<CriterionResult> out;
  for (const Criterion& c : criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    out.push_back(run_criterion(c, opt));
  }
  return out;
}

inline std::string describe(const Check& c) {
  std::string s = c.name + " = " + detail::fmt(c.value);
  if (c.relation == "in")
    s += " (want in [" + detail::fmt(c.bound) + ", " + detail::fmt(c.bound_hi) + "])";
  else
    s += " (want " + c.relation + " " + detail::fmt(c.bound) + ")";
  return s;
}

}  // namespace nlsstab::acceptance
