#pragma once

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlsstab/delta_nls.hpp"
#include "nlsstab/errors.hpp"
#include "nlsstab/parallel.hpp"

namespace nlsstab {

struct DCurveRow {
  double omega = 0, d = 0, d1 = 0, d2 = 0, d3 = 0;
  double charge = 0;
  double d2_identity = 0;  // -(phi, phi')_H
  double d3_identity = 0;  // <S'''(phi')(phi', phi'), phi'> - 3 |phi'|^2
  double resid_d1 = 0;     // |d1 + Q|
  double resid_d2 = 0;     // |d2 - d2_identity|
  double resid_d3 = 0;     // |d3 - d3_identity|
};

struct DCurveOptions {
  int n_points = 2001;
  double rel_step = 1e-3;  // delta omega / |omega|
  std::optional<double> half_width;  // overrides the default truncation
};

inline Grid dcurve_grid(double p, double gamma, double omega, const DCurveOptions& opt) {
  if (opt.half_width) return Grid::full_line(*opt.half_width, opt.n_points);
  return default_delta_grid(p, gamma, omega, opt.n_points);
}

/// S_omega(phi_omega) for the discrete bound state on `grid`.
inline double d_value(double p, double gamma, double omega, const Grid& grid) {
  const Field phi = bound_state(p, gamma, omega, grid, Sector::even);
  DeltaNls model(p, gamma, phi.disc_ptr());
  return action(model, omega, phi);
}

inline double d_value(double p, double gamma, double omega, const DCurveOptions& opt = {}) {
  return d_value(p, gamma, omega, dcurve_grid(p, gamma, omega, opt));
}

struct IdentityValues {
  double d = 0, charge = 0, d2 = 0, d3 = 0;
  double tangent_norm = 0;  // |phi'|_H
};

/// d, Q, d'' and d''' from the exact tangent of the discrete family.
inline IdentityValues d_identities(double p, double gamma, double omega, const Grid& grid) {
  const Field phi = bound_state(p, gamma, omega, grid, Sector::even);
  DeltaNls model(p, gamma, phi.disc_ptr());
  const Field t = discrete_tangent(model, omega, phi);
  IdentityValues out;
  out.d = action(model, omega, phi);
  out.charge = charge(model, phi);
  out.d2 = -inner_h(phi, t);
  out.tangent_norm = norm_h(t);
  out.d3 = model.cubic_form(phi, t) - 3.0 * out.tangent_norm * out.tangent_norm;
  return out;
}

inline DCurveRow d_derivatives(double p, double gamma, double omega, const DCurveOptions& opt = {}) {
  require_delta_parameters(p, gamma, omega);
  const double dw = opt.rel_step * std::abs(omega);
  if (!(omega + 2.0 * dw < -0.25 * gamma * gamma))
    throw DomainError("derivative stencil leaves Omega at omega = " + std::to_string(omega));
  const Grid grid = dcurve_grid(p, gamma, omega, opt);
  double f[5];
  for (int k = -2; k <= 2; ++k) f[k + 2] = d_value(p, gamma, omega + k * dw, grid);
  DCurveRow row;
  row.omega = omega;
  row.d = f[2];
  row.d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * dw);
  row.d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * dw * dw);
  row.d3 = (-f[0] + 2.0 * f[1] - 2.0 * f[3] + f[4]) / (2.0 * dw * dw * dw);
  const IdentityValues id = d_identities(p, gamma, omega, grid);
  row.charge = id.charge;
  row.d2_identity = id.d2;
  row.d3_identity = id.d3;
  row.resid_d1 = std::abs(row.d1 + id.charge);
  row.resid_d2 = std::abs(row.d2 - id.d2);
  row.resid_d3 = std::abs(row.d3 - id.d3);
  return row;
}

/// Rows for each omega; failures are reported per row rather than aborting the sweep.
struct SweepResult {
  std::vector<std::optional<DCurveRow>> rows;
  std::vector<std::string> errors;  // empty string for successful rows
};

inline SweepResult d_sweep(double p, double gamma, const std::vector<double>& omegas,
                           const DCurveOptions& opt = {}, int jobs = 1) {
  SweepResult out;
  out.rows.resize(omegas.size());
  out.errors.resize(omegas.size());
  parallel_for(omegas.size(), jobs, [&](std::size_t i) {
    try {
      out.rows[i] = d_derivatives(p, gamma, omegas[i], opt);
    } catch (const Error& e) {
      out.errors[i] = e.what();
    }
  });
  return out;
}

/// Geometric grid from -gamma^2/4 * 1.05 down to -gamma^2/4 * factor (or -1.05..-factor when gamma = 0).
inline std::vector<double> omega_sweep(double gamma, int count = 40, double factor = 1000.0) {
  if (count < 2) throw DomainError("an omega sweep needs at least two points");
  const double edge = gamma > 0.0 ? 0.25 * gamma * gamma : 1.0;
  std::vector<double> w(count);
  const double lo = std::log(1.05), hi = std::log(factor);
  for (int k = 0; k < count; ++k) w[k] = -edge * std::exp(lo + (hi - lo) * k / (count - 1));
  return w;
}

enum class Sign { negative = -1, undecided = 0, positive = 1 };

/// Sign of d'' with |d''| <= rel_tol |d| counted as undecided.
inline Sign d2_sign(double d2, double d, double rel_tol = 1e-6) {
  if (std::abs(d2) <= rel_tol * std::abs(d)) return Sign::undecided;
  return d2 > 0.0 ? Sign::positive : Sign::negative;
}

struct CriticalOmega {
  double omega_star = 0;
  std::pair<double, double> bracket{0, 0};  // (more negative, less negative)
  double d = 0;
  double d2 = 0;
  double d3_stencil = 0;
  double d3_identity = 0;
};

struct CriticalOptions {
  DCurveOptions grid;
  int sweep_points = 40;
  double sweep_factor = 1000.0;
  double tol_root = 1e-8;  // on |d''| relative to |d|
};

/// Sign change of d'' from positive (more negative omega) to negative, refined by bisection on
/// the identity route -(phi, phi')_H.
inline CriticalOmega find_omega_star(double p, double gamma, const CriticalOptions& opt = {}) {
  const std::vector<double> omegas = omega_sweep(gamma, opt.sweep_points, opt.sweep_factor);
  auto d2_at = [&](double w) {
    return d_identities(p, gamma, w, dcurve_grid(p, gamma, w, opt.grid));
  };
  std::optional<std::pair<double, double>> bracket;
  // omegas run from the edge of Omega outward
  IdentityValues prev = d2_at(omegas.front());
  for (std::size_t k = 1; k < omegas.size() && !bracket; ++k) {
    const IdentityValues cur = d2_at(omegas[k]);
    if (d2_sign(prev.d2, prev.d) == Sign::negative && d2_sign(cur.d2, cur.d) == Sign::positive)
      bracket = std::make_pair(omegas[k], omegas[k - 1]);
    prev = cur;
  }
  if (!bracket) throw NotFoundError("no sign change of d'' in the omega sweep");
  auto f = [&](double w) { return d2_at(w).d2; };
  boost::math::tools::eps_tolerance<double> tol(50);
  const auto root = boost::math::tools::bisect(f, bracket->first, bracket->second, tol);
  CriticalOmega out;
  out.bracket = *bracket;
  out.omega_star = 0.5 * (root.first + root.second);
  const IdentityValues at = d2_at(out.omega_star);
  out.d = at.d;
  out.d2 = at.d2;
  out.d3_identity = at.d3;
  if (std::abs(at.d2) > opt.tol_root * std::abs(at.d))
    throw NumericError("bisection did not reach |d''| < tol_root");
  out.d3_stencil = d_derivatives(p, gamma, out.omega_star, opt.grid).d3;
  return out;
}

}  // namespace nlsstab
