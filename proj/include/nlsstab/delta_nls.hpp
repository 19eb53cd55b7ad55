#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/linalg.hpp"
#include "nlsstab/model.hpp"

namespace nlsstab {

// ---------------------------------------------------------------------------------------------
// Closed forms

inline void require_delta_parameters(double p, double gamma, double omega) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("delta-nls needs 1 < p < infinity");
  if (gamma < 0.0) throw DomainError("attractive potential (gamma < 0) is not supported");
  if (!(omega < -0.25 * gamma * gamma) || !(omega < 0.0))
    throw DomainError("omega = " + std::to_string(omega) + " is outside Omega = (-inf, " +
                      std::to_string(-0.25 * gamma * gamma) + ")");
}

/// Shift of the two humps away from the origin.
inline double b_omega(double p, double gamma, double omega) {
  require_delta_parameters(p, gamma, omega);
  const double k = std::sqrt(-omega);
  const double z = gamma / (2.0 * k);
  const double atanh_z = 0.5 * std::log1p(2.0 * z / (1.0 - z));
  return 2.0 * atanh_z / ((p - 1.0) * k);
}

/// Even soliton of -phi'' - omega phi - phi^p = 0 without the point interaction.
inline double free_profile(double p, double omega, double x) {
  const double amp_log = std::log(-(p + 1.0) * omega / 2.0) / (p - 1.0);
  const double z = std::abs(0.5 * (p - 1.0) * std::sqrt(-omega) * x);
  const double log_cosh = z + std::log1p(std::exp(-2.0 * z)) - std::log(2.0);
  return std::exp(amp_log - 2.0 / (p - 1.0) * log_cosh);
}

inline double free_profile_d1(double p, double omega, double x) {
  const double kappa = 0.5 * (p - 1.0) * std::sqrt(-omega);
  return -std::sqrt(-omega) * std::tanh(kappa * x) * free_profile(p, omega, x);
}

inline double free_profile_d2(double p, double omega, double x) {
  const double f = free_profile(p, omega, x);
  return -omega * f - std::pow(f, p);
}

/// phi_omega(x) = phi_free(|x| - b_omega).
inline double closed_form(double p, double gamma, double omega, double x) {
  return free_profile(p, omega, std::abs(x) - b_omega(p, gamma, omega));
}

/// Symmetric truncation with half width b_omega + 12/sqrt(-omega).
inline Grid default_delta_grid(double p, double gamma, double omega, int n_points = 2001) {
  const double half = b_omega(p, gamma, omega) + 12.0 / std::sqrt(-omega);
  return Grid::full_line(half, n_points);
}

// ---------------------------------------------------------------------------------------------
// Model

/// E(u) = (1/2)|u'|^2 + (gamma/2)|u(0)|^2 - |u|_{p+1}^{p+1}/(p+1), J = i.
class DeltaNls {
 public:
  DeltaNls(double p, double gamma, DiscPtr disc) : p_(p), gamma_(gamma), disc_(std::move(disc)) {
    if (!(p > 1.0)) throw DomainError("delta-nls needs p > 1");
    if (gamma < 0.0) throw DomainError("attractive potential (gamma < 0) is not supported");
    if (disc_->grid().kind != GridKind::full_line)
      throw DomainError("delta-nls lives on a full-line grid");
    kdiag_ = disc_->kinetic_diag();
    if (auto o = disc_->origin()) kdiag_[*o] += gamma_;
  }

  double p() const { return p_; }
  double gamma() const { return gamma_; }
  DiscPtr disc() const { return disc_; }
  int components() const { return 1; }
  std::vector<double> j_weights() const { return {1.0}; }

  /// Kinetic form including the point interaction.
  const Eigen::VectorXd& form_diag() const { return kdiag_; }
  const Eigen::VectorXd& form_off() const { return disc_->kinetic_off(); }

  double energy(const Field& u) const {
    require_on_model(*this, u);
    const Eigen::VectorXcd& v = u.values();
    const Eigen::VectorXcd kv = tridiag_apply(kdiag_, form_off(), v);
    double e = 0.5 * v.dot(kv).real();
    const auto& w = disc_->weights();
    double pot = 0.0;
    for (Eigen::Index j = 0; j < v.size(); ++j) pot += w[j] * std::pow(std::abs(v[j]), p_ + 1.0);
    return e - pot / (p_ + 1.0);
  }

  Field grad_E(const Field& u) const {
    require_on_model(*this, u);
    const Eigen::VectorXcd& v = u.values();
    Eigen::VectorXcd g = tridiag_apply(kdiag_, form_off(), v);
    const auto& w = disc_->weights();
    for (Eigen::Index j = 0; j < v.size(); ++j)
      g[j] = g[j] / w[j] - std::pow(std::abs(v[j]), p_ - 1.0) * v[j];
    return u.with_values(std::move(g));
  }

  /// (u, v)_X = (u', v') + (u, v) + gamma Re u(0) conj v(0).
  SparseMat x_gram() const { return sparse_tridiag(kdiag_ + disc_->weights(), form_off()); }

  Hessian hessian(double omega, const Field& state) const {
    const Eigen::VectorXd phi = real_state(state);
    const auto& w = disc_->weights();
    Eigen::VectorXd dre(phi.size()), dim(phi.size());
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
      const double q = std::pow(std::abs(phi[j]), p_ - 1.0);
      dre[j] = kdiag_[j] - omega * w[j] - p_ * w[j] * q;
      dim[j] = kdiag_[j] - omega * w[j] - w[j] * q;
    }
    return {sparse_tridiag(dre, form_off()), sparse_tridiag(dim, form_off())};
  }

  /// <S'''(state)(psi, psi), psi> at a real positive state.
  double cubic_form(const Field& state, const Field& psi) const {
    require_on_model(*this, psi);
    const Eigen::VectorXd phi = real_state(state);
    const auto& w = disc_->weights();
    double s = 0.0;
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
      const double x = psi.values()[j].real(), y = psi.values()[j].imag();
      s += w[j] * std::pow(std::abs(phi[j]), p_ - 2.0) * (p_ * x * x * x + 3.0 * x * y * y);
    }
    return -(p_ - 1.0) * s;
  }

 private:
  Eigen::VectorXd real_state(const Field& state) const {
    require_on_model(*this, state);
    const Eigen::VectorXd im = state.values().imag();
    const Eigen::VectorXd re = state.values().real();
    if (im.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, re.cwiseAbs().maxCoeff()))
      throw PreconditionError("second variation is assembled at real states only");
    return re;
  }

  double p_, gamma_;
  DiscPtr disc_;
  Eigen::VectorXd kdiag_;
};

// ---------------------------------------------------------------------------------------------
// Bound states

/// Samples of the closed form on the unknowns of `disc`.
inline Field closed_form_profile(double p, double gamma, double omega, const DiscPtr& disc) {
  const double b = b_omega(p, gamma, omega);
  Eigen::VectorXd v(disc->size());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = free_profile(p, omega, std::abs(disc->x()[j]) - b);
  return Field::from_real(disc, v);
}

/// Newton iteration for the discrete stationary equation on the even sector.
inline Field polish_even_profile(const DeltaNls& model, double omega, Field start,
                                 int max_iter = 40) {
  if (model.disc()->sector() != Sector::even)
    throw PreconditionError("profile polishing runs on the even sector");
  const auto& w = model.disc()->weights();
  const double p = model.p();
  Eigen::VectorXd phi = start.values().real();
  double last = std::numeric_limits<double>::infinity();
  double rel = last;
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd r = tridiag_apply(model.form_diag(), model.form_off(), phi);
    Eigen::VectorXd jd(phi.size());
    for (Eigen::Index j = 0; j < phi.size(); ++j) {
      const double q = std::pow(std::abs(phi[j]), p - 1.0);
      r[j] -= w[j] * (omega * phi[j] + q * phi[j]);
      jd[j] = model.form_diag()[j] - w[j] * (omega + p * q);
    }
    const Eigen::VectorXd step = solve_tridiag(jd, model.form_off(), r);
    phi -= step;
    rel = step.cwiseAbs().maxCoeff() / phi.cwiseAbs().maxCoeff();
    if (rel < 1e-14 || (rel < 1e-11 && rel >= 0.5 * last)) break;
    last = rel;
  }
  if (rel > 1e-10) throw NumericError("profile Newton iteration did not converge");
  if ((phi.array() <= 0.0).any()) throw NumericError("polished profile lost positivity");
  return Field::from_real(model.disc(), phi);
}

/// Exact derivative of the discrete profile with respect to omega: L phi' = W phi.
inline Field discrete_tangent(const DeltaNls& model, double omega, const Field& phi) {
  const Hessian hs = model.hessian(omega, phi);
  const Eigen::Index n = phi.nodes();
  Eigen::VectorXd d(n), e(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    d[i] = hs.re.coeff(i, i);
    if (i + 1 < n) e[i] = hs.re.coeff(i, i + 1);
  }
  const Eigen::VectorXd rhs = model.disc()->weights().cwiseProduct(phi.values().real());
  return Field::from_real(model.disc(), solve_tridiag(d, e, rhs));
}

struct DeltaProfile {
  double p = 0, gamma = 0, omega = 0;
  double b_omega = 0;
  Field field;          // discrete bound state on the requested sector
  Field d_omega_field;  // central omega-difference of the bound state
  Field closed_form;    // raw samples of the closed form
  double residual_h = 0;
  double residual_x = 0;
};

namespace detail {

inline Field even_bound_state(double p, double gamma, double omega, const Grid& grid) {
  auto even = Discretization::make(grid, Sector::even);
  DeltaNls model(p, gamma, even);
  return polish_even_profile(model, omega, closed_form_profile(p, gamma, omega, even));
}

}  // namespace detail

/// Discrete bound state on `grid` restricted to `sector` (full or even).
inline Field bound_state(double p, double gamma, double omega, const Grid& grid,
                         Sector sector = Sector::full) {
  require_delta_parameters(p, gamma, omega);
  if (sector == Sector::odd) throw PreconditionError("the bound state has no odd component");
  const Field even = detail::even_bound_state(p, gamma, omega, grid);
  return to_sector(even, Discretization::make(grid, sector));
}

/// d phi / d omega by a central difference of discrete bound states on a fixed grid.
inline Field profile_domega(double p, double gamma, double omega, const Grid& grid,
                            Sector sector = Sector::full) {
  require_delta_parameters(p, gamma, omega);
  const double dw = 1e-5 * std::abs(omega);
  require_delta_parameters(p, gamma, omega + dw);
  const Field up = bound_state(p, gamma, omega + dw, grid, sector);
  const Field dn = bound_state(p, gamma, omega - dw, grid, sector);
  return (1.0 / (2.0 * dw)) * (up - dn);
}

inline DeltaProfile profile(double p, double gamma, double omega, const Grid& grid,
                            Sector sector = Sector::full) {
  DeltaProfile out;
  out.p = p;
  out.gamma = gamma;
  out.omega = omega;
  out.b_omega = b_omega(p, gamma, omega);
  out.field = bound_state(p, gamma, omega, grid, sector);
  out.d_omega_field = profile_domega(p, gamma, omega, grid, sector);
  out.closed_form = closed_form_profile(p, gamma, omega, out.field.disc_ptr());
  DeltaNls model(p, gamma, out.field.disc_ptr());
  const Field r = grad_S(model, omega, out.field);
  out.residual_h = norm_h(r);
  out.residual_x = norm_x(model, r);
  return out;
}

/// Quadratic form of the real-part operator L_omega at the discrete bound state.
inline SparseMat operator_L(double p, double gamma, double omega, const Grid& grid,
                            Sector sector = Sector::full) {
  const Field even = detail::even_bound_state(p, gamma, omega, grid);
  auto disc = Discretization::make(grid, sector);
  const Field phi = Field(disc, pick_nodes(*disc, nodal_values(even)));
  return DeltaNls(p, gamma, disc).hessian(omega, phi).re;
}

/// Quadratic form of the imaginary-part operator M_omega at the discrete bound state.
inline SparseMat operator_M(double p, double gamma, double omega, const Grid& grid,
                            Sector sector = Sector::full) {
  const Field even = detail::even_bound_state(p, gamma, omega, grid);
  auto disc = Discretization::make(grid, sector);
  const Field phi = Field(disc, pick_nodes(*disc, nodal_values(even)));
  return DeltaNls(p, gamma, disc).hessian(omega, phi).im;
}

/// f(s) = int_0^inf phi''(y)^2 - omega phi'(y)^2 - p phi(y+s)^{p-1} phi'(y)^2 dy for the free
/// soliton phi; the quadratic form of L_omega on the odd trial function pushed out by s.
inline double odd_trial_form(double p, double gamma, double omega, double s) {
  const double b = b_omega(p, gamma, omega);
  if (!(s > -b)) throw DomainError("trial shift s must exceed -b_omega");
  auto integrand = [&](double y) {
    const double d1 = free_profile_d1(p, omega, y);
    const double d2 = free_profile_d2(p, omega, y);
    return d2 * d2 - omega * d1 * d1 - p * std::pow(free_profile(p, omega, y + s), p - 1.0) * d1 * d1;
  };
  const double scale = 1.0 / std::sqrt(-omega);
  double total = 0.0;
  // split at a few decay lengths so the adaptive rule sees the bulk
  const double cuts[] = {0.0, 2.0 * scale, 6.0 * scale, 15.0 * scale, 40.0 * scale};
  for (int k = 0; k < 4; ++k)
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, cuts[k],
                                                                          cuts[k + 1], 15, 1e-14);
  total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, cuts[4], std::numeric_limits<double>::infinity(), 15, 1e-14);
  return total;
}

}  // namespace nlsstab
