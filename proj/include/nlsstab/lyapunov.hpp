#pragma once

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/model.hpp"

namespace nlsstab {

/// f(s) = |T(s)u - phi|_X^2 expanded as |u|^2 + |phi|^2 - 2 Re sum_c exp(i j_c s) z_c.
class OrbitDistance {
 public:
  template <HamiltonianModel M>
  OrbitDistance(const M& m, const Field& u, const Field& phi) : j_(m.j_weights()) {
    require_on_model(m, u);
    require_on_model(m, phi);
    const SparseMat g = m.x_gram();
    base_ = 0.0;
    for (int c = 0; c < m.components(); ++c) {
      const Eigen::VectorXcd uc = u.component(c), pc = phi.component(c);
      const Eigen::VectorXcd gu = g * uc, gp = g * pc;
      z_.push_back(pc.dot(gu));
      base_ += uc.dot(gu).real() + pc.dot(gp).real();
    }
  }

  double value(double s) const {
    double v = base_;
    for (std::size_t c = 0; c < z_.size(); ++c) v -= 2.0 * (std::polar(1.0, j_[c] * s) * z_[c]).real();
    return v;
  }
  double slope(double s) const {
    double v = 0.0;
    for (std::size_t c = 0; c < z_.size(); ++c) v += 2.0 * j_[c] * (std::polar(1.0, j_[c] * s) * z_[c]).imag();
    return v;
  }
  double curvature(double s) const {
    double v = 0.0;
    for (std::size_t c = 0; c < z_.size(); ++c)
      v += 2.0 * j_[c] * j_[c] * (std::polar(1.0, j_[c] * s) * z_[c]).real();
    return v;
  }

  struct Minimum {
    double s, distance_sq;
  };

  /// 64-sample scan, Brent refinement, Newton polish on the slope.
  Minimum minimize() const {
    constexpr int samples = 64;
    const double step = 2.0 * M_PI / samples;
    int best = 0;
    double fbest = value(0.0);
    for (int k = 1; k < samples; ++k)
      if (const double f = value(k * step); f < fbest) {
        fbest = f;
        best = k;
      }
    const auto r = boost::math::tools::brent_find_minima([this](double s) { return value(s); },
                                                         (best - 1) * step, (best + 1) * step, 52);
    double s = r.first, f = r.second;
    for (int it = 0; it < 8; ++it) {
      const double c = curvature(s);
      if (!(c > 0.0)) break;
      const double t = s - slope(s) / c;
      const double ft = value(t);
      // tiny steps are judged by the slope; f only changes at roundoff level there
      if (ft > f && std::abs(t - s) > 1e-6) break;
      const bool done = std::abs(t - s) < 1e-15 * (1.0 + std::abs(s));
      s = t;
      f = ft;
      if (done) break;
    }
    s = std::fmod(s, 2.0 * M_PI);
    if (s < 0.0) s += 2.0 * M_PI;
    if (s >= 2.0 * M_PI) s = 0.0;
    return {s, std::max(0.0, f)};
  }

 private:
  std::vector<double> j_;
  std::vector<cplx> z_;
  double base_ = 0.0;
};

/// inf_s |u - T(s) phi|_X.
template <HamiltonianModel M>
double tube_distance(const M& m, const Field& u, const Field& phi) {
  // |u - T(s)phi| = |T(-s)u - phi|
  return std::sqrt(OrbitDistance(m, u, phi).minimize().distance_sq);
}

/// Phase that aligns u with phi: (T(theta)u, J phi)_X = 0 at the minimizing branch.
template <HamiltonianModel M>
double align_phase(const M& m, const Field& u, const Field& phi) {
  return OrbitDistance(m, u, phi).minimize().s;
}

struct AlignedState {
  double theta = 0;
  Field m_field;
  double distance = 0;
  double a_value = 0;
  double lambda_value = 0;
  double p_value = 0;
  double orthogonality = 0;  // (M, J phi)_X relative to |M|_X |J phi|_X
};

struct TubeOptions {
  double radius_rel = 0.05;   // tube radius relative to |phi|_X
  double singular_tol = 1e-12;
};

/// Reference data for the functionals A, Lambda and P at a bound state.
template <HamiltonianModel M>
class LyapunovFunctionals {
 public:
  LyapunovFunctionals(const M& model, double omega, Field phi, Field psi, TubeOptions opt = {})
      : model_(model), omega_(omega), phi_(std::move(phi)), psi_(std::move(psi)), opt_(opt) {
    require_on_model(model_, phi_);
    require_on_model(model_, psi_);
    jphi_ = apply_J(model_, phi_);
    j2phi_ = apply_J(model_, jphi_);
    jinv_psi_ = apply_J_inv(model_, psi_);
    // J I^{-1} R J phi in the H representation
    jrj_ = apply_J(model_, riesz_X(model_, jphi_));
    radius_ = opt_.radius_rel * norm_x(model_, phi_);
  }

  double tube_radius() const { return radius_; }
  const Field& phi() const { return phi_; }
  const Field& psi() const { return psi_; }
  double omega() const { return omega_; }

  AlignedState align(const Field& u) const {
    const OrbitDistance od(model_, u, phi_);
    const auto mn = od.minimize();
    AlignedState out;
    out.distance = std::sqrt(mn.distance_sq);
    if (out.distance > radius_)
      throw TubeExitError("state is outside the tube around the bound-state orbit", out.distance);
    out.theta = mn.s;
    out.m_field = apply_T(model_, out.theta, u);
    const Field& mf = out.m_field;
    out.orthogonality =
        std::abs(inner_x(model_, mf, jphi_)) / (norm_x(model_, mf) * norm_x(model_, jphi_));
    out.a_value = inner_h(mf, jinv_psi_);
    out.lambda_value = inner_h(mf, psi_);
    const double den = inner_x(model_, mf, j2phi_);
    if (std::abs(den) < opt_.singular_tol * norm_x(model_, mf) * norm_x(model_, j2phi_))
      throw AlignmentSingularError("(M(u), J^2 phi)_X vanishes");
    const Field g = grad_S(model_, omega_, mf);
    out.p_value = inner_h(g, psi_) - out.lambda_value * inner_h(g, jrj_) / den;
    return out;
  }

  /// E(u) - E(phi) - Lambda(u) P(u); nonnegative near phi on the charge level set when the
  /// instability conditions hold.
  double gap_lambda_p(const Field& u, double charge_tol = 1e-10) const {
    require_charge(u, charge_tol);
    const AlignedState a = align(u);
    return model_.energy(u) - model_.energy(phi_) - a.lambda_value * a.p_value;
  }

  /// E(u) - E(phi) - sign(nu) k* P(u).
  double gap_signed_p(const Field& u, double nu, double kstar, double charge_tol = 1e-10) const {
    require_charge(u, charge_tol);
    const AlignedState a = align(u);
    const double sgn = nu > 0.0 ? 1.0 : (nu < 0.0 ? -1.0 : 0.0);
    return model_.energy(u) - model_.energy(phi_) - sgn * kstar * a.p_value;
  }

 private:
  void require_charge(const Field& u, double tol) const {
    const double q0 = charge(model_, phi_), q = charge(model_, u);
    if (std::abs(q - q0) > tol * q0)
      throw PreconditionError("energy gaps are defined on the charge level set of phi");
  }

  const M& model_;
  double omega_;
  Field phi_, psi_, jphi_, j2phi_, jinv_psi_, jrj_;
  TubeOptions opt_;
  double radius_ = 0;
};

/// phi + lambda psi + sigma phi with sigma chosen so that Q is unchanged; psi must be H-orthogonal
/// to phi.
template <HamiltonianModel M>
Field charge_preserving_curve(const M& m, const Field& phi, const Field& psi, double lambda) {
  const double ratio = charge(m, psi) / charge(m, phi);
  const double rad = 1.0 - ratio * lambda * lambda;
  if (!(rad > 0.0)) throw DomainError("test-curve parameter too large: radicand " + std::to_string(rad));
  const double sigma = std::sqrt(rad) - 1.0;
  return (1.0 + sigma) * phi + lambda * psi;
}

/// Rescales u onto the charge level set of phi.
template <HamiltonianModel M>
Field normalize_charge(const M& m, const Field& u, const Field& phi) {
  return std::sqrt(charge(m, phi) / charge(m, u)) * u;
}

}  // namespace nlsstab
