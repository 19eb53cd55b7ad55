#pragma once

#include <boost/numeric/odeint.hpp>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/linalg.hpp"
#include "nlsstab/model.hpp"
#include "nlsstab/spectral.hpp"

namespace nlsstab {

/// Two coupled fields with E = (1/2) sum |grad u_c|^2 - (1/3) sum |u_c|_3^3 - (gamma/2) Re int u_1^2 conj(u_2)
/// and J = diag(i, 2i).
class SystemNls {
 public:
  SystemNls(double gamma, DiscPtr disc) : gamma_(gamma), disc_(std::move(disc)) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("system coupling must be positive");
  }

  double gamma() const { return gamma_; }
  DiscPtr disc() const { return disc_; }
  int components() const { return 2; }
  std::vector<double> j_weights() const { return {1.0, 2.0}; }

  double energy(const Field& u) const {
    require_on_model(*this, u);
    const auto& w = disc_->weights();
    double e = 0.0;
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXcd uc = u.component(c);
      e += 0.5 * uc.dot(tridiag_apply(disc_->kinetic_diag(), disc_->kinetic_off(), uc)).real();
    }
    const auto u1 = u.component(0), u2 = u.component(1);
    double pot = 0.0, coup = 0.0;
    for (Eigen::Index j = 0; j < u.nodes(); ++j) {
      pot += w[j] * (std::pow(std::abs(u1[j]), 3) + std::pow(std::abs(u2[j]), 3));
      coup += w[j] * (u1[j] * u1[j] * std::conj(u2[j])).real();
    }
    return e - pot / 3.0 - 0.5 * gamma_ * coup;
  }

  Field grad_E(const Field& u) const {
    require_on_model(*this, u);
    const auto& w = disc_->weights();
    Field g = u.zeros_like();
    for (int c = 0; c < 2; ++c) {
      const Eigen::VectorXcd uc = u.component(c);
      g.component(c) = tridiag_apply(disc_->kinetic_diag(), disc_->kinetic_off(), uc);
      g.component(c).array() /= w.array().cast<cplx>();
    }
    const auto u1 = u.component(0), u2 = u.component(1);
    for (Eigen::Index j = 0; j < u.nodes(); ++j) {
      g.component(0)[j] -= std::abs(u1[j]) * u1[j] + gamma_ * std::conj(u1[j]) * u2[j];
      g.component(1)[j] -= std::abs(u2[j]) * u2[j] + 0.5 * gamma_ * u1[j] * u1[j];
    }
    return g;
  }

  /// H^1 inner product per component.
  SparseMat x_gram() const {
    return sparse_tridiag(disc_->kinetic_diag() + disc_->weights(), disc_->kinetic_off());
  }

  Hessian hessian(double omega, const Field& state) const {
    require_on_model(*this, state);
    const Eigen::VectorXd re = state.values().real();
    if (state.values().imag().cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, re.cwiseAbs().maxCoeff()))
      throw PreconditionError("second variation is assembled at real states only");
    const Eigen::Index n = disc_->size();
    const Eigen::VectorXd p1 = re.head(n), p2 = re.tail(n);
    const auto& w = disc_->weights();
    const Eigen::VectorXd base = disc_->kinetic_diag() - omega * w;
    Eigen::VectorXd r11(n), r22(n), i11(n), i22(n), off(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      r11[j] = base[j] - w[j] * (2.0 * std::abs(p1[j]) + gamma_ * p2[j]);
      r22[j] = base[j] - w[j] * 2.0 * std::abs(p2[j]);
      i11[j] = base[j] - w[j] * (std::abs(p1[j]) - gamma_ * p2[j]);
      i22[j] = base[j] - w[j] * std::abs(p2[j]);
      off[j] = -w[j] * gamma_ * p1[j];
    }
    const Eigen::VectorXd& ko = disc_->kinetic_off();
    const SparseMat c = sparse_diag(off);
    return {sparse_block2(sparse_tridiag(r11, ko), c, sparse_tridiag(r22, ko)),
            sparse_block2(sparse_tridiag(i11, ko), c, sparse_tridiag(i22, ko))};
  }

 private:
  double gamma_;
  DiscPtr disc_;
};

// ---------------------------------------------------------------------------------------------
// Coefficients of the bifurcating branch (alpha phi, beta phi)

struct CouplingCoefficients {
  double gamma = 0, alpha = 0, beta = 0;
};

inline CouplingCoefficients coefficients(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("coupling must lie in (0, 1]");
  const double root = std::sqrt(1.0 + 2.0 * gamma * (gamma - 1.0));
  const double den = 2.0 + gamma * gamma * gamma;
  CouplingCoefficients c{gamma, (2.0 - gamma - gamma * root) / den, (1.0 + gamma * gamma + root) / den};
  if (gamma == 1.0) c.alpha = 0.0;
  const double e1 = std::abs(c.alpha) + gamma * c.beta - 1.0;
  const double e2 = gamma * c.alpha * c.alpha + 2.0 * std::abs(c.beta) * c.beta - 2.0 * c.beta;
  if (std::abs(e1) > 1e-12 || std::abs(e2) > 1e-12)
    throw NumericError("coupling coefficient identities violated");
  return c;
}

// ---------------------------------------------------------------------------------------------
// Scalar ground state of -Delta phi - omega phi - phi^2 = 0

inline Grid default_system_grid(double omega, int dim, int n_points = 1201) {
  if (!(omega < 0.0)) throw DomainError("ground states need omega < 0");
  return Grid::radial(25.0 / std::sqrt(-omega), n_points, dim);
}

struct GroundState2 {
  Field varphi;
  double omega = 0;
  int dim = 1;
  double phi0 = 0;        // value at the origin
  double residual = 0;    // relative H residual of the discrete equation
  double shooting_phi0 = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

/// Scalar operator L_a = -Delta - omega - a phi as a quadratic form.
inline SparseMat scalar_La(const Discretization& d, double omega, double a, const Eigen::VectorXd& phi) {
  Eigen::VectorXd diag = d.kinetic_diag() - omega * d.weights();
  for (Eigen::Index j = 0; j < diag.size(); ++j) diag[j] -= a * d.weights()[j] * phi[j];
  return sparse_tridiag(diag, d.kinetic_off());
}

inline Eigen::VectorXd scalar_residual(const Discretization& d, double omega, const Eigen::VectorXd& phi) {
  Eigen::VectorXd r = tridiag_apply(d.kinetic_diag(), d.kinetic_off(), phi);
  for (Eigen::Index j = 0; j < r.size(); ++j) r[j] -= d.weights()[j] * (omega * phi[j] + phi[j] * phi[j]);
  return r;
}

inline Eigen::VectorXd polish_quadratic(const Discretization& d, double omega, Eigen::VectorXd phi) {
  double last = std::numeric_limits<double>::infinity(), rel = last;
  for (int it = 0; it < 40; ++it) {
    const Eigen::VectorXd r = scalar_residual(d, omega, phi);
    Eigen::VectorXd jd = d.kinetic_diag() - omega * d.weights();
    for (Eigen::Index j = 0; j < jd.size(); ++j) jd[j] -= 2.0 * d.weights()[j] * phi[j];
    const Eigen::VectorXd step = solve_tridiag(jd, d.kinetic_off(), r);
    phi -= step;
    rel = step.cwiseAbs().maxCoeff() / phi.cwiseAbs().maxCoeff();
    if (rel < 1e-14 || (rel < 1e-11 && rel >= 0.5 * last)) break;
    last = rel;
  }
  if (rel > 1e-10) throw NumericError("ground-state Newton iteration did not converge");
  if ((phi.array() <= 0.0).any()) throw NumericError("ground state lost positivity");
  return phi;
}

enum class ShotOutcome { overshoot, undershoot };

struct Shot {
  ShotOutcome outcome;
  std::vector<double> r, phi;
};

/// phi'' + ((N-1)/r) phi' + omega phi + phi^2 = 0 from phi(0) = a until the orbit is classified.
inline Shot shoot(double a, double omega, int dim, double r_max) {
  using State = std::array<double, 2>;
  namespace ode = boost::numeric::odeint;
  const double k = dim - 1.0;
  auto rhs = [&](const State& y, State& dy, double r) {
    dy[0] = y[1];
    dy[1] = -(k / r) * y[1] - omega * y[0] - y[0] * y[0];
  };
  // series start avoids the 1/r singularity
  const double r0 = 1e-4 / std::sqrt(-omega);
  const double c2 = -(omega * a + a * a) / (2.0 * (1.0 + k));
  State y{a + c2 * r0 * r0, 2.0 * c2 * r0};
  Shot shot{ShotOutcome::undershoot, {0.0, r0}, {a, y[0]}};
  auto stepper = ode::make_dense_output(1e-12, 1e-12, ode::runge_kutta_dopri5<State>());
  stepper.initialize(y, r0, 1e-3);
  while (stepper.current_time() < r_max) {
    stepper.do_step(rhs);
    const State& s = stepper.current_state();
    shot.r.push_back(stepper.current_time());
    shot.phi.push_back(s[0]);
    if (s[0] < 0.0) {
      shot.outcome = ShotOutcome::overshoot;
      return shot;
    }
    if (s[1] > 0.0) {
      shot.outcome = ShotOutcome::undershoot;
      return shot;
    }
  }
  shot.outcome = ShotOutcome::undershoot;
  return shot;
}

}  // namespace detail

/// phi(0) of the radial ground state by bisection on the shooting parameter.
inline double shooting_phi0(double omega, int dim, double r_max) {
  if (!(omega < 0.0)) throw DomainError("ground states need omega < 0");
  double lo = 0.1 * -omega, hi = 10.0 * -omega;
  if (detail::shoot(lo, omega, dim, r_max).outcome != detail::ShotOutcome::undershoot ||
      detail::shoot(hi, omega, dim, r_max).outcome != detail::ShotOutcome::overshoot)
    throw NumericError("shooting bracket not found");
  for (int it = 0; it < 200 && hi - lo > 4e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (detail::shoot(mid, omega, dim, r_max).outcome == detail::ShotOutcome::overshoot ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// Positive radial solution on a radial grid of dimension 1 or 3, polished to the discrete equation.
inline GroundState2 ground_state(double omega, const Grid& grid) {
  if (!(omega < 0.0)) throw DomainError("ground states need omega < 0");
  if (grid.kind != GridKind::radial) throw DomainError("system ground states live on radial grids");
  auto disc = Discretization::make(grid);
  const Eigen::VectorXd& x = disc->x();
  const double k = std::sqrt(-omega);
  Eigen::VectorXd start(x.size());
  GroundState2 gs;
  gs.omega = omega;
  gs.dim = grid.dim;
  if (grid.dim == 1) {
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double s = 1.0 / std::cosh(0.5 * k * x[j]);
      start[j] = -1.5 * omega * s * s;
    }
  } else {
    const double a = shooting_phi0(omega, grid.dim, grid.right);
    gs.shooting_phi0 = a;
    // integrate slightly below the threshold so the orbit follows the ground state, then glue
    // an exponential tail where it departs
    const detail::Shot shot = detail::shoot(a * (1.0 - 1e-15), omega, grid.dim, grid.right);
    std::size_t cut = shot.r.size() - 1;
    for (std::size_t i = 1; i < shot.r.size(); ++i)
      if (shot.phi[i] < 1e-6 * a) {
        cut = i;
        break;
      }
    const double rc = shot.r[cut], pc = std::max(shot.phi[cut], 1e-300);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      const double r = x[j];
      if (r >= rc) {
        start[j] = pc * (rc / r) * std::exp(-k * (r - rc));
        continue;
      }
      const auto it = std::upper_bound(shot.r.begin(), shot.r.begin() + cut + 1, r);
      const std::size_t i = std::max<std::size_t>(1, it - shot.r.begin());
      const double t = (r - shot.r[i - 1]) / (shot.r[i] - shot.r[i - 1]);
      start[j] = (1.0 - t) * shot.phi[i - 1] + t * shot.phi[i];
    }
  }
  const Eigen::VectorXd phi = detail::polish_quadratic(*disc, omega, start);
  gs.varphi = Field::from_real(disc, phi);
  gs.phi0 = phi[0];
  const Eigen::VectorXd r = detail::scalar_residual(*disc, omega, phi);
  gs.residual = std::sqrt((r.array().square() / disc->weights().array()).sum()) / norm_h(gs.varphi);
  return gs;
}

/// (alpha phi, beta phi).
inline Field branch_state(const CouplingCoefficients& c, const Field& phi) {
  Field u(phi.disc_ptr(), 2);
  u.component(0) = c.alpha * phi.values();
  u.component(1) = c.beta * phi.values();
  return u;
}

/// (0, phi).
inline Field semitrivial_state(const Field& phi) {
  Field u(phi.disc_ptr(), 2);
  u.component(1) = phi.values();
  return u;
}

// ---------------------------------------------------------------------------------------------
// Operators on the branch

struct SystemOperators {
  SparseMat L_R, L_I;
  Eigen::Matrix2d A, B;
  bool degenerate = false;
  double diag_residual_R = 0;  // relative probe estimate of |A L_R A^T - diag(L_2, L_(2-g)b)|
  double diag_residual_I = 0;  // same for B and diag(L_1, L_(1-2g)b)
  double eig_R2 = 0, eig_I2 = 0;
};

namespace detail {

inline SparseMat kron2(const Eigen::Matrix2d& a, Eigen::Index n) {
  std::vector<Eigen::Triplet<double>> t;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c)
      if (a(r, c) != 0.0)
        for (Eigen::Index j = 0; j < n; ++j) t.emplace_back(r * n + j, c * n + j, a(r, c));
  SparseMat m(2 * n, 2 * n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline double probe_residual(const SparseMat& diff, const SparseMat& ref, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int k = 0; k < 8; ++k) {
    Eigen::VectorXd v(ref.cols());
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = n01(rng);
    worst = std::max(worst, (diff * v).norm() / (ref * v).norm());
  }
  return worst;
}

}  // namespace detail

inline SystemOperators operators_RI(double gamma, double omega, const Field& phi) {
  const CouplingCoefficients c = coefficients(gamma);
  const Discretization& d = phi.disc();
  const Eigen::VectorXd v = phi.values().real();
  SystemNls model(gamma, phi.disc_ptr());
  const Hessian hs = model.hessian(omega, branch_state(c, phi));
  SystemOperators out;
  out.L_R = hs.re;
  out.L_I = hs.im;
  const double na = std::hypot(c.alpha, c.beta), nb = std::hypot(c.alpha, 2.0 * c.beta);
  out.A << c.alpha, c.beta, -c.beta, c.alpha;
  out.A /= na;
  out.B << c.alpha, 2.0 * c.beta, -2.0 * c.beta, c.alpha;
  out.B /= nb;
  out.eig_R2 = (2.0 - gamma) * c.beta;
  out.eig_I2 = (1.0 - 2.0 * gamma) * c.beta;
  out.degenerate = c.alpha == 0.0;
  const Eigen::Index n = d.size();
  const SparseMat zero(n, n);
  const SparseMat dr = sparse_block2(detail::scalar_La(d, omega, 2.0, v), zero,
                                     detail::scalar_La(d, omega, out.eig_R2, v));
  const SparseMat di = sparse_block2(detail::scalar_La(d, omega, 1.0, v), zero,
                                     detail::scalar_La(d, omega, out.eig_I2, v));
  const SparseMat ka = detail::kron2(out.A, n), kb = detail::kron2(out.B, n);
  const SparseMat rr = ka * out.L_R * SparseMat(ka.transpose()) - dr;
  const SparseMat ri = kb * out.L_I * SparseMat(kb.transpose()) - di;
  out.diag_residual_R = detail::probe_residual(rr, dr, 17);
  out.diag_residual_I = detail::probe_residual(ri, di, 19);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Spectral classification of L_a = -Delta - omega - a phi

struct LaClassification {
  double a = 0;
  SpectrumReport report;
  double kernel_cosine = 0;      // cosine of the lowest eigenvector with phi
  double min_on_phi_perp = 0;    // lowest eigenvalue on {phi}^perp (H)
  std::string regime;
  bool consistent = false;       // spectrum matches the expected picture for this a
};

inline LaClassification classify_La(const Field& phi, double omega, double a) {
  if (!(a <= 2.0)) throw DomainError("L_a is classified for a <= 2 only");
  const Discretization& d = phi.disc();
  const Eigen::VectorXd v = phi.values().real();
  const SparseMat op = detail::scalar_La(d, omega, a, v);
  const SparseMat mass = mass_matrix(d);
  LaClassification out;
  out.a = a;
  out.report = spectrum(op, mass, "radial", 4);
  // eigenvectors are mass-normalized, so the H cosine is a weighted dot product
  const Eigen::VectorXd e0 = out.report.eigenvectors.col(0);
  out.kernel_cosine = std::abs(e0.dot(d.weights().cwiseProduct(v))) / norm_h(phi);
  const Eigen::MatrixXd cons = d.weights().cwiseProduct(v);
  out.min_on_phi_perp = constrained_lowest(op, mass, cons, 1).values[0];
  const auto& ev = out.report.eigenvalues;
  const double tk = out.report.tol_kernel;
  if (a == 1.0) {
    out.regime = "kernel";
    out.consistent = std::abs(ev[0]) <= tk && out.kernel_cosine > 0.999 && ev[1] > tk;
  } else if (a < 1.0) {
    out.regime = "positive";
    out.consistent = ev[0] > tk;
  } else if (a < 2.0) {
    out.regime = "one negative, positive on phi-perp";
    out.consistent = out.report.n_negative == 1 && ev[1] > tk && out.min_on_phi_perp > tk;
  } else {
    // a = 2
    out.regime = "one negative";
    out.consistent = out.report.n_negative == 1 && ev[1] > tk;
  }
  return out;
}

// ---------------------------------------------------------------------------------------------
// Conditions on the branch

/// xi = (-beta phi, alpha phi) normalized in H.
inline Field branch_psi(const CouplingCoefficients& c, const Field& phi) {
  Field u(phi.disc_ptr(), 2);
  u.component(0) = -c.beta * phi.values();
  u.component(1) = c.alpha * phi.values();
  return (1.0 / norm_h(u)) * u;
}

/// eta = (alpha phi, 2 beta phi).
inline Field branch_eta(const CouplingCoefficients& c, const Field& phi) {
  Field u(phi.disc_ptr(), 2);
  u.component(0) = c.alpha * phi.values();
  u.component(1) = 2.0 * c.beta * phi.values();
  return u;
}

inline std::vector<ConditionReport> check_instability_conditions(double gamma, double omega,
                                                                 const Field& phi) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw PreconditionError("instability checks need 0 < gamma < 1");
  const CouplingCoefficients c = coefficients(gamma);
  SystemNls model(gamma, phi.disc_ptr());
  const Field state = branch_state(c, phi);
  const Field psi = branch_psi(c, phi);
  std::vector<ConditionReport> out;
  out.push_back(check_A1(model, omega, state));

  ConditionReport a2 = check_A2a(model, omega, state, psi);
  const Eigen::VectorXd v = phi.values().real();
  const Eigen::VectorXd lv = detail::scalar_La(phi.disc(), omega, (2.0 - gamma) * c.beta, v) * v;
  a2.scalars["scalar_form_value"] = v.dot(lv) / inner_h(phi, phi);
  out.push_back(a2);

  const Hessian hs = model.hessian(omega, state);
  const SparseMat wb = mass_blocks(model), xb = x_gram_blocks(model);
  auto covectors = [&](const std::vector<Field>& fs) {
    Eigen::MatrixXd m(wb.rows(), fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) m.col(k) = wb * Eigen::VectorXd(fs[k].values().real());
    return m;
  };
  ConditionReport lr;
  lr.condition = "L_R positive on {phi, xi}-perp";
  lr.scalars["k1_estimate"] = constrained_lowest(hs.re, xb, covectors({state, psi}), 1).values[0];
  lr.holds = lr.scalars["k1_estimate"] > 1e-8;
  out.push_back(lr);

  ConditionReport li;
  li.condition = "L_I positive on {eta}-perp";
  li.scalars["k2_estimate"] = constrained_lowest(hs.im, xb, covectors({branch_eta(c, phi)}), 1).values[0];
  li.holds = li.scalars["k2_estimate"] > 1e-8;
  out.push_back(li);

  out.push_back(check_A3(model, omega, state, psi));
  return out;
}

/// Checks at the semitrivial state (0, phi) with gamma = 1: two-dimensional kernel and (A3) with
/// psi = (phi, 0)/|phi|.
inline std::vector<ConditionReport> check_semitrivial_degenerate(double omega, const Field& phi) {
  SystemNls model(1.0, phi.disc_ptr());
  const Field state = semitrivial_state(phi);
  std::vector<ConditionReport> out;
  out.push_back(check_A1(model, omega, state));

  ConditionReport ker;
  ker.condition = "kernel";
  const std::vector<SignedEigen> ev = hessian_eigen(model, omega, state, 6);
  const Hessian hs = model.hessian(omega, state);
  const double tk = 1e-6 * std::max(spectral_radius_estimate(hs.re, mass_blocks(model)),
                                    spectral_radius_estimate(hs.im, mass_blocks(model)));
  int dim = 0;
  Field first(phi.disc_ptr(), 2);
  first.component(0) = phi.values();
  const Field jsemi = apply_J(model, state);
  double cos_first = 0.0, cos_j = 0.0;
  for (const auto& e : ev)
    if (std::abs(e.value) <= tk) {
      ++dim;
      cos_first = std::max(cos_first, h_cosine(e.vector, first));
      cos_j = std::max(cos_j, h_cosine(e.vector, jsemi));
    }
  ker.scalars["kernel_dim_est"] = dim;
  ker.scalars["cosine_phi_0"] = cos_first;
  ker.scalars["cosine_J_0_phi"] = cos_j;
  ker.holds = dim == 2 && cos_first > 0.999 && cos_j > 0.999;
  out.push_back(ker);

  out.push_back(check_A3(model, omega, state, (1.0 / norm_h(first)) * first));
  return out;
}

}  // namespace nlsstab
