#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/linalg.hpp"
#include "nlsstab/model.hpp"

namespace nlsstab {

struct SpectrumReport {
  Eigen::VectorXd eigenvalues;  // ascending
  std::string sector;
  int n_negative = 0;
  int kernel_dim_est = 0;
  double tol_kernel = 0.0;
  Eigen::MatrixXd eigenvectors;  // lowest k, mass-normalized columns
};

struct ConditionReport {
  std::string condition;
  bool holds = false;
  std::optional<Field> witness;
  std::map<std::string, double> scalars;
  std::string note;
};

struct SpectralTolerances {
  double constraint = 1e-8;  // relative violation of an orthogonality constraint
  double positive = 1e-8;    // a minimum counts as positive above this
  double kernel_rel = 1e-6;  // kernel threshold relative to the spectral radius
  double residual = 1e-6;    // relative residual of an eigen/multiplier equation
};

/// Gershgorin bound on the spectrum of diag(M)^{-1} A.
inline double spectral_radius_estimate(const SparseMat& op, const SparseMat& mass) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(op.rows());
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseMat::InnerIterator it(op, k); it; ++it) rows[it.row()] += std::abs(it.value());
  double r = 0.0;
  for (Eigen::Index i = 0; i < op.rows(); ++i) r = std::max(r, rows[i] / mass.coeff(i, i));
  return r;
}

inline SpectrumReport spectrum(const SparseMat& op, const SparseMat& mass, std::string sector,
                               int k, double kernel_rel = 1e-6) {
  SpectrumReport rep;
  const EigenPairs ep = lowest_eigenpairs(op, mass, k);
  rep.eigenvalues = ep.values;
  rep.eigenvectors = ep.vectors;
  rep.sector = std::move(sector);
  rep.tol_kernel = kernel_rel * spectral_radius_estimate(op, mass);
  for (Eigen::Index i = 0; i < rep.eigenvalues.size(); ++i) {
    if (rep.eigenvalues[i] < -rep.tol_kernel) ++rep.n_negative;
    else if (std::abs(rep.eigenvalues[i]) <= rep.tol_kernel) ++rep.kernel_dim_est;
  }
  return rep;
}

/// |(u, v)_H| / (|u|_H |v|_H), zero when either vanishes.
inline double h_cosine(const Field& u, const Field& v) {
  const double nu = norm_h(u), nv = norm_h(v);
  if (nu == 0.0 || nv == 0.0) return 0.0;
  return std::abs(inner_h(u, v)) / (nu * nv);
}

enum class Normalization { h, x };

struct ConstrainedMin {
  double value = 0.0;
  Field minimizer;  // unit norm in the chosen normalization
};

namespace detail {

inline int part_kind(const Field& c) {
  const double re = c.values().real().norm(), im = c.values().imag().norm();
  const double tot = std::hypot(re, im);
  if (tot == 0.0) return -1;
  if (im <= 1e-12 * tot) return 0;
  if (re <= 1e-12 * tot) return 1;
  return 2;
}

}  // namespace detail

/// min <S'' w, w> / |w|^2 over { w : (c, w)_H = 0 for every constraint c }.
template <HamiltonianModel M>
ConstrainedMin constrained_minimum(const M& m, const Hessian& hs, const std::vector<Field>& constraints,
                                   Normalization norm) {
  const SparseMat wb = mass_blocks(m);
  const SparseMat nb = norm == Normalization::h ? wb : x_gram_blocks(m);
  const Eigen::Index n = wb.rows();
  std::vector<Eigen::VectorXd> cre, cim;
  bool mixed = false;
  for (const Field& c : constraints) {
    require_on_model(m, c);
    const int kind = detail::part_kind(c);
    if (kind == 0) cre.push_back(wb * Eigen::VectorXd(c.values().real()));
    else if (kind == 1) cim.push_back(wb * Eigen::VectorXd(c.values().imag()));
    else if (kind == 2) mixed = true;
  }
  auto to_matrix = [n](const std::vector<Eigen::VectorXd>& cols) {
    Eigen::MatrixXd c(n, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k) c.col(k) = cols[k];
    return c;
  };
  ConstrainedMin out;
  Field w(m.disc(), m.components());
  if (!mixed) {
    const EigenPairs re = constrained_lowest(hs.re, nb, to_matrix(cre), 1);
    const EigenPairs im = constrained_lowest(hs.im, nb, to_matrix(cim), 1);
    if (re.values[0] <= im.values[0]) {
      out.value = re.values[0];
      w.values() = re.vectors.col(0).cast<cplx>();
    } else {
      out.value = im.values[0];
      w.values() = cplx(0.0, 1.0) * im.vectors.col(0).cast<cplx>();
    }
  } else {
    const SparseMat a2 = sparse_block2(hs.re, SparseMat(n, n), hs.im);
    const SparseMat b2 = sparse_block2(nb, SparseMat(n, n), nb);
    Eigen::MatrixXd c(2 * n, constraints.size());
    Eigen::Index col = 0;
    for (const Field& f : constraints) {
      if (detail::part_kind(f) < 0) continue;
      c.col(col).head(n) = wb * Eigen::VectorXd(f.values().real());
      c.col(col).tail(n) = wb * Eigen::VectorXd(f.values().imag());
      ++col;
    }
    const EigenPairs ep = constrained_lowest(a2, b2, c.leftCols(col), 1);
    out.value = ep.values[0];
    w.values() = unstack_real(ep.vectors.col(0));
  }
  const double scale = norm == Normalization::h ? norm_h(w) : norm_x(m, w);
  out.minimizer = (1.0 / scale) * w;
  return out;
}

namespace detail {

inline Field h_normalized(const Field& psi) {
  const double n = norm_h(psi);
  if (n == 0.0) throw PreconditionError("psi must be nonzero");
  return (1.0 / n) * psi;
}

template <HamiltonianModel M>
void require_constraints(const M& m, const Field& phi, const Field& psi, double tol, bool with_x) {
  const Field jphi = apply_J(m, phi);
  const double c1 = h_cosine(phi, psi), c2 = h_cosine(jphi, psi);
  if (c1 > tol) throw PreconditionError("(phi, psi)_H = 0 violated: cosine " + std::to_string(c1));
  if (c2 > tol) throw PreconditionError("(J phi, psi)_H = 0 violated: cosine " + std::to_string(c2));
  if (with_x) {
    const double cx = std::abs(inner_x(m, jphi, psi)) / (norm_x(m, jphi) * norm_x(m, psi));
    if (cx > tol) throw PreconditionError("(J phi, psi)_X = 0 violated: cosine " + std::to_string(cx));
  }
}

}  // namespace detail

/// S'(phi) = 0 with phi != 0, and R phi represented by a field of finite X norm.
template <HamiltonianModel M>
ConditionReport check_A1(const M& m, double omega, const Field& phi, double tol = 1e-8) {
  ConditionReport rep;
  rep.condition = "A1";
  const double nphi = norm_h(phi);
  const double res = norm_h(grad_S(m, omega, phi));
  const double rx = norm_x(m, riesz_X(m, phi));
  rep.scalars["residual_rel"] = nphi > 0.0 ? res / nphi : res;
  rep.scalars["riesz_x_norm"] = rx;
  rep.holds = nphi > 0.0 && res <= tol * nphi && std::isfinite(rx);
  return rep;
}

template <HamiltonianModel M>
ConditionReport check_A2a(const M& m, double omega, const Field& phi, const Field& psi,
                          const SpectralTolerances& tol = {}) {
  const Field u = detail::h_normalized(psi);
  detail::require_constraints(m, phi, u, tol.constraint, false);
  ConditionReport rep;
  rep.condition = "A2a";
  const double form = hessian_form(m, omega, phi, u);
  rep.scalars["form_value"] = form;
  rep.holds = form < -tol.positive;
  rep.witness = u;
  return rep;
}

/// S'' psi = mu Q'(phi) with nu = 3 mu - <S'''(psi, psi), psi> nonzero.
template <HamiltonianModel M>
ConditionReport check_A2b(const M& m, double omega, const Field& phi, const Field& psi,
                          const SpectralTolerances& tol = {}) {
  const Field u = detail::h_normalized(psi);
  detail::require_constraints(m, phi, u, tol.constraint, true);
  ConditionReport rep;
  rep.condition = "A2b";
  const Field spsi = apply_hessian(m, omega, phi, u);
  const double mu = inner_h(spsi, phi) / inner_h(phi, phi);
  const double res = norm_h(spsi - mu * phi);
  const double rel = res / std::max(norm_h(spsi), std::abs(mu) * norm_h(phi));
  rep.scalars["mu"] = mu;
  rep.scalars["residual_rel"] = rel;
  rep.scalars["form_value"] = inner_h(spsi, u);
  if constexpr (requires { m.cubic_form(phi, u); }) {
    const double cubic = m.cubic_form(phi, u);
    const double nu = 3.0 * mu - cubic;
    rep.scalars["cubic"] = cubic;
    rep.scalars["nu"] = nu;
    rep.holds = rel < tol.residual && std::abs(nu) > tol.residual * std::max(1.0, std::abs(mu));
  } else {
    rep.note = "model has no third variation";
    rep.holds = false;
  }
  rep.witness = u;
  return rep;
}

struct A3Options {
  bool h_minimum = false;                 // also report the H-normalized minimum
  std::vector<Field> extra_constraints;   // appended to {phi, J phi, psi}
};

/// Minimum of <S'' w, w>/|w|_X^2 over W = {phi, J phi, psi}^perp in H.
template <HamiltonianModel M>
ConditionReport check_A3(const M& m, double omega, const Field& phi, const Field& psi,
                         const A3Options& opt = {}, const SpectralTolerances& tol = {}) {
  const Field u = detail::h_normalized(psi);
  detail::require_constraints(m, phi, u, tol.constraint, false);
  std::vector<Field> cons{phi, apply_J(m, phi), u};
  for (const Field& c : opt.extra_constraints) cons.push_back(c);
  const Hessian hs = m.hessian(omega, phi);
  const ConstrainedMin mx = constrained_minimum(m, hs, cons, Normalization::x);
  ConditionReport rep;
  rep.condition = "A3";
  rep.scalars["k0_estimate"] = mx.value;
  if (opt.h_minimum) rep.scalars["min_h"] = constrained_minimum(m, hs, cons, Normalization::h).value;
  rep.holds = mx.value > tol.positive;
  rep.witness = mx.minimizer;
  return rep;
}

struct SignedEigen {
  double value;
  Field vector;  // H-normalized
};

/// Lowest k eigenpairs of S''(phi) against the H mass, merged over the real and imaginary blocks.
template <HamiltonianModel M>
std::vector<SignedEigen> hessian_eigen(const M& m, double omega, const Field& phi, int k) {
  const Hessian hs = m.hessian(omega, phi);
  const SparseMat wb = mass_blocks(m);
  std::vector<SignedEigen> out;
  for (int block = 0; block < 2; ++block) {
    const EigenPairs ep = lowest_eigenpairs(block == 0 ? hs.re : hs.im, wb, k);
    for (Eigen::Index i = 0; i < ep.values.size(); ++i) {
      Field f(m.disc(), m.components());
      f.values() = (block == 0 ? cplx(1.0, 0.0) : cplx(0.0, 1.0)) * ep.vectors.col(i).cast<cplx>();
      out.push_back({ep.values[i], (1.0 / norm_h(f)) * f});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  if (static_cast<int>(out.size()) > k) out.resize(k);
  return out;
}

namespace detail {

/// Norm of the odd part relative to the whole, for full-line fields; 0 and 1 mark even and odd.
inline double odd_fraction(const Field& f) {
  const Discretization& d = f.disc();
  if (d.grid().kind != GridKind::full_line) return 0.0;
  if (d.sector() == Sector::even) return 0.0;
  if (d.sector() == Sector::odd) return 1.0;
  const Eigen::VectorXcd& v = f.values();
  const Eigen::Index n = v.size();
  const double odd = (v - v.reverse()).norm(), all = 2.0 * v.norm();
  return all == 0.0 ? 0.0 : odd / all;
}

}  // namespace detail

enum class B2Variant { a, b };

/// (B2a): one negative eigenvalue and kernel spanned by J phi. (B2b): two negatives with even
/// chi_0 and odd chi_1.
template <HamiltonianModel M>
ConditionReport check_B2(const M& m, double omega, const Field& phi, B2Variant variant,
                         const SpectralTolerances& tol = {}) {
  const std::vector<SignedEigen> ev = hessian_eigen(m, omega, phi, 5);
  const Hessian hs = m.hessian(omega, phi);
  const SparseMat wb = mass_blocks(m);
  const double tk = tol.kernel_rel * std::max(spectral_radius_estimate(hs.re, wb),
                                              spectral_radius_estimate(hs.im, wb));
  ConditionReport rep;
  rep.condition = variant == B2Variant::a ? "B2a" : "B2b";
  int n_neg = 0, n_ker = 0;
  double kernel_cos = 0.0;
  std::vector<const SignedEigen*> neg;
  double next_positive = 0.0;
  bool have_next = false;
  const Field jphi = apply_J(m, phi);
  for (const auto& e : ev) {
    if (e.value < -tk) {
      ++n_neg;
      neg.push_back(&e);
    } else if (std::abs(e.value) <= tk) {
      ++n_ker;
      kernel_cos = std::max(kernel_cos, h_cosine(e.vector, jphi));
    } else if (!have_next) {
      next_positive = e.value;
      have_next = true;
    }
  }
  rep.scalars["n_negative"] = n_neg;
  rep.scalars["kernel_dim"] = n_ker;
  rep.scalars["kernel_cosine_Jphi"] = kernel_cos;
  rep.scalars["tol_kernel"] = tk;
  rep.scalars["first_positive"] = next_positive;
  for (std::size_t i = 0; i < neg.size(); ++i)
    rep.scalars["lambda" + std::to_string(i)] = neg[i]->value;
  const bool kernel_ok = n_ker == 1 && kernel_cos > 0.999 && have_next;
  if (variant == B2Variant::a) {
    rep.holds = n_neg == 1 && kernel_ok;
    if (n_neg >= 1) rep.witness = neg[0]->vector;
  } else {
    bool ok = n_neg == 2 && kernel_ok;
    if (n_neg == 2) {
      const double odd0 = detail::odd_fraction(neg[0]->vector);
      const double odd1 = detail::odd_fraction(neg[1]->vector);
      rep.scalars["chi0_odd_fraction"] = odd0;
      rep.scalars["chi1_odd_fraction"] = odd1;
      rep.scalars["chi0_chi1"] = std::abs(inner_h(neg[0]->vector, neg[1]->vector));
      rep.scalars["chi1_phi"] = h_cosine(neg[1]->vector, phi);
      ok = ok && odd0 < 1e-8 && odd1 > 1.0 - 1e-8 && rep.scalars["chi0_chi1"] < tol.constraint &&
           rep.scalars["chi1_phi"] < tol.constraint;
      rep.witness = neg[1]->vector;
    }
    rep.holds = ok;
  }
  return rep;
}

struct ChargeConstrainedMin {
  double lambda = 0.0;
  Field psi;
  double mu = 0.0;
  double residual_rel = 0.0;
  double j_orthogonality = 0.0;  // |(J phi, psi)_H| / |J phi|_H
  bool negative = false;
};

/// inf <S'' w, w> over |w|_H = 1, (phi, w)_H = 0, with the Lagrange multiplier of Q'(phi).
template <HamiltonianModel M>
ChargeConstrainedMin charge_constrained_minimizer(const M& m, double omega, const Field& phi) {
  const Hessian hs = m.hessian(omega, phi);
  const ConstrainedMin cm = constrained_minimum(m, hs, {phi}, Normalization::h);
  ChargeConstrainedMin out;
  out.lambda = cm.value;
  out.psi = cm.minimizer;
  // fix the sign so the witness is reproducible
  const Eigen::Index peak = [&] {
    Eigen::Index i = 0;
    out.psi.values().cwiseAbs().maxCoeff(&i);
    return i;
  }();
  if ((out.psi.values()[peak].real() + out.psi.values()[peak].imag()) < 0.0) out.psi = -out.psi;
  const Field spsi = apply_hessian(m, omega, phi, out.psi);
  const Field rest = spsi - out.lambda * out.psi;
  out.mu = inner_h(rest, phi) / inner_h(phi, phi);
  out.residual_rel = norm_h(rest - out.mu * phi) / std::max(norm_h(spsi), 1e-300);
  out.j_orthogonality = h_cosine(apply_J(m, phi), out.psi);
  out.negative = out.lambda < 0.0;
  return out;
}

/// Coercivity C1 |u|_X^2 <= <S'' u, u> + C2 |u|_H^2 sampled on smooth random fields.
template <HamiltonianModel M>
ConditionReport check_B3(const M& m, double omega, const Field& phi, int samples = 64,
                         unsigned seed = 1) {
  const std::vector<SignedEigen> ev = hessian_eigen(m, omega, phi, 1);
  const double c2 = std::max(0.0, -ev.front().value) + 1.0;
  std::mt19937 rng(seed);
  std::normal_distribution<double> n01;
  const auto& x = m.disc()->x();
  const double lo = m.disc()->grid().left, hi = m.disc()->grid().right;
  double c1 = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    Field u(m.disc(), m.components());
    for (int c = 0; c < m.components(); ++c)
      for (int k = 1; k <= 12; ++k) {
        const cplx a(n01(rng), n01(rng));
        for (Eigen::Index j = 0; j < x.size(); ++j)
          u.component(c)[j] += a * std::sin(k * M_PI * (x[j] - lo) / (hi - lo)) / double(k);
      }
    const double ratio = (hessian_form(m, omega, phi, u) + c2 * inner_h(u, u)) / inner_x(m, u, u);
    c1 = std::min(c1, ratio);
  }
  ConditionReport rep;
  rep.condition = "B3";
  rep.scalars["C1"] = c1;
  rep.scalars["C2"] = c2;
  rep.holds = c1 > 0.0;
  rep.note = "sampled coercivity only; weak lower semicontinuity is not checked";
  return rep;
}

}  // namespace nlsstab
