#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <concepts>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"

namespace nlsstab {

/// Second variation of S_omega at a real state, as quadratic-form matrices acting on the
/// stacked real and imaginary parts (components stacked inside each block).
struct Hessian {
  SparseMat re;
  SparseMat im;
};

/// A Hamiltonian system u' = J E'(u) on a discretization, with J = diag(i j_c) and
/// T(s) = diag(exp(i j_c s)).
template <class M>
concept HamiltonianModel = requires(const M& m, const Field& u, double omega) {
  { m.disc() } -> std::convertible_to<DiscPtr>;
  { m.components() } -> std::convertible_to<int>;
  { m.j_weights() } -> std::convertible_to<std::vector<double>>;
  { m.energy(u) } -> std::convertible_to<double>;
  { m.grad_E(u) } -> std::convertible_to<Field>;
  { m.x_gram() } -> std::convertible_to<SparseMat>;
  { m.hessian(omega, u) } -> std::convertible_to<Hessian>;
};

template <HamiltonianModel M>
void require_on_model(const M& m, const Field& u) {
  if (!u.disc_ptr() || !u.disc().same_as(*m.disc()) || u.components() != m.components())
    throw DimensionError("field is not on the model grid");
}

template <HamiltonianModel M>
Field zero_field(const M& m) {
  return Field(m.disc(), m.components());
}

template <HamiltonianModel M>
double charge(const M& m, const Field& u) {
  require_on_model(m, u);
  return 0.5 * inner_h(u, u);
}

template <HamiltonianModel M>
double action(const M& m, double omega, const Field& u) {
  return m.energy(u) - omega * charge(m, u);
}

template <HamiltonianModel M>
Field apply_J(const M& m, const Field& u) {
  require_on_model(m, u);
  Field out = u;
  const auto j = m.j_weights();
  for (int c = 0; c < m.components(); ++c) out.component(c) *= cplx(0.0, j[c]);
  return out;
}

template <HamiltonianModel M>
Field apply_J_inv(const M& m, const Field& u) {
  require_on_model(m, u);
  Field out = u;
  const auto j = m.j_weights();
  for (int c = 0; c < m.components(); ++c) out.component(c) *= cplx(0.0, -1.0 / j[c]);
  return out;
}

template <HamiltonianModel M>
Field apply_T(const M& m, double s, const Field& u) {
  require_on_model(m, u);
  Field out = u;
  const auto j = m.j_weights();
  for (int c = 0; c < m.components(); ++c) out.component(c) *= std::polar(1.0, j[c] * s);
  return out;
}

/// S_omega'(u) in the H representation.
template <HamiltonianModel M>
Field grad_S(const M& m, double omega, const Field& u) {
  require_on_model(m, u);
  Field g = m.grad_E(u);
  g.values() -= omega * u.values();
  return g;
}

/// <S'(u), v> = (grad_S(u), v)_H.
template <HamiltonianModel M>
double dual_pairing(const M&, const Field& functional, const Field& v) {
  return inner_h(functional, v);
}

namespace detail {

/// G u applied component by component.
inline Eigen::VectorXcd apply_componentwise(const SparseMat& g, const Field& u) {
  Eigen::VectorXcd out(u.values().size());
  for (int c = 0; c < u.components(); ++c) {
    const Eigen::VectorXcd uc = u.component(c);
    out.segment(c * u.nodes(), u.nodes()) = g * uc;
  }
  return out;
}

}  // namespace detail

template <HamiltonianModel M>
double inner_x(const M& m, const Field& u, const Field& v) {
  require_on_model(m, u);
  require_on_model(m, v);
  const SparseMat g = m.x_gram();
  return v.values().dot(detail::apply_componentwise(g, u)).real();
}

template <HamiltonianModel M>
double norm_x(const M& m, const Field& u) {
  return std::sqrt(std::max(0.0, inner_x(m, u, u)));
}

/// Field representing the functional v -> (u, v)_X in the H pairing.
template <HamiltonianModel M>
Field riesz_X(const M& m, const Field& u) {
  require_on_model(m, u);
  Eigen::VectorXcd gv = detail::apply_componentwise(m.x_gram(), u);
  const auto& w = u.disc().weights();
  for (int c = 0; c < u.components(); ++c)
    gv.segment(c * u.nodes(), u.nodes()).array() /= w.array().cast<cplx>();
  return u.with_values(std::move(gv));
}

/// The H Riesz map is the identity in the weighted representation.
template <HamiltonianModel M>
Field riesz_H(const M& m, const Field& u) {
  require_on_model(m, u);
  return u;
}

/// Block-diagonal mass matrix over components.
template <HamiltonianModel M>
SparseMat mass_blocks(const M& m) {
  const Eigen::Index n = m.disc()->size();
  Eigen::VectorXd d(n * m.components());
  for (int c = 0; c < m.components(); ++c) d.segment(c * n, n) = m.disc()->weights();
  return sparse_diag(d);
}

template <HamiltonianModel M>
SparseMat x_gram_blocks(const M& m) {
  const SparseMat g = m.x_gram();
  if (m.components() == 1) return g;
  return sparse_block2(g, SparseMat(g.rows(), g.cols()), g);
}

/// S_omega''(state) w in the H representation.
template <HamiltonianModel M>
Field apply_hessian(const M& m, double omega, const Field& state, const Field& w) {
  require_on_model(m, w);
  const Hessian hs = m.hessian(omega, state);
  const Eigen::VectorXd re = hs.re * Eigen::VectorXd(w.values().real());
  const Eigen::VectorXd im = hs.im * Eigen::VectorXd(w.values().imag());
  Eigen::VectorXcd out(w.values().size());
  const auto& wt = w.disc().weights();
  const Eigen::Index n = w.nodes();
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = cplx(re[k], im[k]) / wt[k % n];
  return w.with_values(std::move(out));
}

/// <S_omega''(state) w, w>.
template <HamiltonianModel M>
double hessian_form(const M& m, double omega, const Field& state, const Field& w) {
  require_on_model(m, w);
  const Hessian hs = m.hessian(omega, state);
  const Eigen::VectorXd re = w.values().real();
  const Eigen::VectorXd im = w.values().imag();
  return re.dot(hs.re * re) + im.dot(hs.im * im);
}

}  // namespace nlsstab
