#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/linalg.hpp"
#include "nlsstab/model.hpp"
#include "nlsstab/spectral.hpp"

namespace nlsstab {

/// Linear Schrodinger equation on an interval with Dirichlet ends: E(u) = (1/2)|u'|^2, X = H^1_0.
class LinearInterval {
 public:
  explicit LinearInterval(DiscPtr disc) : disc_(std::move(disc)) {
    if (disc_->grid().kind != GridKind::line_segment)
      throw DomainError("linear-interval lives on a line segment");
  }

  DiscPtr disc() const { return disc_; }
  int components() const { return 1; }
  std::vector<double> j_weights() const { return {1.0}; }

  double energy(const Field& u) const {
    require_on_model(*this, u);
    const Eigen::VectorXcd& v = u.values();
    return 0.5 * v.dot(tridiag_apply(disc_->kinetic_diag(), disc_->kinetic_off(), v)).real();
  }

  Field grad_E(const Field& u) const {
    require_on_model(*this, u);
    Eigen::VectorXcd g = tridiag_apply(disc_->kinetic_diag(), disc_->kinetic_off(), u.values());
    g.array() /= disc_->weights().array().cast<cplx>();
    return u.with_values(std::move(g));
  }

  SparseMat x_gram() const { return kinetic_matrix(*disc_); }

  Hessian hessian(double omega, const Field& state) const {
    require_on_model(*this, state);
    const Eigen::VectorXd d = disc_->kinetic_diag() - omega * disc_->weights();
    const SparseMat m = sparse_tridiag(d, disc_->kinetic_off());
    return {m, m};
  }

  double cubic_form(const Field&, const Field&) const { return 0.0; }

 private:
  DiscPtr disc_;
};

/// sqrt(2/L) sin(k pi (x - a)/L) sampled on the unknowns.
inline Field sine_mode(const DiscPtr& disc, int k) {
  if (k < 1) throw DomainError("sine modes are indexed from 1");
  const double a = disc->grid().left, len = disc->grid().right - a;
  Eigen::VectorXd v(disc->size());
  for (Eigen::Index j = 0; j < v.size(); ++j)
    v[j] = std::sqrt(2.0 / len) * std::sin(k * M_PI * (disc->x()[j] - a) / len);
  return Field::from_real(disc, v);
}

/// u = sum_n a_n phi_n, a[0] multiplying phi_1.
struct SineState {
  Eigen::VectorXcd coefficients;

  int n_max() const { return static_cast<int>(coefficients.size()); }
  double charge() const { return 0.5 * coefficients.squaredNorm(); }
  double energy() const {
    double e = 0.0;
    for (int n = 1; n <= n_max(); ++n) e += 0.5 * n * n * std::norm(coefficients[n - 1]);
    return e;
  }
  /// |u|_X^2 = sum n^2 |a_n|^2.
  double x_norm_sq() const { return 2.0 * energy(); }
};

inline SineState sine_mode_state(int n_max, int k) {
  if (k < 1 || k > n_max) throw DomainError("mode index outside the truncated basis");
  SineState s{Eigen::VectorXcd::Zero(n_max)};
  s.coefficients[k - 1] = 1.0;
  return s;
}

/// a_n -> exp(i n^2 t) a_n.
inline SineState exact_evolve(const SineState& s, double t) {
  SineState out = s;
  for (int n = 1; n <= s.n_max(); ++n)
    out.coefficients[n - 1] *= std::polar(1.0, std::fmod(double(n) * n * t, 2.0 * M_PI));
  return out;
}

/// inf_s |u - T(s) phi_k|_X in closed form.
inline double sine_tube_distance(const SineState& s, int k = 2) {
  if (k < 1 || k > s.n_max()) throw DomainError("mode index outside the truncated basis");
  const double d2 = s.x_norm_sq() - 2.0 * k * k * std::abs(s.coefficients[k - 1]) + double(k) * k;
  return std::sqrt(std::max(0.0, d2));
}

inline Field to_field(const SineState& s, const DiscPtr& disc) {
  Field u(disc);
  for (int n = 1; n <= s.n_max(); ++n) u = u + s.coefficients[n - 1] * sine_mode(disc, n);
  return u;
}

namespace detail {

/// Diagonal form of S''(phi_k) with omega = k^2 in the real coordinates (Re a_1.., Im a_1..).
struct SineForm {
  Eigen::MatrixXd a;
  Eigen::MatrixXd mass_h;
  Eigen::MatrixXd mass_x;
};

inline SineForm sine_form(int n_max, double omega) {
  SineForm f;
  const int m = 2 * n_max;
  f.a = Eigen::MatrixXd::Zero(m, m);
  f.mass_h = Eigen::MatrixXd::Identity(m, m);
  f.mass_x = Eigen::MatrixXd::Zero(m, m);
  for (int n = 1; n <= n_max; ++n)
    for (int part = 0; part < 2; ++part) {
      const int i = part * n_max + n - 1;
      f.a(i, i) = double(n) * n - omega;
      f.mass_x(i, i) = double(n) * n;
    }
  return f;
}

inline Eigen::VectorXd sine_coordinate(int n_max, int mode, bool imaginary) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * n_max);
  c[(imaginary ? n_max : 0) + mode - 1] = 1.0;
  return c;
}

}  // namespace detail

/// Bound state phi_2 at omega = 4 with psi = phi_1: (A1) and (A2a) hold while (A3) fails along
/// i phi_1; adding (J psi, w)_H = 0 restores positivity.
inline std::vector<ConditionReport> check_counterexample(int n_max = 64) {
  if (n_max < 8) throw PreconditionError("counterexample needs n_max >= 8");
  const double omega = 4.0;
  const detail::SineForm f = detail::sine_form(n_max, omega);
  const Eigen::VectorXd phi = detail::sine_coordinate(n_max, 2, false);
  const Eigen::VectorXd jphi = detail::sine_coordinate(n_max, 2, true);
  const Eigen::VectorXd psi = detail::sine_coordinate(n_max, 1, false);
  const Eigen::VectorXd jpsi = detail::sine_coordinate(n_max, 1, true);
  std::vector<ConditionReport> out;

  ConditionReport a1;
  a1.condition = "A1";
  const double res = (f.a * phi).norm();
  a1.scalars["residual"] = res;
  a1.holds = res == 0.0;
  out.push_back(a1);

  ConditionReport a2;
  a2.condition = "A2a";
  a2.scalars["form_value"] = psi.dot(f.a * psi);
  a2.holds = a2.scalars["form_value"] < 0.0;
  out.push_back(a2);

  auto minimum = [&](const std::vector<Eigen::VectorXd>& cons, const Eigen::MatrixXd& mass) {
    Eigen::MatrixXd c(2 * n_max, cons.size());
    for (std::size_t k = 0; k < cons.size(); ++k) c.col(k) = cons[k];
    return constrained_lowest(f.a, mass, c, 1);
  };

  ConditionReport a3;
  a3.condition = "A3";
  const EigenPairs w3 = minimum({phi, jphi, psi}, f.mass_x);
  a3.scalars["k0_estimate"] = w3.values[0];
  a3.scalars["min_h"] = minimum({phi, jphi, psi}, f.mass_h).values[0];
  const Eigen::VectorXd v = w3.vectors.col(0);
  a3.scalars["minimizer_weight_on_i_phi1"] = std::abs(v.dot(jpsi)) / v.norm();
  a3.holds = w3.values[0] > 0.0;
  a3.note = "minimizer along i phi_1";
  out.push_back(a3);

  ConditionReport a4;
  a4.condition = "A3+Jpsi";
  const EigenPairs w4 = minimum({phi, jphi, psi, jpsi}, f.mass_h);
  a4.scalars["min_h"] = w4.values[0];
  a4.scalars["k0_estimate"] = minimum({phi, jphi, psi, jpsi}, f.mass_x).values[0];
  a4.holds = w4.values[0] > 0.0;
  out.push_back(a4);
  return out;
}

}  // namespace nlsstab
