#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "nlsstab/delta_nls.hpp"
#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"
#include "nlsstab/linalg.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/lyapunov.hpp"
#include "nlsstab/model.hpp"
#include "nlsstab/system_nls.hpp"

namespace nlsstab {

enum class Scheme { crank_nicolson, strang };

inline std::string to_string(Scheme s) {
  return s == Scheme::crank_nicolson ? "crank-nicolson-fixed-point" : "strang-splitting";
}

struct IntegratorConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  Scheme scheme = Scheme::crank_nicolson;
  double fp_tol = 1e-12;
  int fp_max_iter = 50;
  int diag_stride = 10;
  bool stop_on_exit = false;
  double conservation_tol = 1e-6;
  double boundary_tol = 1e-8;  // growth of the relative edge amplitude over its initial value

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
    if (!(t_end >= 0.0)) throw DomainError("t_end must be nonnegative");
    if (!(fp_tol < 1e-8) || !(fp_tol > 0.0)) throw DomainError("fp_tol must lie in (0, 1e-8)");
    if (fp_max_iter < 1) throw DomainError("fp_max_iter must be positive");
    if (diag_stride < 1) throw DomainError("diag_stride must be at least 1");
  }
};

struct TrajectoryDiagnostics {
  std::vector<double> times, energy, charge, tube_distance;
  // Lyapunov values, absent once the state has left the tube
  std::vector<std::optional<double>> a_series, lambda_series, p_series;
  std::optional<double> exit_time;
  std::optional<double> boundary_time;  // first sample where the edge amplitude grew past tolerance
  double energy_drift = 0;              // max relative deviation from the initial value
  double charge_drift = 0;
  bool valid = true;                    // drifts below conservation_tol
  long steps = 0;
  int max_fp_iterations = 0;
};

// ---------------------------------------------------------------------------------------------
// Per-model ingredients: kinetic form and the discrete gradient of the potential part

namespace detail {

struct LinearPart {
  Eigen::VectorXd diag, off;
};

inline LinearPart linear_part(const DeltaNls& m) { return {m.form_diag(), m.form_off()}; }
inline LinearPart linear_part(const LinearInterval& m) {
  return {m.disc()->kinetic_diag(), m.disc()->kinetic_off()};
}
inline LinearPart linear_part(const SystemNls& m) {
  return {m.disc()->kinetic_diag(), m.disc()->kinetic_off()};
}

/// (F(y) - F(x))/(y - x) for F(s) = (2/(p+1)) s^((p+1)/2), with the derivative s^((p-1)/2) at
/// coincident arguments.
inline double power_quotient(double p, double x, double y) {
  const double e = 0.5 * (p - 1.0);
  const double hi = std::max(x, y), lo = std::min(x, y);
  if (hi == 0.0) return 0.0;
  const double q = (hi - lo) / hi;
  if (q < 1e-4) {
    // Taylor expansion about the mean
    const double m = 0.5 * (x + y), t = 0.5 * (y - x) / m;
    const double t2 = t * t;
    return std::pow(m, e) *
           (1.0 + e * (e - 1.0) / 6.0 * t2 + e * (e - 1.0) * (e - 2.0) * (e - 3.0) / 120.0 * t2 * t2);
  }
  const double a = 0.5 * (p + 1.0);
  return (2.0 / (p + 1.0)) * std::pow(hi, e) * -std::expm1(a * std::log1p(-q)) / q;
}

/// Discrete gradient of -(1/(p+1)) sum w |u|^{p+1}, per node.
inline void power_gradient(double p, const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                           Eigen::Ref<Eigen::VectorXcd> out) {
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    const double g = power_quotient(p, std::norm(a[j]), std::norm(b[j]));
    out[j] = -g * 0.5 * (a[j] + b[j]);
  }
}

inline Eigen::VectorXcd potential_gradient(const DeltaNls& m, const Eigen::VectorXcd& a,
                                           const Eigen::VectorXcd& b) {
  Eigen::VectorXcd g(a.size());
  power_gradient(m.p(), a, b, g);
  return g;
}

inline Eigen::VectorXcd potential_gradient(const LinearInterval&, const Eigen::VectorXcd& a,
                                           const Eigen::VectorXcd&) {
  return Eigen::VectorXcd::Zero(a.size());
}

/// Discrete gradient for |u_c| u_c and the midpoint rule for the coupling, which keeps Q exact.
inline Eigen::VectorXcd potential_gradient(const SystemNls& m, const Eigen::VectorXcd& a,
                                           const Eigen::VectorXcd& b) {
  const Eigen::Index n = a.size() / 2;
  Eigen::VectorXcd g(a.size());
  for (int c = 0; c < 2; ++c)
    power_gradient(2.0, a.segment(c * n, n), b.segment(c * n, n), g.segment(c * n, n));
  const double gm = m.gamma();
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx m1 = 0.5 * (a[j] + b[j]), m2 = 0.5 * (a[n + j] + b[n + j]);
    g[j] -= gm * std::conj(m1) * m2;
    g[n + j] -= 0.5 * gm * m1 * m1;
  }
  return g;
}

/// u -> u exp(-i j tau |u|^{p-1}), the exact flow of the power nonlinearity.
inline void nonlinear_phase(const DeltaNls& m, Eigen::VectorXcd& u, double tau) {
  const double e = 0.5 * (m.p() - 1.0);
  for (Eigen::Index j = 0; j < u.size(); ++j) u[j] *= std::polar(1.0, -tau * std::pow(std::norm(u[j]), e));
}
inline void nonlinear_phase(const LinearInterval&, Eigen::VectorXcd&, double) {}
inline void nonlinear_phase(const SystemNls&, Eigen::VectorXcd&, double) {
  throw PreconditionError("splitting is available for scalar models only");
}

/// Amplitude at the unknowns next to a Dirichlet edge, relative to the maximum.
inline double boundary_amplitude(const Field& u) {
  const Discretization& d = u.disc();
  const Eigen::Index n = u.nodes();
  const double top = u.values().cwiseAbs().maxCoeff();
  if (top == 0.0) return 0.0;
  double edge = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto v = u.component(c);
    edge = std::max(edge, std::abs(v[n - 1]));
    const bool left_edge = d.grid().kind != GridKind::radial && d.sector() == Sector::full;
    if (left_edge) edge = std::max(edge, std::abs(v[0]));
  }
  return edge / top;
}

}  // namespace detail

/// Reference orbit for tube and Lyapunov diagnostics.
struct OrbitReference {
  Field phi;
  double omega = 0;
  std::optional<Field> psi;  // enables A, Lambda, P
  TubeOptions tube;
};

/// Time stepper for du/dt = J E'(u) in the weighted representation.
template <class M>
class Integrator {
 public:
  Integrator(const M& model, IntegratorConfig cfg) : model_(model), cfg_(cfg) {
    cfg_.validate();
    lin_ = detail::linear_part(model_);
    const auto j = model_.j_weights();
    const Eigen::VectorXd& w = model_.disc()->weights();
    for (int c = 0; c < model_.components(); ++c) {
      const cplx a(0.0, 0.5 * cfg_.dt * j[c]);
      Eigen::VectorXcd dl = w.cast<cplx>() - a * lin_.diag.cast<cplx>();
      Eigen::VectorXcd ol = -a * lin_.off.cast<cplx>();
      lhs_.emplace_back(dl, ol);
    }
  }

  const IntegratorConfig& config() const { return cfg_; }
  int last_fp_iterations() const { return last_iter_; }

  /// One step of size dt.
  void step(Eigen::VectorXcd& u, long index) const {
    if (cfg_.scheme == Scheme::strang) {
      detail::nonlinear_phase(model_, u, 0.5 * cfg_.dt);
      cayley(u);
      detail::nonlinear_phase(model_, u, 0.5 * cfg_.dt);
      last_iter_ = 0;
    } else {
      crank_nicolson(u, index);
    }
    if (!u.allFinite()) throw BlowUpError("non-finite values in the solution", index);
  }

 private:
  /// (W + i dt/2 j K) u for each component.
  Eigen::VectorXcd explicit_half(const Eigen::VectorXcd& u) const {
    const auto j = model_.j_weights();
    const Eigen::VectorXd& w = model_.disc()->weights();
    const Eigen::Index n = w.size();
    Eigen::VectorXcd out(u.size());
    for (int c = 0; c < model_.components(); ++c) {
      const Eigen::VectorXcd uc = u.segment(c * n, n);
      out.segment(c * n, n) = w.cast<cplx>().cwiseProduct(uc) +
                              cplx(0.0, 0.5 * cfg_.dt * j[c]) * tridiag_apply(lin_.diag, lin_.off, uc);
    }
    return out;
  }

  void solve(Eigen::VectorXcd& rhs) const {
    const Eigen::Index n = model_.disc()->size();
    for (int c = 0; c < model_.components(); ++c) {
      auto seg = rhs.segment(c * n, n);
      lhs_[c].solve_in_place(seg);
    }
  }

  void cayley(Eigen::VectorXcd& u) const {
    Eigen::VectorXcd rhs = explicit_half(u);
    solve(rhs);
    u = std::move(rhs);
  }

  void crank_nicolson(Eigen::VectorXcd& u, long index) const {
    const auto j = model_.j_weights();
    const Eigen::VectorXd& w = model_.disc()->weights();
    const Eigen::Index n = w.size();
    const Eigen::VectorXcd base = explicit_half(u);
    Eigen::VectorXcd next = u;
    double change = std::numeric_limits<double>::infinity();
    const double scale = std::max(u.cwiseAbs().maxCoeff(), 1e-300);
    int it = 0;
    while (it < cfg_.fp_max_iter) {
      ++it;
      const Eigen::VectorXcd g = detail::potential_gradient(model_, u, next);
      Eigen::VectorXcd rhs = base;
      for (int c = 0; c < model_.components(); ++c)
        rhs.segment(c * n, n) += cplx(0.0, cfg_.dt * j[c]) * w.cast<cplx>().cwiseProduct(g.segment(c * n, n));
      solve(rhs);
      change = (rhs - next).cwiseAbs().maxCoeff() / scale;
      next = std::move(rhs);
      if (change < cfg_.fp_tol) break;
    }
    if (!(change < cfg_.fp_tol))
      throw IntegratorError("fixed-point iteration did not converge (change " + std::to_string(change) + ")",
                            index);
    last_iter_ = it;
    u = std::move(next);
  }

  const M& model_;
  IntegratorConfig cfg_;
  detail::LinearPart lin_;
  std::vector<TridiagFactor<cplx>> lhs_;
  mutable int last_iter_ = 0;
};

struct EvolveResult {
  Field final_state;
  TrajectoryDiagnostics diagnostics;
};

/// Integrates from u0 to cfg.t_end, sampling diagnostics every diag_stride steps.
template <class M>
EvolveResult evolve(const M& model, const Field& u0, const IntegratorConfig& cfg,
                    const std::optional<OrbitReference>& ref = std::nullopt) {
  require_on_model(model, u0);
  const Integrator<M> integ(model, cfg);
  std::optional<LyapunovFunctionals<M>> lyap;
  double radius = std::numeric_limits<double>::infinity();
  if (ref) {
    require_on_model(model, ref->phi);
    radius = ref->tube.radius_rel * norm_x(model, ref->phi);
    if (ref->psi) lyap.emplace(model, ref->omega, ref->phi, *ref->psi, ref->tube);
  }
  EvolveResult out;
  TrajectoryDiagnostics& dg = out.diagnostics;
  const long n_steps = static_cast<long>(std::llround(cfg.t_end / cfg.dt));
  Eigen::VectorXcd u = u0.values();
  const double e0 = model.energy(u0), q0 = charge(model, u0);
  const double b0 = detail::boundary_amplitude(u0);

  auto record = [&](long k) {
    const Field f = u0.with_values(u);
    const double t = k * cfg.dt;
    dg.times.push_back(t);
    const double e = model.energy(f), q = charge(model, f);
    dg.energy.push_back(e);
    dg.charge.push_back(q);
    dg.energy_drift = std::max(dg.energy_drift, std::abs(e - e0) / std::max(std::abs(e0), 1e-300));
    dg.charge_drift = std::max(dg.charge_drift, std::abs(q - q0) / std::max(q0, 1e-300));
    if (!dg.boundary_time && detail::boundary_amplitude(f) > b0 + cfg.boundary_tol) dg.boundary_time = t;
    if (!ref) return;
    const double dist = tube_distance(model, f, ref->phi);
    dg.tube_distance.push_back(dist);
    const bool inside = dist <= radius;
    if (!inside && !dg.exit_time) dg.exit_time = t;
    std::optional<double> a, l, p;
    if (lyap && inside && !dg.exit_time) {
      const AlignedState s = lyap->align(f);
      a = s.a_value;
      l = s.lambda_value;
      p = s.p_value;
    }
    dg.a_series.push_back(a);
    dg.lambda_series.push_back(l);
    dg.p_series.push_back(p);
  };

  record(0);
  for (long k = 1; k <= n_steps; ++k) {
    integ.step(u, k);
    dg.max_fp_iterations = std::max(dg.max_fp_iterations, integ.last_fp_iterations());
    dg.steps = k;
    if (k % cfg.diag_stride == 0 || k == n_steps) {
      record(k);
      if (cfg.stop_on_exit && dg.exit_time) break;
    }
  }
  // the charge is exact for both schemes; splitting does not conserve E exactly
  dg.valid = dg.charge_drift < cfg.conservation_tol &&
             (cfg.scheme == Scheme::strang || dg.energy_drift < cfg.conservation_tol);
  out.final_state = u0.with_values(std::move(u));
  return out;
}

/// max over in-tube interior samples of |centered dA/dt + P|, normalized by max |P|.
inline double lyapunov_identity_residual(const TrajectoryDiagnostics& dg) {
  double worst = 0.0, pmax = 0.0;
  int used = 0;
  for (std::size_t k = 1; k + 1 < dg.times.size(); ++k) {
    if (!dg.a_series[k - 1] || !dg.a_series[k + 1] || !dg.p_series[k]) continue;
    const double da = (*dg.a_series[k + 1] - *dg.a_series[k - 1]) / (dg.times[k + 1] - dg.times[k - 1]);
    worst = std::max(worst, std::abs(da + *dg.p_series[k]));
    pmax = std::max(pmax, std::abs(*dg.p_series[k]));
    ++used;
  }
  if (used < 10) throw InsufficientDataError("need at least 10 in-tube samples for the dA/dt check");
  if (pmax == 0.0) return worst;
  return worst / pmax;
}

/// u(t) -> conj(u(-t)) maps solutions to solutions, so backward evolution is a conjugated forward run.
template <class M>
Field evolve_backward(const M& model, const Field& u, const IntegratorConfig& cfg) {
  const Field c = u.with_values(u.values().conjugate());
  const EvolveResult r = evolve(model, c, cfg);
  return r.final_state.with_values(r.final_state.values().conjugate());
}

}  // namespace nlsstab
