#pragma once

#include <random>
#include <string>
#include <vector>

#include "nlsstab/dcurve.hpp"
#include "nlsstab/delta_nls.hpp"
#include "nlsstab/errors.hpp"
#include "nlsstab/lyapunov.hpp"
#include "nlsstab/spectral.hpp"

namespace nlsstab {

/// Condition batteries for the delta model.
///  degenerate: p = 4 style critical frequency, even sector, psi along d phi / d omega.
///  collapse: even sector, psi from the charge-constrained minimizer.
///  two_negative: full line, psi = odd negative direction chi_1.
enum class Pipeline { degenerate, collapse, two_negative };

inline std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::degenerate: return "degenerate";
    case Pipeline::collapse: return "collapse";
    case Pipeline::two_negative: return "two-negative";
  }
  return "?";
}

inline Pipeline parse_pipeline(const std::string& s) {
  if (s == "degenerate") return Pipeline::degenerate;
  if (s == "collapse") return Pipeline::collapse;
  if (s == "two-negative") return Pipeline::two_negative;
  throw DomainError("unknown pipeline '" + s + "' (degenerate | collapse | two-negative)");
}

inline Sector pipeline_sector(Pipeline p) {
  return p == Pipeline::two_negative ? Sector::full : Sector::even;
}

/// Bound state, model and the distinguished direction psi of a pipeline.
struct PipelineSetup {
  Field phi;
  DeltaNls model;
  Field psi;
  double omega = 0;
};

inline PipelineSetup pipeline_setup(Pipeline pl, double p, double gamma, double omega, int n_points) {
  const Field phi = bound_state(p, gamma, omega, default_delta_grid(p, gamma, omega, n_points),
                                pipeline_sector(pl));
  DeltaNls model(p, gamma, phi.disc_ptr());
  Field psi = phi;
  switch (pl) {
    case Pipeline::degenerate: {
      const Field t = discrete_tangent(model, omega, phi);
      psi = (1.0 / norm_h(t)) * t;
      break;
    }
    case Pipeline::collapse:
      psi = charge_constrained_minimizer(model, omega, phi).psi;
      break;
    case Pipeline::two_negative: {
      const ConditionReport b2 = check_B2(model, omega, phi, B2Variant::b);
      if (!b2.witness) throw NotFoundError("no second negative direction at this point");
      psi = *b2.witness;
      break;
    }
  }
  return {phi, std::move(model), psi, omega};
}

/// Runs every condition the pipeline needs; all must hold for the instability statement.
inline std::vector<ConditionReport> run_pipeline(Pipeline pl, double p, double gamma, double omega,
                                                 int n_points = 2001) {
  const PipelineSetup s = pipeline_setup(pl, p, gamma, omega, n_points);
  std::vector<ConditionReport> out;
  out.push_back(check_A1(s.model, omega, s.phi));
  switch (pl) {
    case Pipeline::degenerate:
      out.push_back(check_A2b(s.model, omega, s.phi, s.psi));
      out.push_back(check_B2(s.model, omega, s.phi, B2Variant::a));
      break;
    case Pipeline::collapse: {
      const ChargeConstrainedMin e = charge_constrained_minimizer(s.model, omega, s.phi);
      ConditionReport neg;
      neg.condition = "constrained minimum negative";
      neg.scalars["lambda"] = e.lambda;
      neg.scalars["mu"] = e.mu;
      neg.scalars["residual_rel"] = e.residual_rel;
      neg.holds = e.negative && e.residual_rel < 1e-8;
      out.push_back(neg);
      out.push_back(check_A2a(s.model, omega, s.phi, s.psi));
      out.push_back(check_B2(s.model, omega, s.phi, B2Variant::a));
      break;
    }
    case Pipeline::two_negative:
      out.push_back(check_B2(s.model, omega, s.phi, B2Variant::b));
      out.push_back(check_A2a(s.model, omega, s.phi, s.psi));
      break;
  }
  out.push_back(check_A3(s.model, omega, s.phi, s.psi));
  out.push_back(check_B3(s.model, omega, s.phi));
  return out;
}

inline bool all_hold(const std::vector<ConditionReport>& rs) {
  for (const auto& r : rs)
    if (!r.holds) return false;
  return true;
}

/// Smooth random field: Gaussian bumps with N(0,1) complex weights, unit X norm.
template <HamiltonianModel M>
Field random_direction(const M& m, std::mt19937& rng, int bumps = 8) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  const auto& x = m.disc()->x();
  const double lo = m.disc()->grid().left, hi = m.disc()->grid().right;
  const double scale = 0.1 * (hi - lo);
  Field u(m.disc(), m.components());
  for (int c = 0; c < m.components(); ++c)
    for (int k = 0; k < bumps; ++k) {
      const cplx a(n01(rng), n01(rng));
      const double centre = lo + (hi - lo) * 0.5 * (1.0 + 0.5 * pos(rng));
      const double width = scale * (0.2 + 0.8 * std::abs(pos(rng)));
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double z = (x[j] - centre) / width;
        u.component(c)[j] += a * std::exp(-z * z);
      }
    }
  return (1.0 / norm_x(m, u)) * u;
}

enum class Direction { psi, chi1, phi_prime, random };

inline Direction parse_direction(const std::string& s) {
  if (s == "psi") return Direction::psi;
  if (s == "chi1") return Direction::chi1;
  if (s == "phi-prime") return Direction::phi_prime;
  if (s == "random") return Direction::random;
  throw DomainError("unknown direction '" + s + "' (psi | chi1 | phi-prime | random)");
}

/// Initial datum for a perturbed bound state. phi-prime moves along the charge-preserving test
/// curve with lambda = amplitude.
inline Field perturbed_state(const DeltaNls& m, double omega, const Field& phi, Direction dir,
                             double amplitude, unsigned seed = 1) {
  switch (dir) {
    case Direction::psi:
      return phi + amplitude * charge_constrained_minimizer(m, omega, phi).psi;
    case Direction::chi1: {
      const ConditionReport b2 = check_B2(m, omega, phi, B2Variant::b);
      if (!b2.witness) throw NotFoundError("no odd negative direction (use the full sector)");
      return phi + amplitude * *b2.witness;
    }
    case Direction::phi_prime: {
      const Field t = discrete_tangent(m, omega, phi);
      return charge_preserving_curve(m, phi, (1.0 / norm_h(t)) * t, amplitude);
    }
    case Direction::random: {
      std::mt19937 rng(seed);
      return phi + amplitude * random_direction(m, rng);
    }
  }
  return phi;
}

}  // namespace nlsstab
