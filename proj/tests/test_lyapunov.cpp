#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlsstab/delta_nls.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/lyapunov.hpp"
#include "nlsstab/pipelines.hpp"

using namespace nlsstab;

namespace {

struct Fixture {
  DeltaNls model;
  Field phi;
  Field psi;
  double omega;
};

Fixture collapse_case(int n = 801) {
  const double w = -2.0;
  const Field phi = bound_state(6.0, 1.0, w, default_delta_grid(6.0, 1.0, w, n), Sector::even);
  DeltaNls m(6.0, 1.0, phi.disc_ptr());
  Field psi = charge_constrained_minimizer(m, w, phi).psi;
  return {m, phi, psi, w};
}

/// Brute-force inf over a fine phase grid followed by golden-section refinement.
double brute_distance(const DeltaNls& m, const Field& u, const Field& phi) {
  auto f = [&](double s) { return norm_x(m, apply_T(m, s, u) - phi); };
  double best = 0.0, fb = f(0.0);
  for (int k = 1; k < 720; ++k)
    if (const double v = f(2.0 * M_PI * k / 720); v < fb) fb = v, best = 2.0 * M_PI * k / 720;
  double a = best - 2.0 * M_PI / 720, b = best + 2.0 * M_PI / 720;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 80; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    (f(c) < f(d) ? b : a) = (f(c) < f(d) ? d : c);
  }
  return f(0.5 * (a + b));
}

}  // namespace

TEST(OrbitDistance, ExpansionMatchesDirectNorm) {
  const Fixture fx = collapse_case(401);
  std::mt19937 rng(11);
  const Field u = fx.phi + 0.3 * random_direction(fx.model, rng);
  const OrbitDistance od(fx.model, u, fx.phi);
  for (double s : {0.0, 0.7, 2.0, 4.5}) {
    const double direct = norm_x(fx.model, apply_T(fx.model, s, u) - fx.phi);
    EXPECT_NEAR(od.value(s), direct * direct, 1e-10 * direct * direct);
  }
}

TEST(OrbitDistance, MinimumMatchesBruteForce) {
  const Fixture fx = collapse_case(401);
  std::mt19937 rng(12);
  for (int k = 0; k < 4; ++k) {
    const Field u = apply_T(fx.model, 1.3 * k, fx.phi + 0.2 * random_direction(fx.model, rng));
    EXPECT_NEAR(tube_distance(fx.model, u, fx.phi), brute_distance(fx.model, u, fx.phi), 1e-9);
  }
}

TEST(OrbitDistance, RotatedBoundStateHasZeroDistance) {
  const Fixture fx = collapse_case(401);
  for (double s0 : {0.4, 3.0, 5.9}) {
    const Field u = apply_T(fx.model, s0, fx.phi);
    EXPECT_LT(tube_distance(fx.model, u, fx.phi), 1e-6 * norm_x(fx.model, fx.phi));
    const double theta = align_phase(fx.model, u, fx.phi);
    EXPECT_NEAR(std::remainder(theta + s0, 2.0 * M_PI), 0.0, 1e-10);
  }
  EXPECT_NEAR(tube_distance(fx.model, 2.0 * fx.phi, fx.phi), norm_x(fx.model, fx.phi), 1e-9);
}

TEST(Lyapunov, FunctionalsVanishAtTheBoundState) {
  const Fixture fx = collapse_case();
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  const AlignedState a = ly.align(fx.phi);
  EXPECT_NEAR(a.distance, 0.0, 1e-7);
  EXPECT_NEAR(a.lambda_value, 0.0, 1e-10);
  EXPECT_NEAR(a.p_value, 0.0, 1e-6);
  EXPECT_NEAR(ly.gap_lambda_p(fx.phi), 0.0, 1e-12);
}

TEST(Lyapunov, FunctionalsAreInvariantUnderTheSymmetryGroup) {
  const Fixture fx = collapse_case();
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  std::mt19937 rng(5);
  for (int k = 0; k < 5; ++k) {
    const Field u = fx.phi + 0.01 * norm_x(fx.model, fx.phi) * random_direction(fx.model, rng);
    const AlignedState a = ly.align(u);
    for (double s : {0.5, 2.5, -1.0}) {
      const AlignedState b = ly.align(apply_T(fx.model, s, u));
      EXPECT_NEAR(b.a_value, a.a_value, 1e-10 * (1.0 + std::abs(a.a_value)));
      EXPECT_NEAR(b.lambda_value, a.lambda_value, 1e-10 * (1.0 + std::abs(a.lambda_value)));
      EXPECT_NEAR(b.p_value, a.p_value, 1e-8 * (1.0 + std::abs(a.p_value)));
    }
    EXPECT_LT(a.orthogonality, 1e-10);
  }
}

TEST(Lyapunov, LeavingTheTubeThrows) {
  const Fixture fx = collapse_case(401);
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  EXPECT_THROW(ly.align(1.2 * fx.phi), TubeExitError);
}

TEST(Lyapunov, DegenerateAlignmentThrows) {
  const Fixture fx = collapse_case(401);
  // a field X-orthogonal to phi and J phi makes (M, J^2 phi)_X vanish
  std::mt19937 rng(3);
  Field v = random_direction(fx.model, rng);
  for (const Field& c : {fx.phi, apply_J(fx.model, fx.phi)})
    v = v - (inner_x(fx.model, v, c) / inner_x(fx.model, c, c)) * c;
  TubeOptions wide;
  wide.radius_rel = 3.0;
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi, wide);
  EXPECT_THROW(ly.align(0.1 * v), AlignmentSingularError);
}

TEST(EnergyGap, RequiresTheChargeLevelSet) {
  const Fixture fx = collapse_case(401);
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  EXPECT_THROW(ly.gap_lambda_p(1.001 * fx.phi), PreconditionError);
}

TEST(EnergyGap, NonnegativeOnRandomChargeNormalizedSamples) {
  const Fixture fx = collapse_case();
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double r = 0.02 * norm_x(fx.model, fx.phi);
  for (int k = 0; k < 30; ++k) {
    const Field u = normalize_charge(fx.model, fx.phi + r * u01(rng) * random_direction(fx.model, rng), fx.phi);
    EXPECT_GE(ly.gap_lambda_p(u), -1e-10) << "sample " << k;
  }
}

TEST(EnergyGap, NegativeForTheLinearCounterexample) {
  // phi_2 with psi = phi_1: the state phi_2 + delta i phi_1 has E below E(phi_2) and P = Lambda = 0
  const auto disc = Discretization::make(Grid::line_segment(0.0, M_PI, 257));
  const LinearInterval m(disc);
  const Field phi = sine_mode(disc, 2), psi = sine_mode(disc, 1);
  const double omega = 2.0 * m.energy(phi) / norm_h(phi) / norm_h(phi);
  const LyapunovFunctionals<LinearInterval> ly(m, omega, phi, psi);
  const double delta = 0.02;
  const Field u = normalize_charge(m, phi + cplx(0.0, delta) * psi, phi);
  const AlignedState a = ly.align(u);
  EXPECT_NEAR(a.lambda_value, 0.0, 1e-12);
  const double gap = ly.gap_lambda_p(u, 1e-8);
  // E_1 - E_2 = (1 - 4)/2 in the continuum
  EXPECT_NEAR(gap, -1.5 * delta * delta / (1.0 + delta * delta), 2e-4 * delta * delta);
  EXPECT_LT(gap, 0.0);
}

TEST(TestCurve, PreservesCharge) {
  const Fixture fx = collapse_case();
  const double q = charge(fx.model, fx.phi);
  for (double l : {-0.1, 0.01, 0.2}) {
    const Field c = charge_preserving_curve(fx.model, fx.phi, fx.psi, l);
    EXPECT_NEAR(charge(fx.model, c), q, 1e-12 * q);
  }
  EXPECT_EQ(norm_h(charge_preserving_curve(fx.model, fx.phi, fx.psi, 0.0) - fx.phi), 0.0);
  EXPECT_THROW(charge_preserving_curve(fx.model, fx.phi, fx.psi, 1e3), DomainError);
}

TEST(TestCurve, ActionGapIsQuadraticWithTheFormCoefficient) {
  // S(phi_l) - S(phi) = (l^2/2) <S'' psi, psi> + O(l^3)
  const Fixture fx = collapse_case();
  const double form = hessian_form(fx.model, fx.omega, fx.phi, fx.psi);
  const double s0 = action(fx.model, fx.omega, fx.phi);
  for (double l : {1e-3, 2e-3}) {
    const Field c = charge_preserving_curve(fx.model, fx.phi, fx.psi, l);
    const double ds = action(fx.model, fx.omega, c) - s0;
    EXPECT_NEAR(ds / (l * l), 0.5 * form, 0.02 * std::abs(form));
  }
}

TEST(TestCurve, VirialFunctionalHasTheSignOfLambda) {
  const Fixture fx = collapse_case();
  const LyapunovFunctionals<DeltaNls> ly(fx.model, fx.omega, fx.phi, fx.psi);
  for (double l : {-2e-3, 2e-3}) {
    const AlignedState a = ly.align(charge_preserving_curve(fx.model, fx.phi, fx.psi, l));
    EXPECT_LT(l * a.p_value, 0.0) << "lambda=" << l;
  }
}
