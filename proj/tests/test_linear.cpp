#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlsstab/dynamics.hpp"
#include "nlsstab/linear_interval.hpp"

using namespace nlsstab;

namespace {

const ConditionReport& find(const std::vector<ConditionReport>& rs, const std::string& name) {
  for (const auto& r : rs)
    if (r.condition == name) return r;
  throw std::runtime_error("missing condition " + name);
}

SineState random_perturbation(int n_max, double size, std::mt19937& rng) {
  std::normal_distribution<double> n01;
  SineState s = sine_mode_state(n_max, 2);
  Eigen::VectorXcd v(n_max);
  for (int n = 1; n <= n_max; ++n) v[n - 1] = cplx(n01(rng), n01(rng)) / double(n * n);
  double xn = 0.0;
  for (int n = 1; n <= n_max; ++n) xn += double(n) * n * std::norm(v[n - 1]);
  s.coefficients += (size / std::sqrt(xn)) * v;
  return s;
}

}  // namespace

TEST(Counterexample, ReportsTheExpectedValues) {
  const auto rs = check_counterexample(64);
  EXPECT_TRUE(find(rs, "A1").holds);
  EXPECT_EQ(find(rs, "A1").scalars.at("residual"), 0.0);
  EXPECT_TRUE(find(rs, "A2a").holds);
  EXPECT_EQ(find(rs, "A2a").scalars.at("form_value"), -3.0);
  const ConditionReport& a3 = find(rs, "A3");
  EXPECT_FALSE(a3.holds);
  EXPECT_NEAR(a3.scalars.at("k0_estimate"), -3.0, 1e-12);
  EXPECT_NEAR(a3.scalars.at("min_h"), -3.0, 1e-12);
  EXPECT_NEAR(a3.scalars.at("minimizer_weight_on_i_phi1"), 1.0, 1e-12);
  const ConditionReport& a4 = find(rs, "A3+Jpsi");
  EXPECT_TRUE(a4.holds);
  // next mode n = 3: (9 - 4) in H, (9 - 4)/9 in X
  EXPECT_NEAR(a4.scalars.at("min_h"), 5.0, 1e-12);
  EXPECT_NEAR(a4.scalars.at("k0_estimate"), 5.0 / 9.0, 1e-12);
  EXPECT_THROW(check_counterexample(4), PreconditionError);
}

TEST(SineBasis, ExactEvolutionPreservesModuli) {
  std::mt19937 rng(8);
  const SineState s = random_perturbation(32, 0.1, rng);
  const SineState t = exact_evolve(s, 123.4);
  for (int n = 0; n < 32; ++n)
    EXPECT_NEAR(std::abs(t.coefficients[n]), std::abs(s.coefficients[n]), 1e-14);
  EXPECT_NEAR(t.energy(), s.energy(), 1e-13);
  EXPECT_NEAR(t.charge(), s.charge(), 1e-14);
}

TEST(SineBasis, TubeDistanceMatchesDirectMinimization) {
  std::mt19937 rng(9);
  for (int k = 0; k < 5; ++k) {
    const SineState s = exact_evolve(random_perturbation(16, 0.3, rng), 0.37 * k);
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 20000; ++j) {
      const cplx e = std::polar(1.0, 2.0 * M_PI * j / 20000);
      double d2 = 0.0;
      for (int n = 1; n <= 16; ++n) {
        const cplx target = n == 2 ? e : cplx(0.0);
        d2 += double(n) * n * std::norm(s.coefficients[n - 1] - target);
      }
      best = std::min(best, d2);
    }
    EXPECT_NEAR(sine_tube_distance(s), std::sqrt(best), 1e-6);
  }
  EXPECT_EQ(sine_tube_distance(sine_mode_state(8, 2)), 0.0);
  SineState twice = sine_mode_state(8, 2);
  twice.coefficients *= 2.0;
  EXPECT_NEAR(sine_tube_distance(twice), 2.0, 1e-14);
  EXPECT_THROW(sine_tube_distance(twice, 9), DomainError);
}

TEST(SineBasis, PerturbationsStayCloseForAllTime) {
  std::mt19937 rng(10);
  for (int k = 0; k < 20; ++k) {
    const SineState s = random_perturbation(32, 1e-2, rng);
    const double d0 = sine_tube_distance(s);
    for (double t : {1.0, 10.0, 1e3})
      EXPECT_NEAR(sine_tube_distance(exact_evolve(s, t)), d0, 1e-12);
  }
}

TEST(LinearInterval, SampledSinesAreDiscreteEigenvectors) {
  const auto disc = Discretization::make(Grid::line_segment(0.0, M_PI, 129));
  const LinearInterval m(disc);
  const double h = disc->h();
  for (int k : {1, 2, 5}) {
    const Field f = sine_mode(disc, k);
    EXPECT_NEAR(norm_h(f), 1.0, 1e-13);
    const double s = std::sin(k * h / 2.0);
    const double lam = 4.0 / (h * h) * s * s;
    EXPECT_LT(norm_h(m.grad_E(f) - lam * f), 1e-9 * lam);
  }
  EXPECT_NEAR(inner_h(sine_mode(disc, 1), sine_mode(disc, 3)), 0.0, 1e-14);
  EXPECT_THROW(LinearInterval(Discretization::make(Grid::full_line(3.0, 65))), DomainError);
  EXPECT_THROW(sine_mode(disc, 0), DomainError);
}

TEST(LinearInterval, GridEvolutionRotatesTheModeByItsDiscreteFrequency) {
  const auto disc = Discretization::make(Grid::line_segment(0.0, M_PI, 129));
  const LinearInterval m(disc);
  const double h = disc->h(), dt = 1e-2;
  const double lam = 4.0 / (h * h) * std::pow(std::sin(h), 2);
  IntegratorConfig cfg;
  cfg.dt = dt;
  cfg.t_end = 2.0;
  const Field phi = sine_mode(disc, 2);
  const EvolveResult r = evolve(m, phi, cfg);
  // the Cayley transform advances the phase by 2 atan(lam dt / 2) per step
  const double phase = 200 * 2.0 * std::atan(0.5 * lam * dt);
  EXPECT_LT(norm_h(r.final_state - std::polar(1.0, phase) * phi), 1e-11);
  EXPECT_LT(tube_distance(m, r.final_state, phi), 1e-9);
}
