#include <gtest/gtest.h>

#include <random>

#include "nlsstab/delta_nls.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/system_nls.hpp"
#include "oracles.hpp"

using namespace nlsstab;

namespace {

Field smooth_random(const DiscPtr& disc, int comps, std::mt19937& rng) {
  std::normal_distribution<double> n01;
  Field f(disc, comps);
  const auto& x = disc->x();
  const double lo = disc->grid().left, hi = disc->grid().right;
  for (int c = 0; c < comps; ++c) {
    auto v = f.component(c);
    for (int k = 1; k <= 6; ++k) {
      const cplx a(n01(rng), n01(rng));
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        const double t = (x[j] - lo) / (hi - lo);
        v[j] += a * std::sin(k * M_PI * t) / double(k * k);
      }
    }
  }
  return f;
}

template <class M>
void check_group_properties(const M& model, std::mt19937& rng) {
  std::uniform_real_distribution<double> angle(-10.0, 10.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Field u = smooth_random(model.disc(), model.components(), rng);
    const Field v = smooth_random(model.disc(), model.components(), rng);
    const double scale = norm_h(u) * norm_h(v);
    EXPECT_LT(std::abs(inner_h(apply_J(model, u), v) + inner_h(u, apply_J(model, v))), 1e-12 * scale);
    const double sx = norm_x(model, u) * norm_x(model, v);
    EXPECT_LT(std::abs(inner_x(model, apply_J(model, u), v) + inner_x(model, u, apply_J(model, v))),
              1e-12 * sx);
    const double s = angle(rng);
    const Field tu = apply_T(model, s, u);
    EXPECT_NEAR(norm_h(tu), norm_h(u), 1e-12 * norm_h(u));
    EXPECT_NEAR(norm_x(model, tu), norm_x(model, u), 1e-12 * norm_x(model, u));
    EXPECT_NEAR(model.energy(tu), model.energy(u), 1e-10 * std::abs(model.energy(u)));
    EXPECT_NEAR(charge(model, tu), charge(model, u), 1e-12 * charge(model, u));
  }
  const Field u = smooth_random(model.disc(), model.components(), rng);
  EXPECT_LT(norm_h(apply_T(model, 2.0 * M_PI, u) - u), 1e-13 * norm_h(u));
  EXPECT_LT(norm_h(apply_T(model, 0.0, u) - u), 1e-15);
  const double eps = 1e-6;
  const Field gen = (1.0 / (2.0 * eps)) * (apply_T(model, eps, u) - apply_T(model, -eps, u));
  EXPECT_LT(norm_h(gen - apply_J(model, u)), 1e-8 * norm_h(u));
  EXPECT_LT(norm_h(apply_J(model, apply_J_inv(model, u)) - u), 1e-14 * norm_h(u));
}

template <class M>
void check_gradient(const M& model, double omega, std::mt19937& rng) {
  for (int trial = 0; trial < 5; ++trial) {
    const Field u = smooth_random(model.disc(), model.components(), rng);
    const Field v = smooth_random(model.disc(), model.components(), rng);
    const double eps = 1e-5;
    const double fd = (action(model, omega, u + eps * v) - action(model, omega, u - eps * v)) / (2 * eps);
    const double an = inner_h(grad_S(model, omega, u), v);
    EXPECT_NEAR(fd, an, 1e-6 * std::max(1.0, std::abs(an)));
  }
}

}  // namespace

TEST(ModelCore, GridInvariants) {
  EXPECT_THROW(Grid::full_line(5.0, 10), DomainError);
  EXPECT_THROW(Grid::full_line(5.0, 2000), DomainError);
  const Grid g = Grid::full_line(5.0, 101);
  EXPECT_DOUBLE_EQ(g.spacing(), 0.1);
  auto full = Discretization::make(g);
  EXPECT_EQ(full->x()[*full->origin()], 0.0);
  auto even = Discretization::make(g, Sector::even);
  auto odd = Discretization::make(g, Sector::odd);
  EXPECT_EQ(full->size(), even->size() + odd->size());
}

TEST(ModelCore, SectorTransferRoundTrip) {
  std::mt19937 rng(3);
  const Grid g = Grid::full_line(4.0, 201);
  auto full = Discretization::make(g);
  auto even = Discretization::make(g, Sector::even);
  auto odd = Discretization::make(g, Sector::odd);
  const Field u = smooth_random(full, 1, rng);
  const Field back = to_sector(to_sector(u, even), full) + to_sector(to_sector(u, odd), full);
  EXPECT_LT(norm_h(back - u), 1e-14 * norm_h(u));
  // sector inner products reproduce the full-line ones
  const Field ue = to_sector(to_sector(u, even), full);
  EXPECT_NEAR(inner_h(to_sector(u, even), to_sector(u, even)), inner_h(ue, ue), 1e-12);
}

TEST(ModelCore, FieldsOnDifferentGridsAreRejected) {
  auto a = Discretization::make(Grid::full_line(4.0, 101));
  auto b = Discretization::make(Grid::full_line(4.0, 201));
  EXPECT_THROW(inner_h(Field(a), Field(b)), DimensionError);
  DeltaNls model(2.0, 1.0, a);
  EXPECT_THROW(model.energy(Field(b)), DimensionError);
  EXPECT_THROW(Field(a, Eigen::VectorXcd::Zero(7)), DimensionError);
}

TEST(ModelCore, ZeroFieldHasZeroEnergyChargeAndGradient) {
  auto d = Discretization::make(Grid::full_line(4.0, 101));
  DeltaNls model(3.0, 1.0, d);
  const Field z(d);
  EXPECT_EQ(model.energy(z), 0.0);
  EXPECT_EQ(charge(model, z), 0.0);
  EXPECT_EQ(norm_h(grad_S(model, -1.0, z)), 0.0);
}

TEST(ModelCore, DeltaGroupAndGradient) {
  std::mt19937 rng(11);
  DeltaNls model(3.0, 1.0, Discretization::make(Grid::full_line(6.0, 301)));
  check_group_properties(model, rng);
  check_gradient(model, -1.3, rng);
  DeltaNls frac(2.5, 0.7, Discretization::make(Grid::full_line(6.0, 301), Sector::even));
  check_gradient(frac, -0.9, rng);
}

TEST(ModelCore, SystemGroupAndGradient) {
  std::mt19937 rng(5);
  SystemNls model(0.5, Discretization::make(Grid::radial(10.0, 201, 1)));
  check_group_properties(model, rng);
  check_gradient(model, -1.0, rng);
  SystemNls model3(0.8, Discretization::make(Grid::radial(10.0, 201, 3)));
  check_gradient(model3, -1.0, rng);
}

TEST(ModelCore, LinearIntervalGroupAndGradient) {
  std::mt19937 rng(7);
  LinearInterval model(Discretization::make(Grid::line_segment(0.0, M_PI, 257)));
  check_group_properties(model, rng);
  check_gradient(model, 4.0, rng);
}

TEST(ModelCore, SystemJActsWithWeights) {
  auto d = Discretization::make(Grid::radial(10.0, 101, 1));
  SystemNls model(0.5, d);
  Field u(d, 2);
  u.component(0).setConstant(1.0);
  const Field ju = apply_J(model, u);
  EXPECT_EQ(ju.component(0)[3], cplx(0.0, 1.0));
  EXPECT_EQ(ju.component(1)[3], cplx(0.0, 0.0));
  Field v(d, 2);
  v.component(1).setConstant(1.0);
  EXPECT_EQ(apply_J(model, v).component(1)[3], cplx(0.0, 2.0));
}

TEST(ModelCore, DeltaRieszMapOfBoundState) {
  const double p = 3.0, g = 1.0, w = -1.5;
  const Field phi = bound_state(p, g, w, default_delta_grid(p, g, w, 801));
  DeltaNls model(p, g, phi.disc_ptr());
  const Field r = riesz_X(model, phi);
  Eigen::VectorXcd expect = phi.values();
  for (Eigen::Index j = 0; j < expect.size(); ++j)
    expect[j] = (1.0 + w) * phi.values()[j] + std::pow(phi.values()[j].real(), p);
  EXPECT_LT(norm_h(r - phi.with_values(expect)), 1e-9 * norm_h(r));
  EXPECT_LT(norm_h(riesz_H(model, phi) - phi), 1e-15);
}

TEST(ModelCore, LinearIntervalEigenfunctionIdentities) {
  const int n = 2049;
  auto d = Discretization::make(Grid::line_segment(0.0, M_PI, n));
  LinearInterval model(d);
  const Field phi2 = sine_mode(d, 2);
  EXPECT_NEAR(charge(model, phi2), 0.5, 1e-12);
  EXPECT_NEAR(model.energy(phi2), 2.0, 1e-5);
  // discrete eigenvalue (4/h^2) sin^2(nh/2) of the stiffness stencil
  const double h = d->h();
  for (int k : {1, 3}) {
    const Field phik = sine_mode(d, k);
    const double lam = 4.0 / (h * h) * std::pow(std::sin(k * h / 2.0), 2);
    EXPECT_LT(norm_h(riesz_X(model, phik) - lam * phik), 1e-8);
    EXPECT_NEAR(lam, k * k, 1e-5 * k * k);
  }
}

TEST(ModelCore, QuadratureConvergesAtSecondOrder) {
  // the kink at the origin limits the trapezoid rule to second order
  const double p = 2.0, g = 0.5, w = -1.0;
  const double q_ref = oracle::delta_charge(p, g, w);
  double prev = 0.0;
  for (int n : {201, 401, 801}) {
    const Grid grid = default_delta_grid(p, g, w, n);
    auto disc = Discretization::make(grid);
    DeltaNls model(p, g, disc);
    const double err = std::abs(charge(model, closed_form_profile(p, g, w, disc)) - q_ref);
    if (prev > 0.0) EXPECT_GT(prev / err, 3.5);
    prev = err;
  }
}
