#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "nlsstab/delta_nls.hpp"
#include "nlsstab/linear_interval.hpp"
#include "nlsstab/spectral.hpp"

using namespace nlsstab;

namespace {

/// Lowest generalized eigenvalue of (A, B) restricted to the B-free complement of span(C),
/// computed with dense Eigen solvers only.
double dense_constrained_min(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const Eigen::MatrixXd& c) {
  Eigen::MatrixXd z;
  if (c.cols() == 0) {
    z = Eigen::MatrixXd::Identity(a.rows(), a.rows());
  } else {
    Eigen::FullPivHouseholderQR<Eigen::MatrixXd> qr(c);
    const Eigen::MatrixXd q = qr.matrixQ();
    z = q.rightCols(a.rows() - qr.rank());
  }
  const Eigen::MatrixXd az = z.transpose() * a * z, bz = z.transpose() * b * z;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(az, bz);
  return es.eigenvalues()[0];
}

struct BoundState {
  DeltaNls model;
  Field phi;
};

BoundState delta_setup(double p, double g, double w, int n, Sector s) {
  const Field phi = bound_state(p, g, w, default_delta_grid(p, g, w, n), s);
  return {DeltaNls(p, g, phi.disc_ptr()), phi};
}

}  // namespace

TEST(Spectrum, DirichletLaplacianHasTheDiscreteSineSpectrum) {
  const int n = 257;
  const auto disc = Discretization::make(Grid::line_segment(0.0, M_PI, n));
  const double h = disc->h();
  const SparseMat k = kinetic_matrix(*disc), w = mass_matrix(*disc);
  const EigenPairs ep = lowest_eigenpairs(k, w, 5);
  for (int j = 1; j <= 5; ++j) {
    const double s = std::sin(j * h / 2.0);
    const double ref = 4.0 / (h * h) * s * s;
    EXPECT_NEAR(ep.values[j - 1], ref, 1e-10 * ref) << "mode " << j;
  }
  const SpectrumReport rep = spectrum(SparseMat(k - 4.0 * w), w, "full", 4);
  EXPECT_EQ(rep.n_negative, 1);
  EXPECT_EQ(rep.kernel_dim_est, 1);
}

TEST(Spectrum, SparseEigenpairsMatchDenseSolver) {
  const BoundState s = delta_setup(3.0, 1.0, -1.0, 401, Sector::full);
  const Hessian hs = s.model.hessian(-1.0, s.phi);
  const SparseMat wb = mass_blocks(s.model);
  const EigenPairs ep = lowest_eigenpairs(hs.re, wb, 4);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(hs.re), Eigen::MatrixXd(wb));
  for (int j = 0; j < 4; ++j)
    EXPECT_NEAR(ep.values[j], es.eigenvalues()[j], 1e-9 * (1.0 + std::abs(es.eigenvalues()[j])));
}

TEST(Spectrum, NegativeCountIsStableUnderRefinement) {
  for (int n : {801, 1601}) {
    const SparseMat l = operator_L(3.0, 1.0, -2.0, default_delta_grid(3.0, 1.0, -2.0, n), Sector::even);
    const auto disc = Discretization::make(default_delta_grid(3.0, 1.0, -2.0, n), Sector::even);
    const SpectrumReport rep = spectrum(l, mass_matrix(*disc), "even", 3);
    EXPECT_EQ(rep.n_negative, 1) << "n=" << n;
    EXPECT_EQ(rep.kernel_dim_est, 0) << "n=" << n;
  }
}

TEST(ConstrainedMinimum, MatchesDenseProjection) {
  const double w = -2.0;
  const BoundState s = delta_setup(6.0, 1.0, w, 401, Sector::even);
  const ChargeConstrainedMin r = charge_constrained_minimizer(s.model, w, s.phi);
  const Hessian hs = s.model.hessian(w, s.phi);
  const Eigen::MatrixXd wb = Eigen::MatrixXd(mass_blocks(s.model));
  // (phi, w)_H = 0 constrains the real part only
  const Eigen::MatrixXd c = wb * s.phi.real();
  const double re = dense_constrained_min(Eigen::MatrixXd(hs.re), wb, c);
  const double im = dense_constrained_min(Eigen::MatrixXd(hs.im), wb, Eigen::MatrixXd(c.rows(), 0));
  EXPECT_NEAR(r.lambda, std::min(re, im), 1e-8 * std::abs(r.lambda));
  EXPECT_TRUE(r.negative);
  EXPECT_LT(r.residual_rel, 1e-8);
  EXPECT_LT(h_cosine(r.psi, s.phi), 1e-10);
  EXPECT_NEAR(norm_h(r.psi), 1.0, 1e-12);
}

TEST(ConstrainedMinimum, StableCaseHasNoNegativeDirection) {
  // d'' > 0: the form is nonnegative on the H-complement of phi, with J phi as the null direction
  const double w = -2.0;
  const BoundState s = delta_setup(2.0, 1.0, w, 801, Sector::even);
  const ChargeConstrainedMin r = charge_constrained_minimizer(s.model, w, s.phi);
  EXPECT_GT(r.lambda, -1e-8);
  EXPECT_LT(std::abs(r.lambda), 1e-6);
  EXPECT_GT(h_cosine(r.psi, apply_J(s.model, s.phi)), 0.999);
}

TEST(ConditionA3, MinimumMatchesDenseProjectionInTheXNorm) {
  const double w = -2.0;
  const BoundState s = delta_setup(6.0, 1.0, w, 401, Sector::even);
  const Field psi = charge_constrained_minimizer(s.model, w, s.phi).psi;
  const ConditionReport a3 = check_A3(s.model, w, s.phi, psi);
  const Hessian hs = s.model.hessian(w, s.phi);
  const Eigen::MatrixXd wb = Eigen::MatrixXd(mass_blocks(s.model));
  const Eigen::MatrixXd gx = Eigen::MatrixXd(s.model.x_gram());
  Eigen::MatrixXd cre(wb.rows(), 2);
  cre.col(0) = wb * s.phi.real();
  cre.col(1) = wb * psi.real();
  const Eigen::MatrixXd cim = wb * s.phi.real();  // J phi = i phi
  const double ref = std::min(dense_constrained_min(Eigen::MatrixXd(hs.re), gx, cre),
                              dense_constrained_min(Eigen::MatrixXd(hs.im), gx, cim));
  EXPECT_NEAR(a3.scalars.at("k0_estimate"), ref, 1e-8 * std::abs(ref));
  EXPECT_TRUE(a3.holds);
}

TEST(ConditionA1, HoldsOnlyAtTheBoundState) {
  const double w = -1.0;
  const BoundState s = delta_setup(3.0, 1.0, w, 801, Sector::full);
  EXPECT_TRUE(check_A1(s.model, w, s.phi).holds);
  EXPECT_FALSE(check_A1(s.model, w, 1.01 * s.phi).holds);
  EXPECT_FALSE(check_A1(s.model, w, s.phi.zeros_like()).holds);
}

TEST(ConditionA2, RejectsNonOrthogonalDirections) {
  const double w = -2.0;
  const BoundState s = delta_setup(6.0, 1.0, w, 801, Sector::even);
  EXPECT_THROW(check_A2a(s.model, w, s.phi, s.phi), PreconditionError);
  EXPECT_THROW(check_A2a(s.model, w, s.phi, apply_J(s.model, s.phi)), PreconditionError);
  EXPECT_THROW(check_A2a(s.model, w, s.phi, s.phi.zeros_like()), PreconditionError);
  const Field psi = charge_constrained_minimizer(s.model, w, s.phi).psi;
  const ConditionReport a2 = check_A2a(s.model, w, s.phi, psi);
  EXPECT_TRUE(a2.holds);
  EXPECT_LT(a2.scalars.at("form_value"), 0.0);
}

TEST(ConditionB2, EvenSectorHasOneNegativeDirection) {
  const double w = -2.0;
  const BoundState s = delta_setup(6.0, 1.0, w, 801, Sector::even);
  const ConditionReport b = check_B2(s.model, w, s.phi, B2Variant::a);
  EXPECT_TRUE(b.holds);
  EXPECT_EQ(b.scalars.at("n_negative"), 1.0);
  EXPECT_EQ(b.scalars.at("kernel_dim"), 1.0);
}

TEST(ConditionB2, RepulsivePointInteractionAddsAnOddNegativeDirection) {
  const double w = -2.0;
  const BoundState s = delta_setup(2.0, 1.0, w, 801, Sector::full);
  const ConditionReport b = check_B2(s.model, w, s.phi, B2Variant::b);
  EXPECT_TRUE(b.holds);
  EXPECT_GT(b.scalars.at("chi1_odd_fraction"), 1.0 - 1e-8);
  EXPECT_FALSE(check_B2(s.model, w, s.phi, B2Variant::a).holds);
}

TEST(ConditionB3, CoercivityConstantIsPositive) {
  const double w = -1.0;
  const BoundState s = delta_setup(3.0, 1.0, w, 801, Sector::full);
  const ConditionReport b = check_B3(s.model, w, s.phi, 16, 5);
  EXPECT_TRUE(b.holds);
  EXPECT_GT(b.scalars.at("C1"), 0.0);
}

TEST(HessianEigen, MergesBlocksInAscendingOrder) {
  const double w = -1.0;
  const BoundState s = delta_setup(3.0, 1.0, w, 801, Sector::even);
  const auto ev = hessian_eigen(s.model, w, s.phi, 4);
  ASSERT_EQ(ev.size(), 4u);
  for (std::size_t k = 1; k < ev.size(); ++k) EXPECT_LE(ev[k - 1].value, ev[k].value);
  for (const auto& e : ev) EXPECT_NEAR(norm_h(e.vector), 1.0, 1e-12);
  // M phi = 0: one eigenvalue is a kernel, carried by the imaginary block along phi
  bool found = false;
  for (const auto& e : ev)
    if (std::abs(e.value) < 1e-6 && h_cosine(e.vector, apply_J(s.model, s.phi)) > 0.999) found = true;
  EXPECT_TRUE(found);
}
