#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"
#include "nlsstab/grid.hpp"

namespace nlsstab {

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns, normalized to v^T M v = 1
};

namespace detail {

inline bool is_tridiagonal(const SparseMat& a) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it)
      if (std::abs(it.row() - it.col()) > 1 && it.value() != 0.0) return false;
  return true;
}

inline bool is_diagonal(const SparseMat& a) {
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

inline void require_symmetric(const Eigen::MatrixXd& a, const char* name) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale)
    throw PreconditionError(std::string(name) + " is not symmetric (max asymmetry " +
                            std::to_string(asym) + ")");
}

inline void require_symmetric(const SparseMat& a, const char* name) {
  SparseMat d = a - SparseMat(a.transpose());
  double asym = 0.0;
  for (int k = 0; k < d.outerSize(); ++k)
    for (SparseMat::InnerIterator it(d, k); it; ++it) asym = std::max(asym, std::abs(it.value()));
  double scale = 1.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMat::InnerIterator it(a, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (asym > 1e-12 * scale)
    throw PreconditionError(std::string(name) + " is not symmetric (max asymmetry " +
                            std::to_string(asym) + ")");
}

}  // namespace detail

/// Lowest k eigenpairs of the symmetric tridiagonal pencil (T, diag(m)).
inline EigenPairs lowest_eigenpairs_tridiag(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                            const Eigen::VectorXd& mass, int k) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  k = std::min<int>(k, n);
  if ((mass.array() <= 0.0).any()) throw NumericError("mass matrix is not positive definite");
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  Eigen::VectorXd d = diag.cwiseProduct(s).cwiseProduct(s);
  Eigen::VectorXd e(std::max<lapack_int>(n, 1));
  for (lapack_int i = 0; i + 1 < n; ++i) e[i] = off[i] * s[i] * s[i + 1];
  lapack_int m = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max(k, 1)));
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', n, d.data(), e.data(), 0.0,
                                         0.0, 1, k, 0.0, &m, w.data(), z.data(), n, isuppz.data());
  if (info != 0) throw NumericError("dstevr failed with info " + std::to_string(info));
  EigenPairs out;
  out.values = w.head(m);
  out.vectors = s.asDiagonal() * z.leftCols(m);
  return out;
}

/// Lowest k eigenpairs of the dense symmetric-definite pencil (A, B).
inline EigenPairs lowest_eigenpairs_dense(Eigen::MatrixXd a, Eigen::MatrixXd b, int k) {
  const lapack_int n = static_cast<lapack_int>(a.rows());
  k = std::min<int>(k, n);
  lapack_int m = 0;
  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> ifail(n);
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  const lapack_int info =
      LAPACKE_dsygvx(LAPACK_COL_MAJOR, 1, 'V', 'I', 'U', n, a.data(), n, b.data(), n, 0.0, 0.0, 1,
                     k, abstol, &m, w.data(), z.data(), n, ifail.data());
  if (info > n) throw NumericError("mass matrix is not positive definite");
  if (info != 0) throw NumericError("dsygvx failed with info " + std::to_string(info));
  EigenPairs out;
  out.values = w.head(m);
  out.vectors = z.leftCols(m);
  return out;
}

/// Lowest k eigenpairs of A v = lambda M v; uses the tridiagonal kernel when the structure allows.
inline EigenPairs lowest_eigenpairs(const SparseMat& a, const SparseMat& mass, int k) {
  if (a.rows() != a.cols() || mass.rows() != a.rows() || mass.cols() != a.cols())
    throw DimensionError("operator and mass have different shapes");
  detail::require_symmetric(a, "operator");
  detail::require_symmetric(mass, "mass");
  if (detail::is_tridiagonal(a) && detail::is_diagonal(mass)) {
    const Eigen::Index n = a.rows();
    Eigen::VectorXd d(n), e(std::max<Eigen::Index>(n - 1, 0)), m(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = a.coeff(i, i);
      m[i] = mass.coeff(i, i);
      if (i + 1 < n) e[i] = a.coeff(i, i + 1);
    }
    return lowest_eigenpairs_tridiag(d, e, m, k);
  }
  return lowest_eigenpairs_dense(Eigen::MatrixXd(a), Eigen::MatrixXd(mass), k);
}

/// Lowest k eigenpairs of (A, M) restricted to {v : C^T v = 0}.
///
/// The complement basis comes from a Householder QR of C, so the projected pencil stays
/// symmetric-definite and no Gram-Schmidt drift enters.
inline EigenPairs constrained_lowest(const Eigen::MatrixXd& a, const Eigen::MatrixXd& mass,
                                     const Eigen::MatrixXd& c, int k) {
  detail::require_symmetric(a, "operator");
  detail::require_symmetric(mass, "mass");
  const Eigen::Index n = a.rows();
  if (c.cols() == 0) return lowest_eigenpairs_dense(a, mass, k);
  if (c.rows() != n) throw DimensionError("constraint vectors have the wrong length");
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  const Eigen::Index m = c.cols();
  const Eigen::Index r = n - m;
  const auto hh = qr.householderQ();
  Eigen::MatrixXd pa = a;
  pa.applyOnTheLeft(hh.adjoint());
  pa.applyOnTheRight(hh);
  Eigen::MatrixXd pm = mass;
  pm.applyOnTheLeft(hh.adjoint());
  pm.applyOnTheRight(hh);
  Eigen::MatrixXd ra = pa.bottomRightCorner(r, r);
  Eigen::MatrixXd rm = pm.bottomRightCorner(r, r);
  ra = 0.5 * (ra + ra.transpose()).eval();
  rm = 0.5 * (rm + rm.transpose()).eval();
  EigenPairs sub = lowest_eigenpairs_dense(std::move(ra), std::move(rm), k);
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(n, sub.vectors.cols());
  full.bottomRows(r) = sub.vectors;
  full.applyOnTheLeft(hh);
  return {sub.values, full};
}

inline EigenPairs constrained_lowest(const SparseMat& a, const SparseMat& mass,
                                     const Eigen::MatrixXd& c, int k) {
  return constrained_lowest(Eigen::MatrixXd(a), Eigen::MatrixXd(mass), c, k);
}

/// Solves the tridiagonal system (sub = super = off) with partial pivoting.
inline Eigen::VectorXd solve_tridiag(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                     const Eigen::VectorXd& rhs) {
  const lapack_int n = static_cast<lapack_int>(diag.size());
  Eigen::VectorXd d = diag, dl = off, du = off, b = rhs;
  if (n > 1 && off.size() != n - 1) throw DimensionError("tridiagonal off-diagonal length");
  const lapack_int info =
      LAPACKE_dgtsv(LAPACK_COL_MAJOR, n, 1, dl.data(), d.data(), du.data(), b.data(), n);
  if (info != 0) throw NumericError("tridiagonal solve hit a singular pivot");
  return b;
}

/// Pre-factored tridiagonal solver without pivoting, for diagonally dominant complex systems
/// solved many times with the same matrix.
template <class T>
class TridiagFactor {
 public:
  TridiagFactor() = default;
  TridiagFactor(const Eigen::Matrix<T, Eigen::Dynamic, 1>& diag,
                const Eigen::Matrix<T, Eigen::Dynamic, 1>& off)
      : off_(off), inv_(diag.size()), cp_(std::max<Eigen::Index>(diag.size() - 1, 0)) {
    const Eigen::Index n = diag.size();
    T denom = diag[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i > 0) denom = diag[i] - off_[i - 1] * cp_[i - 1];
      if (std::abs(denom) == 0.0) throw NumericError("zero pivot in tridiagonal factorization");
      inv_[i] = T(1) / denom;
      if (i + 1 < n) cp_[i] = off_[i] * inv_[i];
    }
  }

  template <class Vec>
  void solve_in_place(Vec& b) const {
    const Eigen::Index n = inv_.size();
    b[0] *= inv_[0];
    for (Eigen::Index i = 1; i < n; ++i) b[i] = (b[i] - off_[i - 1] * b[i - 1]) * inv_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) b[i] -= cp_[i] * b[i + 1];
  }

 private:
  Eigen::Matrix<T, Eigen::Dynamic, 1> off_, inv_, cp_;
};

/// Stacks real and imaginary parts: [Re v; Im v].
inline Eigen::VectorXd stack_real(const Eigen::VectorXcd& v) {
  Eigen::VectorXd out(2 * v.size());
  out << v.real(), v.imag();
  return out;
}

inline Eigen::VectorXcd unstack_real(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size() / 2;
  Eigen::VectorXcd out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = cplx(v[i], v[n + i]);
  return out;
}

}  // namespace nlsstab
