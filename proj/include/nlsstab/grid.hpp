#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nlsstab/errors.hpp"

namespace nlsstab {

using cplx = std::complex<double>;
using SparseMat = Eigen::SparseMatrix<double>;

enum class GridKind { line_segment, full_line, radial };

/// Symmetry sector of a full-line grid.  Radial and segment grids are always `full`.
enum class Sector { full, even, odd };

inline std::string to_string(Sector s) {
  switch (s) {
    case Sector::full: return "full";
    case Sector::even: return "even";
    case Sector::odd: return "odd";
  }
  return "?";
}

inline std::string to_string(GridKind k) {
  switch (k) {
    case GridKind::line_segment: return "line-segment";
    case GridKind::full_line: return "full-line-truncated";
    case GridKind::radial: return "radial";
  }
  return "?";
}

/// Uniform 1D grid. Endpoints carry homogeneous Dirichlet data, except r = 0 on radial grids.
struct Grid {
  GridKind kind = GridKind::full_line;
  double left = -1.0;
  double right = 1.0;
  int n_points = 0;
  int dim = 1;

  double spacing() const { return (right - left) / (n_points - 1); }

  static Grid line_segment(double a, double b, int n) {
    Grid g{GridKind::line_segment, a, b, n, 1};
    g.validate();
    return g;
  }

  /// [-half_width, half_width]; n must be odd so that x = 0 is a node.
  static Grid full_line(double half_width, int n) {
    Grid g{GridKind::full_line, -half_width, half_width, n, 1};
    g.validate();
    return g;
  }

  /// [0, radius] in r with measure r^(dim-1) dr (twice dx on the line when dim = 1).
  static Grid radial(double radius, int n, int dim) {
    Grid g{GridKind::radial, 0.0, radius, n, dim};
    g.validate();
    return g;
  }

  void validate() const {
    if (n_points < 16) throw DomainError("grid needs n_points >= 16");
    if (!(right > left)) throw DomainError("grid needs right > left");
    if (kind == GridKind::full_line) {
      if (n_points % 2 == 0) throw DomainError("full-line grid needs odd n_points");
      if (std::abs(left + right) > 1e-14 * (right - left))
        throw DomainError("full-line grid must be symmetric about 0");
    }
    if (kind == GridKind::radial) {
      if (left != 0.0) throw DomainError("radial grid must start at r = 0");
      if (dim != 1 && dim != 3) throw DomainError("radial grid supports dim 1 or 3");
    }
  }

  bool operator==(const Grid& o) const {
    return kind == o.kind && left == o.left && right == o.right && n_points == o.n_points &&
           dim == o.dim;
  }
};

/// Unknowns, quadrature weights and the kinetic form of a grid restricted to a sector.
///
/// The kinetic form satisfies  (1/2) int |u'|^2  ~  (1/2) u^T K u  with K tridiagonal, and the
/// H inner product is  sum_j w_j Re(u_j conj(v_j)).  Fields are represented in the same
/// weighted pairing, so the H Riesz map is the identity on field values.
class Discretization {
 public:
  static std::shared_ptr<const Discretization> make(const Grid& grid, Sector sector = Sector::full) {
    return std::shared_ptr<const Discretization>(new Discretization(grid, sector));
  }

  const Grid& grid() const { return grid_; }
  Sector sector() const { return sector_; }
  Eigen::Index size() const { return x_.size(); }
  double h() const { return grid_.spacing(); }
  const Eigen::VectorXd& x() const { return x_; }
  const Eigen::VectorXd& weights() const { return w_; }
  const Eigen::VectorXd& kinetic_diag() const { return kdiag_; }
  const Eigen::VectorXd& kinetic_off() const { return koff_; }
  /// Unknown index sitting at x = 0, when that node is an unknown.
  std::optional<Eigen::Index> origin() const { return origin_; }
  /// Grid node index for each unknown.
  const std::vector<long>& nodes() const { return node_; }

  bool same_as(const Discretization& o) const { return grid_ == o.grid_ && sector_ == o.sector_; }

 private:
  Discretization(const Grid& grid, Sector sector) : grid_(grid), sector_(sector) {
    grid_.validate();
    const int n = grid_.n_points;
    const double h = grid_.spacing();
    if (sector != Sector::full && grid_.kind != GridKind::full_line)
      throw DomainError("symmetry sectors exist only on full-line grids");

    std::vector<double> edge;  // coupling coefficients between consecutive unknowns
    double left_dirichlet = 0.0, right_dirichlet = 0.0;

    switch (grid_.kind) {
      case GridKind::line_segment:
      case GridKind::full_line: {
        if (sector == Sector::full) {
          for (int k = 1; k <= n - 2; ++k) node_.push_back(k);
          x_.resize(n - 2);
          w_ = Eigen::VectorXd::Constant(n - 2, h);
          for (int k = 0; k < n - 2; ++k) x_[k] = grid_.left + (k + 1) * h;
          edge.assign(n - 3, 1.0 / h);
          left_dirichlet = right_dirichlet = 1.0 / h;
          if (grid_.kind == GridKind::full_line) origin_ = (n - 1) / 2 - 1;
        } else {
          const int c = (n - 1) / 2;
          const int m = c;  // nodes 0..m-1 on the half line are unknowns
          if (sector == Sector::even) {
            for (int j = 0; j < m; ++j) node_.push_back(c + j);
            x_.resize(m);
            w_.resize(m);
            for (int j = 0; j < m; ++j) {
              x_[j] = j * h;
              w_[j] = j == 0 ? h : 2.0 * h;
            }
            edge.assign(m - 1, 2.0 / h);
            right_dirichlet = 2.0 / h;
            origin_ = 0;
          } else {
            for (int j = 1; j < m; ++j) node_.push_back(c + j);
            x_.resize(m - 1);
            w_ = Eigen::VectorXd::Constant(m - 1, 2.0 * h);
            for (int j = 1; j < m; ++j) x_[j - 1] = j * h;
            edge.assign(m - 2, 2.0 / h);
            left_dirichlet = 2.0 / h;  // u(0) = 0 for odd fields
            right_dirichlet = 2.0 / h;
          }
        }
        break;
      }
      case GridKind::radial: {
        const int m = n - 1;
        x_.resize(m);
        w_.resize(m);
        for (int j = 0; j < m; ++j) {
          node_.push_back(j);
          x_[j] = j * h;
        }
        if (grid_.dim == 1) {
          for (int j = 0; j < m; ++j) w_[j] = j == 0 ? h : 2.0 * h;
          edge.assign(m - 1, 2.0 / h);
          right_dirichlet = 2.0 / h;
        } else {
          // finite-volume cells [r_j - h/2, r_j + h/2] with measure r^2 dr
          for (int j = 0; j < m; ++j)
            w_[j] = j == 0 ? h * h * h / 24.0 : h * (x_[j] * x_[j] + h * h / 12.0);
          edge.resize(m - 1);
          for (int j = 0; j + 1 < m; ++j) {
            const double rm = (j + 0.5) * h;
            edge[j] = rm * rm / h;
          }
          const double rb = (m - 0.5) * h;
          right_dirichlet = rb * rb / h;
        }
        origin_ = 0;
        break;
      }
    }

    const Eigen::Index m = x_.size();
    kdiag_ = Eigen::VectorXd::Zero(m);
    koff_ = Eigen::VectorXd::Zero(m > 0 ? m - 1 : 0);
    for (Eigen::Index j = 0; j + 1 < m; ++j) {
      kdiag_[j] += edge[j];
      kdiag_[j + 1] += edge[j];
      koff_[j] = -edge[j];
    }
    kdiag_[0] += left_dirichlet;
    kdiag_[m - 1] += right_dirichlet;
  }

  Grid grid_;
  Sector sector_;
  Eigen::VectorXd x_, w_, kdiag_, koff_;
  std::optional<Eigen::Index> origin_;
  std::vector<long> node_;
};

using DiscPtr = std::shared_ptr<const Discretization>;

// ---------------------------------------------------------------------------------------------
// Sparse helpers

inline SparseMat sparse_tridiag(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
  const Eigen::Index n = diag.size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(3 * n);
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, diag[i]);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    t.emplace_back(i, i + 1, off[i]);
    t.emplace_back(i + 1, i, off[i]);
  }
  SparseMat m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SparseMat sparse_diag(const Eigen::VectorXd& d) {
  SparseMat m(d.size(), d.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index i = 0; i < d.size(); ++i) t.emplace_back(i, i, d[i]);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

/// [[a, b], [b^T, c]] assembled from n x n blocks; pass an empty b for a block diagonal.
inline SparseMat sparse_block2(const SparseMat& a, const SparseMat& b, const SparseMat& c) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Triplet<double>> t;
  auto add = [&](const SparseMat& m, Eigen::Index r0, Eigen::Index c0, bool transpose) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (SparseMat::InnerIterator it(m, k); it; ++it) {
        if (transpose)
          t.emplace_back(it.col() + r0, it.row() + c0, it.value());
        else
          t.emplace_back(it.row() + r0, it.col() + c0, it.value());
      }
  };
  add(a, 0, 0, false);
  add(c, n, n, false);
  if (b.nonZeros() > 0) {
    add(b, 0, n, false);
    add(b, n, 0, true);
  }
  SparseMat m(2 * n, 2 * n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

inline SparseMat kinetic_matrix(const Discretization& d) {
  return sparse_tridiag(d.kinetic_diag(), d.kinetic_off());
}

inline SparseMat mass_matrix(const Discretization& d) { return sparse_diag(d.weights()); }

// ---------------------------------------------------------------------------------------------
// Fields

/// Complex samples of a (possibly multi-component) function on the unknowns of a discretization.
/// Components are stacked: [u_1; u_2; ...].
class Field {
 public:
  Field() = default;
  explicit Field(DiscPtr disc, int components = 1)
      : disc_(std::move(disc)), comps_(components),
        values_(Eigen::VectorXcd::Zero(disc_->size() * components)) {}
  Field(DiscPtr disc, Eigen::VectorXcd values, int components = 1)
      : disc_(std::move(disc)), comps_(components), values_(std::move(values)) {
    if (values_.size() != disc_->size() * comps_)
      throw DimensionError("field length " + std::to_string(values_.size()) +
                           " does not match grid size x components");
  }

  static Field from_real(DiscPtr disc, const Eigen::VectorXd& re, int components = 1) {
    return Field(std::move(disc), re.cast<cplx>(), components);
  }

  const DiscPtr& disc_ptr() const { return disc_; }
  const Discretization& disc() const { return *disc_; }
  int components() const { return comps_; }
  Eigen::Index nodes() const { return disc_->size(); }
  const Eigen::VectorXcd& values() const { return values_; }
  Eigen::VectorXcd& values() { return values_; }

  auto component(int c) const { return values_.segment(c * nodes(), nodes()); }
  auto component(int c) { return values_.segment(c * nodes(), nodes()); }

  Eigen::VectorXd real() const { return values_.real(); }
  Eigen::VectorXd imag() const { return values_.imag(); }

  bool compatible(const Field& o) const {
    return disc_ && o.disc_ && comps_ == o.comps_ &&
           (disc_ == o.disc_ || disc_->same_as(*o.disc_));
  }

  Field& operator+=(const Field& o) {
    require(o);
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    require(o);
    values_ -= o.values_;
    return *this;
  }
  Field& operator*=(cplx a) {
    values_ *= a;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx s, Field a) { return a *= s; }
  friend Field operator*(double s, Field a) { return a *= cplx(s, 0.0); }
  Field operator-() const { return Field(disc_, -values_, comps_); }

  Field with_values(Eigen::VectorXcd v) const { return Field(disc_, std::move(v), comps_); }
  Field zeros_like() const { return Field(disc_, comps_); }

  void require(const Field& o) const {
    if (!compatible(o)) throw DimensionError("fields live on different grids");
  }

 private:
  DiscPtr disc_;
  int comps_ = 1;
  Eigen::VectorXcd values_;
};

/// (u, v)_H = sum_c sum_j w_j Re(u_cj conj(v_cj)).
inline double inner_h(const Field& u, const Field& v) {
  u.require(v);
  const auto& w = u.disc().weights();
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto a = u.component(c);
    const auto b = v.component(c);
    for (Eigen::Index j = 0; j < w.size(); ++j) s += w[j] * (a[j] * std::conj(b[j])).real();
  }
  return s;
}

/// Complex pairing sum_c sum_j w_j conj(u_cj) v_cj.
inline cplx inner_hc(const Field& u, const Field& v) {
  u.require(v);
  const auto& w = u.disc().weights();
  cplx s = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto a = u.component(c);
    const auto b = v.component(c);
    for (Eigen::Index j = 0; j < w.size(); ++j) s += w[j] * std::conj(a[j]) * b[j];
  }
  return s;
}

inline double norm_h(const Field& u) { return std::sqrt(inner_h(u, u)); }

/// y = A x for a symmetric tridiagonal A given by (diag, off).
template <class Vec>
Vec tridiag_apply(const Eigen::VectorXd& diag, const Eigen::VectorXd& off, const Vec& x) {
  const Eigen::Index n = diag.size();
  Vec y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
  return y;
}

/// Values of one component at every node of the underlying grid; sectors are extended by parity
/// and Dirichlet nodes are zero.
inline Eigen::VectorXcd nodal_values(const Field& f, int comp = 0) {
  const Discretization& d = f.disc();
  const long n = d.grid().n_points;
  Eigen::VectorXcd nodal = Eigen::VectorXcd::Zero(n);
  const auto v = f.component(comp);
  for (std::size_t j = 0; j < d.nodes().size(); ++j) nodal[d.nodes()[j]] = v[j];
  if (d.sector() == Sector::even || d.sector() == Sector::odd) {
    const long c = (n - 1) / 2;
    const double sign = d.sector() == Sector::even ? 1.0 : -1.0;
    for (long k = 1; k <= c; ++k) nodal[c - k] = sign * nodal[c + k];
  }
  return nodal;
}

/// Samples node values onto the unknowns of `target` without any symmetrization.
inline Eigen::VectorXcd pick_nodes(const Discretization& target, const Eigen::VectorXcd& nodal) {
  if (nodal.size() != target.grid().n_points) throw DimensionError("nodal vector length");
  Eigen::VectorXcd out(target.size());
  for (std::size_t j = 0; j < target.nodes().size(); ++j) out[j] = nodal[target.nodes()[j]];
  return out;
}

/// Transfer a field between sectors of the same full-line grid: restriction symmetrizes,
/// extension mirrors with the parity of the source sector.
inline Field to_sector(const Field& f, const DiscPtr& target) {
  const Discretization& src = f.disc();
  if (src.same_as(*target)) return Field(target, f.values(), f.components());
  if (!(src.grid() == target->grid()) || src.grid().kind != GridKind::full_line)
    throw DimensionError("sector transfer needs the same full-line grid");
  const long c = (src.grid().n_points - 1) / 2;
  Field out(target, f.components());
  for (int comp = 0; comp < f.components(); ++comp) {
    const Eigen::VectorXcd nodal = nodal_values(f, comp);
    auto tv = out.component(comp);
    for (std::size_t j = 0; j < target->nodes().size(); ++j) {
      const long k = target->nodes()[j];
      const long mirror = 2 * c - k;
      switch (target->sector()) {
        case Sector::full: tv[j] = nodal[k]; break;
        case Sector::even: tv[j] = 0.5 * (nodal[k] + nodal[mirror]); break;
        case Sector::odd: tv[j] = 0.5 * (nodal[k] - nodal[mirror]); break;
      }
    }
  }
  return out;
}

}  // namespace nlsstab
