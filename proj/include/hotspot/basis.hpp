#ifndef HOTSPOT_BASIS_HPP
#define HOTSPOT_BASIS_HPP

#include <vector>

#include <Eigen/Sparse>

#include "hotspot/tensor.hpp"

namespace hotspot {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// B-spline design matrix under the clamped (repeated-endpoint) knot
/// convention. `order` is the classical spline order (degree + 1), so
/// order=4 gives cubic splines and order=1 piecewise constants.
///
/// The evaluation grid is the integer points 1..n_points rescaled linearly
/// onto [knots.front(), knots.back()]. The result has |knots| + order - 2
/// columns; rows are nonnegative and sum to one.
Matrix bspline_basis(int n_points, const std::vector<double>& knots, int order);

Matrix identity_basis(int n);

/// The six fixed factor matrices of the log-rate decomposition plus the
/// cached Kronecker design matrices X (smooth trend) and Z (hot-spots).
/// X and Z are kept sparse; spline rows have at most `order` nonzeros so
/// X has at most order^3 nonzeros per row.
struct BasisSet {
  Matrix b_m1, b_m2, b_m3;  // smooth-trend bases, n_i x p_i
  Matrix b_h1, b_h2, b_h3;  // hot-spot bases, n_i x q_i
  SparseMatrix x;           // kron(b_m1, b_m2, b_m3), n x p
  Eigen::SparseMatrix<double, Eigen::RowMajor> x_row;  // row-major copy of x
  SparseMatrix z;           // kron(b_h1, b_h2, b_h3), n x q
  bool z_is_identity = false;

  Dims dims() const;
  long n() const { return x.rows(); }
  long p() const { return x.cols(); }
  long q() const { return z.cols(); }
};

/// Assembles a BasisSet from factor matrices, validating row counts
/// against `dims` and the p <= n, q <= n invariants.
BasisSet make_basis_set(Dims dims, Matrix b_m1, Matrix b_m2, Matrix b_m3, Matrix b_h1,
                        Matrix b_h2, Matrix b_h3);

/// Sparse Kronecker product of three factor matrices, row (i,j,k) by
/// column (a,b,c) in last-index-fastest order.
SparseMatrix kron3_sparse(const Matrix& a, const Matrix& b, const Matrix& c);

struct BasisConfig {
  int spline_order = 4;  // cubic
  // Optional per-mode knot overrides; empty means the built-in default.
  std::vector<double> knots1, knots2, knots3;
  bool smooth_identity = false;   // use identity bases for the trend
  bool hotspot_identity = true;   // identity hot-spot bases (the default)
};

/// Default construction: cubic B-spline trend bases over knots on [1,50]
/// (the bundled sets for 49x10x26, eight equally spaced knots otherwise,
/// reduced when a mode is too short) and identity hot-spot bases. Each
/// mode's integer grid 1..n_i is rescaled onto [1,50] before evaluation.
BasisSet default_basis_set(Dims dims, const BasisConfig& config = {});

/// Knots used by default_basis_set for the given mode extent.
std::vector<double> default_knots(Dims dims, int mode, int order);

}  // namespace hotspot

#endif  // HOTSPOT_BASIS_HPP
