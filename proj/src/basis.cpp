#include "hotspot/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hotspot {

namespace {

std::vector<double> clamped_knot_vector(const std::vector<double>& knots, int order) {
  std::vector<double> t;
  t.reserve(knots.size() + 2 * (order - 1));
  for (int r = 0; r < order; ++r) t.push_back(knots.front());
  for (size_t i = 1; i + 1 < knots.size(); ++i) t.push_back(knots[i]);
  for (int r = 0; r < order; ++r) t.push_back(knots.back());
  return t;
}

}  // namespace

Matrix bspline_basis(int n_points, const std::vector<double>& knots, int order) {
  if (n_points < 2) throw std::invalid_argument("bspline_basis: need at least 2 grid points");
  if (order < 1) throw std::invalid_argument("bspline_basis: order must be >= 1");
  if (knots.size() < 2)
    throw std::invalid_argument("bspline_basis: fewer than order+1 effective knots");
  for (size_t i = 1; i < knots.size(); ++i)
    if (!(knots[i] > knots[i - 1]))
      throw std::invalid_argument("bspline_basis: knots must be strictly increasing");

  const std::vector<double> t = clamped_knot_vector(knots, order);
  const int n_basis = static_cast<int>(knots.size()) + order - 2;
  const int last_span = static_cast<int>(t.size()) - order - 1;

  Matrix out = Matrix::Zero(n_points, n_basis);
  std::vector<double> vals(order), left(order), right(order);

  const double lo = knots.front();
  const double hi = knots.back();
  for (int g = 0; g < n_points; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / (n_points - 1);

    // Knot span: largest i with t[i] <= x < t[i+1], right endpoint closed.
    int span = static_cast<int>(std::upper_bound(t.begin(), t.end(), x) - t.begin()) - 1;
    span = std::clamp(span, order - 1, last_span);

    // Cox-de Boor triangular scheme for the `order` nonzero values at x.
    vals[0] = 1.0;
    for (int j = 1; j < order; ++j) {
      left[j] = x - t[span + 1 - j];
      right[j] = t[span + j] - x;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double tmp = vals[r] / (right[r + 1] + left[j - r]);
        vals[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      vals[j] = saved;
    }
    for (int r = 0; r < order; ++r) out(g, span - order + 1 + r) = vals[r];
  }
  return out;
}

Matrix identity_basis(int n) {
  if (n < 1) throw std::invalid_argument("identity_basis: n must be >= 1");
  return Matrix::Identity(n, n);
}

Dims BasisSet::dims() const {
  return Dims{static_cast<int>(b_m1.rows()), static_cast<int>(b_m2.rows()),
              static_cast<int>(b_m3.rows())};
}

SparseMatrix kron3_sparse(const Matrix& a, const Matrix& b, const Matrix& c) {
  using Entry = std::pair<int, double>;
  auto row_entries = [](const Matrix& m) {
    std::vector<std::vector<Entry>> rows(m.rows());
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) rows[i].push_back({static_cast<int>(j), m(i, j)});
    return rows;
  };
  const auto ra = row_entries(a), rb = row_entries(b), rc = row_entries(c);

  std::vector<Eigen::Triplet<double>> trips;
  size_t per_row = 0;
  for (const auto& r : ra) per_row = std::max(per_row, r.size());
  trips.reserve(static_cast<size_t>(a.rows() * b.rows() * c.rows()) * per_row);

  const long pb = b.cols(), pc = c.cols();
  long row = 0;
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < b.rows(); ++j)
      for (long k = 0; k < c.rows(); ++k, ++row)
        for (const auto& [ca, va] : ra[i])
          for (const auto& [cb, vb] : rb[j])
            for (const auto& [cc, vc] : rc[k])
              trips.emplace_back(row, (ca * pb + cb) * pc + cc, va * vb * vc);

  SparseMatrix out(a.rows() * b.rows() * c.rows(), a.cols() * b.cols() * c.cols());
  out.setFromTriplets(trips.begin(), trips.end());
  out.makeCompressed();
  return out;
}

BasisSet make_basis_set(Dims dims, Matrix b_m1, Matrix b_m2, Matrix b_m3, Matrix b_h1,
                        Matrix b_h2, Matrix b_h3) {
  auto check_rows = [&](const Matrix& m, int mode, const char* which) {
    if (m.rows() != dims[mode])
      throw std::invalid_argument(std::string("basis ") + which + std::to_string(mode) +
                                  " has " + std::to_string(m.rows()) + " rows, expected " +
                                  std::to_string(dims[mode]));
  };
  check_rows(b_m1, 1, "b_m");
  check_rows(b_m2, 2, "b_m");
  check_rows(b_m3, 3, "b_m");
  check_rows(b_h1, 1, "b_h");
  check_rows(b_h2, 2, "b_h");
  check_rows(b_h3, 3, "b_h");

  const long n = dims.size();
  const long p = b_m1.cols() * b_m2.cols() * b_m3.cols();
  const long q = b_h1.cols() * b_h2.cols() * b_h3.cols();
  if (p > n)
    throw std::invalid_argument("smooth basis has p=" + std::to_string(p) + " columns > n=" +
                                std::to_string(n));
  if (q > n)
    throw std::invalid_argument("hot-spot basis has q=" + std::to_string(q) + " columns > n=" +
                                std::to_string(n));

  BasisSet set;
  set.z_is_identity = b_h1.isIdentity(0.0) && b_h2.isIdentity(0.0) && b_h3.isIdentity(0.0);
  set.b_m1 = std::move(b_m1);
  set.b_m2 = std::move(b_m2);
  set.b_m3 = std::move(b_m3);
  set.b_h1 = std::move(b_h1);
  set.b_h2 = std::move(b_h2);
  set.b_h3 = std::move(b_h3);
  set.x = kron3_sparse(set.b_m1, set.b_m2, set.b_m3);
  set.x_row = set.x;
  if (set.z_is_identity) {
    set.z = SparseMatrix(n, n);
    set.z.setIdentity();
  } else {
    set.z = kron3_sparse(set.b_h1, set.b_h2, set.b_h3);
  }
  return set;
}

std::vector<double> default_knots(Dims dims, int mode, int order) {
  auto linspace = [](double lo, double hi, int count) {
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = lo + (hi - lo) * i / (count - 1);
    return v;
  };
  const bool paper_shape = dims == Dims{49, 10, 26};
  if (paper_shape) return linspace(1.0, 50.0, mode == 1 ? 8 : 7);
  // Eight equally spaced knots on the rescaled range, reduced on short
  // modes so the spline space never saturates the axis (p_i < n_i).
  const int n = dims[mode];
  const int eff_order = std::max(1, std::min(order, n - 1));
  const int n_knots = std::clamp(n - eff_order, 2, 8);
  return linspace(1.0, 50.0, n_knots);
}

BasisSet default_basis_set(Dims dims, const BasisConfig& config) {
  if (dims.n1 <= 0 || dims.n2 <= 0 || dims.n3 <= 0)
    throw std::invalid_argument("default_basis_set: dims must be positive");

  auto smooth = [&](int mode) -> Matrix {
    const int n = dims[mode];
    if (config.smooth_identity) return identity_basis(n);
    if (n == 1) return Matrix::Ones(1, 1);
    std::vector<double> knots;
    if (mode == 1 && !config.knots1.empty()) knots = config.knots1;
    else if (mode == 2 && !config.knots2.empty()) knots = config.knots2;
    else if (mode == 3 && !config.knots3.empty()) knots = config.knots3;
    else knots = default_knots(dims, mode, config.spline_order);
    const bool paper_shape = dims == Dims{49, 10, 26};
    const int order = paper_shape ? config.spline_order
                                  : std::max(1, std::min(config.spline_order, n - 1));
    return bspline_basis(n, knots, order);
  };
  auto hot = [&](int mode) -> Matrix {
    if (config.hotspot_identity) return identity_basis(dims[mode]);
    return smooth(mode);
  };

  return make_basis_set(dims, smooth(1), smooth(2), smooth(3), hot(1), hot(2), hot(3));
}

}  // namespace hotspot
