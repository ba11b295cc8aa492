#include <doctest.h>

#include <cmath>
#include <random>

#include "hotspot/basis.hpp"

using namespace hotspot;

namespace {

// Reference Cox-de Boor recursion, written the slow recursive way so it
// stays independent of the production evaluation.
double bspline_ref(const std::vector<double>& t, int i, int k, double x) {
  if (k == 1) {
    const bool last = (static_cast<size_t>(i + 1) == t.size() - 1) ||
                      (t[i + 1] == t.back() && x == t.back());
    return (x >= t[i] && (x < t[i + 1] || (last && x <= t[i + 1]))) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  if (t[i + k - 1] > t[i]) left = (x - t[i]) / (t[i + k - 1] - t[i]) * bspline_ref(t, i, k - 1, x);
  if (t[i + k] > t[i + 1])
    right = (t[i + k] - x) / (t[i + k] - t[i + 1]) * bspline_ref(t, i + 1, k - 1, x);
  return left + right;
}

Matrix bspline_oracle(int n_points, const std::vector<double>& knots, int order) {
  std::vector<double> t;
  for (int r = 0; r < order; ++r) t.push_back(knots.front());
  for (size_t i = 1; i + 1 < knots.size(); ++i) t.push_back(knots[i]);
  for (int r = 0; r < order; ++r) t.push_back(knots.back());
  const int n_basis = static_cast<int>(knots.size()) + order - 2;
  Matrix out(n_points, n_basis);
  for (int g = 0; g < n_points; ++g) {
    const double x =
        knots.front() + (knots.back() - knots.front()) * static_cast<double>(g) / (n_points - 1);
    for (int b = 0; b < n_basis; ++b) out(g, b) = bspline_ref(t, b, order, x);
  }
  return out;
}

std::vector<double> equally_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("order-1 spline over a single interval is the constant one") {
  const Matrix b = bspline_basis(3, {0.0, 1.0}, 1);
  CHECK(b.rows() == 3);
  CHECK(b.cols() == 1);
  for (int i = 0; i < 3; ++i) CHECK(b(i, 0) == doctest::Approx(1.0));
}

TEST_CASE("spline rows are a nonnegative partition of unity") {
  for (int order : {1, 2, 3, 4}) {
    const Matrix b = bspline_basis(23, equally_spaced(1.0, 50.0, 8), order);
    CHECK(b.cols() == 8 + order - 2);
    for (int i = 0; i < b.rows(); ++i) {
      CHECK(b.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(b.row(i).minCoeff() >= 0.0);
      int nonzeros = 0;
      for (int j = 0; j < b.cols(); ++j) nonzeros += b(i, j) != 0.0;
      CHECK(nonzeros <= order + 1);
    }
  }
}

TEST_CASE("cubic spline matches the reference recursion on the 49-point grid") {
  const std::vector<double> knots = equally_spaced(1.0, 50.0, 8);  // {1, 8, ..., 50}
  CHECK(knots[1] == doctest::Approx(8.0));
  const Matrix fast = bspline_basis(49, knots, 4);
  const Matrix slow = bspline_oracle(49, knots, 4);
  CHECK((fast - slow).lpNorm<Eigen::Infinity>() < 1e-10);
}

TEST_CASE("spline validation errors") {
  CHECK_THROWS_AS(bspline_basis(3, {0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(bspline_basis(3, {0.0, 0.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(bspline_basis(3, {1.0, 0.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(bspline_basis(1, {0.0, 1.0}, 2), std::invalid_argument);
  CHECK_THROWS_AS(bspline_basis(3, {0.0, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("identity basis") {
  CHECK(identity_basis(1)(0, 0) == 1.0);
  CHECK(identity_basis(3).isIdentity(0.0));
  CHECK(kron(identity_basis(2), identity_basis(4)).isIdentity(0.0));
  CHECK_THROWS_AS(identity_basis(0), std::invalid_argument);
}

TEST_CASE("default basis set for the 49x10x26 shape") {
  const BasisSet set = default_basis_set({49, 10, 26});
  CHECK(set.b_m1.rows() == 49);
  CHECK(set.b_m1.cols() == 10);  // 8 knots, cubic
  CHECK(set.b_m2.rows() == 10);
  CHECK(set.b_m2.cols() == 9);  // 7 knots, cubic
  CHECK(set.b_m3.rows() == 26);
  CHECK(set.b_m3.cols() == 9);
  CHECK(set.z_is_identity);
  CHECK(set.z.rows() == 12740);
  CHECK(set.z.cols() == 12740);
  CHECK(Matrix(set.z).isIdentity(0.0));
  // mode-2/3 knots are {1, 9.1667, 17.3333, ..., 50}
  const auto knots = default_knots({49, 10, 26}, 2, 4);
  CHECK(knots.size() == 7);
  CHECK(knots[1] == doctest::Approx(9.1667).epsilon(1e-4));
}

TEST_CASE("default basis set for tiny dims keeps p <= n and identity Z") {
  const BasisSet set = default_basis_set({2, 2, 2});
  CHECK(set.p() <= set.n());
  CHECK(set.z_is_identity);
  CHECK(set.z.rows() == 8);
  CHECK(Matrix(set.z).isIdentity(0.0));
}

TEST_CASE("column counts follow the knot arithmetic") {
  for (Dims dims : {Dims{12, 6, 20}, Dims{30, 4, 9}, Dims{5, 3, 7}}) {
    const BasisSet set = default_basis_set(dims);
    long expected = 1;
    for (int mode = 1; mode <= 3; ++mode) {
      const int order = std::max(1, std::min(4, dims[mode] - 1));
      expected *= static_cast<long>(default_knots(dims, mode, 4).size()) + order - 2;
    }
    CHECK(set.p() == expected);
    CHECK(set.p() <= set.n());
  }
}

TEST_CASE("cached X equals the dense Kronecker product") {
  std::mt19937_64 rng(5);
  const BasisSet set = default_basis_set({5, 4, 6});
  const Matrix dense = kron(kron(set.b_m1, set.b_m2), set.b_m3);
  CHECK((Matrix(set.x) - dense).lpNorm<Eigen::Infinity>() < 1e-12);
  const Matrix dense_z = kron(kron(set.b_h1, set.b_h2), set.b_h3);
  CHECK((Matrix(set.z) - dense_z).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("make_basis_set rejects an over-complete smooth basis") {
  const Matrix big = Matrix::Ones(2, 3);
  const Matrix id = identity_basis(2);
  CHECK_THROWS_AS(make_basis_set({2, 2, 2}, big, big, big, id, id, id),
                  std::invalid_argument);
}
