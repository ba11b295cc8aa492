#include <doctest.h>

#include <random>

#include "hotspot/tensor.hpp"

using namespace hotspot;

namespace {

Tensor3 random_tensor(Dims d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Tensor3 t(d);
  for (auto& v : t.values()) v = normal(rng);
  return t;
}

Matrix random_matrix(long rows, long cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

// Brute-force oracle: unfold along `mode` with explicit index arithmetic,
// multiply densely, refold. Kept independent of the library's layout
// tricks.
Tensor3 mode_product_oracle(const Tensor3& t, const Matrix& m, int mode) {
  const Dims d = t.dims();
  Dims out_dims = d;
  if (mode == 1) out_dims.n1 = static_cast<int>(m.rows());
  if (mode == 2) out_dims.n2 = static_cast<int>(m.rows());
  if (mode == 3) out_dims.n3 = static_cast<int>(m.rows());
  Tensor3 out(out_dims);
  for (int i = 0; i < out_dims.n1; ++i)
    for (int j = 0; j < out_dims.n2; ++j)
      for (int k = 0; k < out_dims.n3; ++k) {
        double sum = 0.0;
        if (mode == 1)
          for (int s = 0; s < d.n1; ++s) sum += m(i, s) * t(s, j, k);
        if (mode == 2)
          for (int s = 0; s < d.n2; ++s) sum += m(j, s) * t(i, s, k);
        if (mode == 3)
          for (int s = 0; s < d.n3; ++s) sum += m(k, s) * t(i, j, s);
        out(i, j, k) = sum;
      }
  return out;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  REQUIRE(a.dims() == b.dims());
  double worst = 0.0;
  for (size_t i = 0; i < a.values().size(); ++i)
    worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
  return worst;
}

}  // namespace

TEST_CASE("mode product with identity leaves the tensor unchanged") {
  std::mt19937_64 rng(7);
  const Tensor3 t = random_tensor({2, 2, 2}, rng);
  for (int mode = 1; mode <= 3; ++mode)
    CHECK(max_abs_diff(mode_n_product(t, Matrix::Identity(2, 2), mode), t) == 0.0);
}

TEST_CASE("mode-1 product with a row of ones sums the first axis") {
  Tensor3 t(Dims{2, 3, 4});
  for (auto& v : t.values()) v = 1.0;
  const Tensor3 out = mode_n_product(t, Matrix::Ones(1, 2), 1);
  CHECK(out.dims() == Dims{1, 3, 4});
  for (double v : out.values()) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("mode products match the unfolding oracle") {
  std::mt19937_64 rng(13);
  const Tensor3 t = random_tensor({3, 2, 2}, rng);
  const Matrix m = random_matrix(4, 3, rng);
  CHECK(max_abs_diff(mode_n_product(t, m, 1), mode_product_oracle(t, m, 1)) < 1e-12);

  const Tensor3 t2 = random_tensor({2, 3, 5}, rng);
  const Matrix m2 = random_matrix(4, 3, rng);
  CHECK(max_abs_diff(mode_n_product(t2, m2, 2), mode_product_oracle(t2, m2, 2)) < 1e-12);
  const Matrix m3 = random_matrix(2, 5, rng);
  CHECK(max_abs_diff(mode_n_product(t2, m3, 3), mode_product_oracle(t2, m3, 3)) < 1e-12);
}

TEST_CASE("mode product rejects mismatched dimensions") {
  Tensor3 t(Dims{2, 2, 2});
  CHECK_THROWS_WITH_AS(mode_n_product(t, Matrix::Identity(3, 3), 1),
                       doctest::Contains("axis 1"), std::invalid_argument);
}

TEST_CASE("mode products along distinct modes commute") {
  std::mt19937_64 rng(17);
  const Tensor3 t = random_tensor({3, 4, 2}, rng);
  const Matrix a = random_matrix(2, 3, rng);
  const Matrix b = random_matrix(5, 4, rng);
  const Tensor3 ab = mode_n_product(mode_n_product(t, a, 1), b, 2);
  const Tensor3 ba = mode_n_product(mode_n_product(t, b, 2), a, 1);
  CHECK(max_abs_diff(ab, ba) < 1e-12);
}

TEST_CASE("vectorize uses the last-index-fastest convention") {
  Tensor3 t(Dims{1, 1, 1});
  t(0, 0, 0) = 5.0;
  CHECK(vectorize(t)(0) == 5.0);

  Tensor3 s(Dims{2, 1, 2});
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) s(i, 0, k) = 10.0 * (i + 1) + (k + 1);
  const Vector v = vectorize(s);
  CHECK(v(0) == 11.0);
  CHECK(v(1) == 12.0);
  CHECK(v(2) == 21.0);
  CHECK(v(3) == 22.0);
}

TEST_CASE("refold inverts vectorize") {
  std::mt19937_64 rng(23);
  const Tensor3 t = random_tensor({2, 3, 2}, rng);
  CHECK(max_abs_diff(refold(vectorize(t), t.dims()), t) == 0.0);
  CHECK_THROWS_AS(refold(Vector::Zero(5), Dims{2, 2, 2}), std::invalid_argument);
}

TEST_CASE("kron basics") {
  CHECK(kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)).isIdentity(0.0));

  std::mt19937_64 rng(29);
  const Matrix b = random_matrix(3, 2, rng);
  Matrix two(1, 1);
  two << 2.0;
  CHECK((kron(two, b) - 2.0 * b).norm() == 0.0);

  const Matrix a = random_matrix(2, 2, rng);
  const Matrix k = kron(a, b);
  for (int i = 0; i < k.rows(); ++i)
    for (int j = 0; j < k.cols(); ++j) {
      const double expected = a(i / 3, j / 2) * b(i % 3, j % 2);
      CHECK(k(i, j) == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("tucker reconstruction: identity and zero cases") {
  std::mt19937_64 rng(31);
  const Tensor3 core = random_tensor({2, 2, 2}, rng);
  const Tensor3 same = tucker_reconstruct(core, Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                                          Matrix::Identity(2, 2));
  CHECK(max_abs_diff(same, core) == 0.0);

  Tensor3 zeros(Dims{2, 2, 2});
  const Tensor3 z = tucker_reconstruct(zeros, random_matrix(3, 2, rng), random_matrix(3, 2, rng),
                                       random_matrix(3, 2, rng));
  for (double v : z.values()) CHECK(v == 0.0);
}

TEST_CASE("tucker reconstruction agrees with the Kronecker-vec identity") {
  std::mt19937_64 rng(37);
  const Tensor3 core = random_tensor({2, 2, 2}, rng);
  const Matrix b1 = random_matrix(3, 2, rng);
  const Matrix b2 = random_matrix(3, 2, rng);
  const Matrix b3 = random_matrix(3, 2, rng);
  const Vector direct = vectorize(tucker_reconstruct(core, b1, b2, b3));
  const Vector viakron = kron(kron(b1, b2), b3) * vectorize(core);
  CHECK((direct - viakron).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("frontal slices index the time axis") {
  Tensor3 t(Dims{1, 1, 2});
  t(0, 0, 0) = 3.0;
  t(0, 0, 1) = 4.0;
  CHECK(frontal_slice(t, 0)(0, 0) == 3.0);
  CHECK(frontal_slice(t, 1)(0, 0) == 4.0);
  CHECK_THROWS_AS(frontal_slice(t, 2), std::out_of_range);

  std::mt19937_64 rng(41);
  const Tensor3 r = random_tensor({3, 4, 5}, rng);
  for (int k = 0; k < 5; ++k) {
    const Matrix slice = frontal_slice(r, k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 4; ++j) CHECK(slice(i, j) == r(i, j, k));
  }
}

TEST_CASE("count tensor validation") {
  Tensor3 ok(Dims{1, 1, 2});
  ok(0, 0, 0) = 3.0;
  CHECK_NOTHROW(CountTensor{ok});

  Tensor3 negative(Dims{1, 1, 1});
  negative(0, 0, 0) = -1.0;
  CHECK_THROWS_AS(CountTensor{negative}, std::invalid_argument);

  Tensor3 fractional(Dims{1, 1, 1});
  fractional(0, 0, 0) = 0.5;
  CHECK_THROWS_AS(CountTensor{fractional}, std::invalid_argument);
}
