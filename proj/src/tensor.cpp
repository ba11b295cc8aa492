#include "hotspot/tensor.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hotspot {

int Dims::operator[](int mode) const {
  switch (mode) {
    case 1: return n1;
    case 2: return n2;
    case 3: return n3;
    default: throw std::invalid_argument("tensor mode must be 1, 2 or 3");
  }
}

std::string to_string(const Dims& d) {
  std::ostringstream os;
  os << d.n1 << "x" << d.n2 << "x" << d.n3;
  return os.str();
}

namespace {

void check_dims(const Dims& d) {
  if (d.n1 <= 0 || d.n2 <= 0 || d.n3 <= 0)
    throw std::invalid_argument("tensor dims must be positive, got " + to_string(d));
}

}  // namespace

Tensor3::Tensor3(Dims dims) : dims_(dims) {
  check_dims(dims);
  values_.assign(static_cast<size_t>(dims.size()), 0.0);
}

Tensor3::Tensor3(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
  check_dims(dims);
  if (static_cast<long>(values_.size()) != dims.size())
    throw std::invalid_argument("tensor value count " + std::to_string(values_.size()) +
                                " does not match dims " + to_string(dims));
}

void Tensor3::set_axis_labels(int axis, std::vector<std::string> labels) {
  const int extent = dims_[axis];
  if (static_cast<int>(labels.size()) != extent)
    throw std::invalid_argument("axis " + std::to_string(axis) + " has extent " +
                                std::to_string(extent) + " but got " +
                                std::to_string(labels.size()) + " labels");
  labels_[axis - 1] = std::move(labels);
}

const std::optional<std::vector<std::string>>& Tensor3::axis_labels(int axis) const {
  if (axis < 1 || axis > 3) throw std::invalid_argument("axis must be 1, 2 or 3");
  return labels_[axis - 1];
}

void Tensor3::check_finite(const std::string& what) const {
  for (double v : values_)
    if (!std::isfinite(v)) throw std::invalid_argument(what + " contains a non-finite entry");
}

CountTensor::CountTensor(Tensor3 values) : values_(std::move(values)) {
  values_.check_finite("count tensor");
  for (double v : values_.values()) {
    if (v < 0.0) throw std::invalid_argument("count tensor has a negative entry");
    if (std::abs(v - std::round(v)) > 1e-9)
      throw std::invalid_argument("count tensor has a non-integral entry");
  }
}

Tensor3 mode_n_product(const Tensor3& t, const Matrix& m, int mode) {
  const Dims d = t.dims();
  if (mode < 1 || mode > 3) throw std::invalid_argument("tensor mode must be 1, 2 or 3");
  if (m.cols() != d[mode])
    throw std::invalid_argument("mode-" + std::to_string(mode) + " product: matrix has " +
                                std::to_string(m.cols()) + " columns but tensor axis " +
                                std::to_string(mode) + " has extent " + std::to_string(d[mode]));

  using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>;
  using RowMajorMutable =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

  if (mode == 1) {
    // Unfolding along mode 1 is the natural n1 x (n2*n3) row-major view.
    Tensor3 out(Dims{static_cast<int>(m.rows()), d.n2, d.n3});
    RowMajorMap in(t.values().data(), d.n1, static_cast<long>(d.n2) * d.n3);
    RowMajorMutable dst(out.values().data(), m.rows(), static_cast<long>(d.n2) * d.n3);
    dst.noalias() = m * in;
    return out;
  }
  if (mode == 3) {
    // (n1*n2) x n3 row-major view, contracted on the right.
    Tensor3 out(Dims{d.n1, d.n2, static_cast<int>(m.rows())});
    RowMajorMap in(t.values().data(), static_cast<long>(d.n1) * d.n2, d.n3);
    RowMajorMutable dst(out.values().data(), static_cast<long>(d.n1) * d.n2, m.rows());
    dst.noalias() = in * m.transpose();
    return out;
  }
  // mode == 2: contract each horizontal slab t(i,:,:) separately.
  Tensor3 out(Dims{d.n1, static_cast<int>(m.rows()), d.n3});
  for (int i = 0; i < d.n1; ++i) {
    RowMajorMap slab(t.values().data() + static_cast<long>(i) * d.n2 * d.n3, d.n2, d.n3);
    RowMajorMutable dst(out.values().data() + static_cast<long>(i) * m.rows() * d.n3, m.rows(),
                        d.n3);
    dst.noalias() = m * slab;
  }
  return out;
}

Vector vectorize(const Tensor3& t) { return t.as_vector(); }

Tensor3 refold(const Vector& v, Dims dims) {
  if (v.size() != dims.size())
    throw std::invalid_argument("refold: vector length " + std::to_string(v.size()) +
                                " does not match dims " + to_string(dims));
  return Tensor3(dims, std::vector<double>(v.data(), v.data() + v.size()));
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (long i = 0; i < a.rows(); ++i)
    for (long j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& b1, const Matrix& b2,
                           const Matrix& b3) {
  return mode_n_product(mode_n_product(mode_n_product(core, b1, 1), b2, 2), b3, 3);
}

Matrix frontal_slice(const Tensor3& t, int k) {
  const Dims d = t.dims();
  if (k < 0 || k >= d.n3)
    throw std::out_of_range("frontal slice index " + std::to_string(k) +
                            " out of range for n3=" + std::to_string(d.n3));
  Matrix out(d.n1, d.n2);
  for (int i = 0; i < d.n1; ++i)
    for (int j = 0; j < d.n2; ++j) out(i, j) = t(i, j, k);
  return out;
}

}  // namespace hotspot
