#ifndef HOTSPOT_TENSOR_HPP
#define HOTSPOT_TENSOR_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hotspot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dims {
  int n1 = 0;
  int n2 = 0;
  int n3 = 0;

  long size() const { return static_cast<long>(n1) * n2 * n3; }
  int operator[](int mode) const;  // mode in {1,2,3}
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

/// Dense order-3 tensor. Storage is last-index-fastest: entry (i,j,k)
/// lives at ((i*n2)+j)*n3+k, so vectorize() is a plain copy and the
/// Kronecker identity vec(C x1 B1 x2 B2 x3 B3) = (B1 (x) B2 (x) B3) vec(C)
/// holds with the factors in that order.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Dims dims);
  Tensor3(Dims dims, std::vector<double> values);

  const Dims& dims() const { return dims_; }
  long size() const { return dims_.size(); }

  double operator()(int i, int j, int k) const { return values_[offset(i, j, k)]; }
  double& operator()(int i, int j, int k) { return values_[offset(i, j, k)]; }

  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  Eigen::Map<const Vector> as_vector() const {
    return Eigen::Map<const Vector>(values_.data(), static_cast<long>(values_.size()));
  }

  // Axis labels are optional; when set their lengths must match the dims.
  void set_axis_labels(int axis, std::vector<std::string> labels);
  const std::optional<std::vector<std::string>>& axis_labels(int axis) const;

  /// Throws if any entry is non-finite.
  void check_finite(const std::string& what) const;

 private:
  long offset(int i, int j, int k) const {
    return (static_cast<long>(i) * dims_.n2 + j) * dims_.n3 + k;
  }

  Dims dims_{};
  std::vector<double> values_;
  std::array<std::optional<std::vector<std::string>>, 3> labels_;
};

/// Observed counts: a Tensor3 whose entries are nonnegative integers
/// (stored as doubles; integrality enforced to 1e-9 on construction).
class CountTensor {
 public:
  CountTensor() = default;
  explicit CountTensor(Tensor3 values);

  const Tensor3& tensor() const { return values_; }
  Tensor3& tensor() { return values_; }

 private:
  Tensor3 values_;
};

/// Contraction of `m` against the mode-th index (mode in 1..3).
/// Requires m.cols() == t.dims()[mode]; the result replaces that extent
/// with m.rows().
Tensor3 mode_n_product(const Tensor3& t, const Matrix& m, int mode);

/// Entry (i,j,k) maps to position i*n2*n3 + j*n3 + k (0-based).
Vector vectorize(const Tensor3& t);

/// Inverse of vectorize; v.size() must equal dims.size().
Tensor3 refold(const Vector& v, Dims dims);

/// Kronecker product: block (i,j) of the result is a(i,j)*b.
Matrix kron(const Matrix& a, const Matrix& b);

/// core x1 b1 x2 b2 x3 b3.
Tensor3 tucker_reconstruct(const Tensor3& core, const Matrix& b1, const Matrix& b2,
                           const Matrix& b3);

/// n1 x n2 matrix holding t(:,:,k); k is 0-based, 0 <= k < n3.
Matrix frontal_slice(const Tensor3& t, int k);

}  // namespace hotspot

#endif  // HOTSPOT_TENSOR_HPP
