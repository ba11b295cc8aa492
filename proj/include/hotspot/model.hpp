#ifndef HOTSPOT_MODEL_HPP
#define HOTSPOT_MODEL_HPP

#include <memory>
#include <stdexcept>
#include <vector>

#include "hotspot/basis.hpp"
#include "hotspot/tensor.hpp"

namespace hotspot {

/// Thrown when a likelihood/gradient evaluation or a solver iterate goes
/// non-finite.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Observed counts, population offsets and the fixed bases, with the
/// vectorized caches used by every likelihood evaluation. Immutable.
class ProblemData {
 public:
  ProblemData(CountTensor y, Tensor3 population, std::shared_ptr<const BasisSet> basis);

  const CountTensor& counts() const { return y_; }
  const Tensor3& population() const { return pop_; }
  const BasisSet& basis() const { return *basis_; }
  std::shared_ptr<const BasisSet> basis_ptr() const { return basis_; }

  const Vector& y_vec() const { return y_vec_; }
  const Vector& pop_vec() const { return pop_vec_; }
  Dims dims() const { return y_.tensor().dims(); }
  long n() const { return y_vec_.size(); }

 private:
  CountTensor y_;
  Tensor3 pop_;
  std::shared_ptr<const BasisSet> basis_;
  Vector y_vec_, pop_vec_;
};

struct ModelParams {
  Vector theta_m;  // smooth-trend coefficients, length p
  Vector theta_h;  // hot-spot coefficients, length q

  static ModelParams zeros(const BasisSet& basis);
};

/// Default clamp applied to linear predictors before exponentiation.
inline constexpr double kPredictorClamp = 30.0;

/// X*theta_m + Z*theta_h (unclamped).
Vector linear_predictor(const ProblemData& data, const ModelParams& params);

/// pop_i * exp(clamped predictor_i): the Poisson means / IRLS weights.
Vector poisson_means(const ProblemData& data, const Vector& predictor,
                     double clamp = kPredictorClamp);

/// Negative log-likelihood up to the data-only constant:
/// sum_i [ -y_i eta_i + pop_i exp(eta_i) ], exp clamped to +-clamp.
double neg_log_likelihood(const ProblemData& data, const ModelParams& params,
                          double clamp = kPredictorClamp);

/// neg_log_likelihood + lambda * ||theta_h||_1.
double objective(const ProblemData& data, const ModelParams& params, double lambda,
                 double clamp = kPredictorClamp);

/// X^T (gamma - y) with gamma the Poisson means at params.
Vector grad_theta_m(const ProblemData& data, const ModelParams& params,
                    double clamp = kPredictorClamp);

/// Z^T (gamma - y).
Vector grad_theta_h(const ProblemData& data, const ModelParams& params,
                    double clamp = kPredictorClamp);

/// A fitted model at one penalty: coefficients plus the reconstructed
/// log-rate components and count-scale means. Rate tensors use the raw
/// (unclamped) exponential so log(r_hat) == u_hat + h_hat exactly.
struct ModelFit {
  ModelParams params;
  double lambda = 0.0;
  Tensor3 u_hat;           // smooth log-rate component, refold(X theta_m)
  Tensor3 h_hat;           // hot-spot log-rate component, refold(Z theta_h)
  Tensor3 r_hat;           // exp(u_hat + h_hat)
  Tensor3 mu_hat_counts;   // population .* r_hat
  double objective_value = 0.0;
  bool converged = false;
  bool stagnated = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  std::vector<double> objective_trace;
};

ModelFit fitted_tensors(const ProblemData& data, const ModelParams& params, double lambda);

}  // namespace hotspot

#endif  // HOTSPOT_MODEL_HPP
