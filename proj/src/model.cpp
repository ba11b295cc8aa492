#include "hotspot/model.hpp"

#include <cmath>

namespace hotspot {

ProblemData::ProblemData(CountTensor y, Tensor3 population,
                         std::shared_ptr<const BasisSet> basis)
    : y_(std::move(y)), pop_(std::move(population)), basis_(std::move(basis)) {
  if (!basis_) throw std::invalid_argument("ProblemData: basis is null");
  if (!(y_.tensor().dims() == pop_.dims()))
    throw std::invalid_argument("counts are " + to_string(y_.tensor().dims()) +
                                " but population is " + to_string(pop_.dims()));
  if (!(y_.tensor().dims() == basis_->dims()))
    throw std::invalid_argument("counts are " + to_string(y_.tensor().dims()) +
                                " but basis covers " + to_string(basis_->dims()));
  pop_.check_finite("population tensor");
  for (double v : pop_.values())
    if (v <= 0.0) throw std::invalid_argument("population tensor has a nonpositive entry");
  y_vec_ = y_.tensor().as_vector();
  pop_vec_ = pop_.as_vector();
}

ModelParams ModelParams::zeros(const BasisSet& basis) {
  return ModelParams{Vector::Zero(basis.p()), Vector::Zero(basis.q())};
}

Vector linear_predictor(const ProblemData& data, const ModelParams& params) {
  const BasisSet& b = data.basis();
  if (params.theta_m.size() != b.p() || params.theta_h.size() != b.q())
    throw std::invalid_argument("parameter lengths do not match basis column counts");
  Vector eta = b.x * params.theta_m;
  if (b.z_is_identity)
    eta += params.theta_h;
  else
    eta += b.z * params.theta_h;
  return eta;
}

Vector poisson_means(const ProblemData& data, const Vector& predictor, double clamp) {
  return data.pop_vec().array() *
         predictor.array().min(clamp).max(-clamp).exp();
}

namespace {

double nll_from_predictor(const ProblemData& data, const Vector& eta, double clamp) {
  const double value =
      (-data.y_vec().array() * eta.array() +
       data.pop_vec().array() * eta.array().min(clamp).max(-clamp).exp())
          .sum();
  if (!std::isfinite(value)) throw DivergenceError("negative log-likelihood is non-finite");
  return value;
}

}  // namespace

double neg_log_likelihood(const ProblemData& data, const ModelParams& params, double clamp) {
  return nll_from_predictor(data, linear_predictor(data, params), clamp);
}

double objective(const ProblemData& data, const ModelParams& params, double lambda,
                 double clamp) {
  if (lambda < 0.0) throw std::invalid_argument("penalty lambda must be >= 0");
  return neg_log_likelihood(data, params, clamp) + lambda * params.theta_h.lpNorm<1>();
}

Vector grad_theta_m(const ProblemData& data, const ModelParams& params, double clamp) {
  const Vector gamma = poisson_means(data, linear_predictor(data, params), clamp);
  if (!gamma.allFinite()) throw DivergenceError("Poisson means are non-finite");
  return data.basis().x.transpose() * (gamma - data.y_vec());
}

Vector grad_theta_h(const ProblemData& data, const ModelParams& params, double clamp) {
  const Vector gamma = poisson_means(data, linear_predictor(data, params), clamp);
  if (!gamma.allFinite()) throw DivergenceError("Poisson means are non-finite");
  const Vector resid = gamma - data.y_vec();
  if (data.basis().z_is_identity) return resid;
  return data.basis().z.transpose() * resid;
}

ModelFit fitted_tensors(const ProblemData& data, const ModelParams& params, double lambda) {
  const Dims d = data.dims();
  ModelFit fit;
  fit.params = params;
  fit.lambda = lambda;
  const BasisSet& b = data.basis();
  const Vector u = b.x * params.theta_m;
  const Vector h = b.z_is_identity ? params.theta_h : Vector(b.z * params.theta_h);
  fit.u_hat = refold(u, d);
  fit.h_hat = refold(h, d);
  fit.r_hat = refold((u + h).array().exp(), d);
  fit.mu_hat_counts = refold(data.pop_vec().array() * (u + h).array().exp(), d);
  fit.objective_value = objective(data, params, lambda);
  return fit;
}

}  // namespace hotspot
