#include "hotspot/solver.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace hotspot {

void SolverConfig::validate() const {
  if (max_outer <= 0 || max_inner <= 0 || step_halving_max <= 0)
    throw std::invalid_argument("solver iteration limits must be positive");
  if (!(outer_tol > 0.0 && outer_tol < 1.0) || !(inner_tol > 0.0 && inner_tol < 1.0))
    throw std::invalid_argument("solver tolerances must lie in (0, 1)");
  if (!(ridge > 0.0) || !(predictor_clamp > 0.0))
    throw std::invalid_argument("ridge and predictor clamp must be positive");
}

double soft_threshold(double x, double a) {
  if (a < 0.0) throw std::invalid_argument("soft_threshold shift must be >= 0");
  if (x >= a) return x - a;
  if (x <= -a) return x + a;
  return 0.0;
}

Vector soft_threshold(const Vector& x, double a) {
  if (a < 0.0) throw std::invalid_argument("soft_threshold shift must be >= 0");
  return (x.array() - a).max(0.0) - (-x.array() - a).max(0.0);
}

namespace {

using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// X^T diag(w) X accumulated over the sparse rows of X (upper triangle,
/// then mirrored). Row entries are few (<= order^3), so this is much
/// cheaper than a general sparse-sparse product.
Matrix weighted_gram(const RowSparse& x, const Vector& w) {
  const long p = x.cols();
  Matrix h = Matrix::Zero(p, p);
  const auto* outer = x.outerIndexPtr();
  const auto* inner = x.innerIndexPtr();
  const double* val = x.valuePtr();
  for (long i = 0; i < x.rows(); ++i) {
    const double wi = w[i];
    for (auto a = outer[i]; a < outer[i + 1]; ++a) {
      const double wa = wi * val[a];
      const long ca = inner[a];
      for (auto b = a; b < outer[i + 1]; ++b) h(ca, inner[b]) += wa * val[b];
    }
  }
  return h.selfadjointView<Eigen::Upper>();
}

Vector clamped_exp_means(const ProblemData& data, const Vector& eta, double clamp) {
  Vector gamma = data.pop_vec().array() * eta.array().min(clamp).max(-clamp).exp();
  if (!gamma.allFinite()) throw DivergenceError("Poisson means are non-finite");
  return gamma;
}

double nll_of_predictor(const ProblemData& data, const Vector& eta, double clamp) {
  const double v = (-data.y_vec().array() * eta.array() +
                    data.pop_vec().array() * eta.array().min(clamp).max(-clamp).exp())
                       .sum();
  if (!std::isfinite(v)) throw DivergenceError("negative log-likelihood is non-finite");
  return v;
}

}  // namespace

IrlsStepResult irls_step(const ProblemData& data, const ModelParams& params,
                         const SolverConfig& config) {
  config.validate();
  const BasisSet& basis = data.basis();
  const double clamp = config.predictor_clamp;

  const Vector eta = linear_predictor(data, params);
  const Vector gamma = clamped_exp_means(data, eta, clamp);

  Matrix h = weighted_gram(basis.x_row, gamma);
  // rhs = X^T W eta_work = (X^T W X) theta + X^T (y - gamma)
  Vector rhs = h.selfadjointView<Eigen::Upper>() * params.theta_m +
               basis.x.transpose() * (data.y_vec() - gamma);
  h.diagonal().array() += config.ridge;
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() != Eigen::Success)
    throw DivergenceError("IRLS normal equations are not positive definite");
  const Vector candidate = llt.solve(rhs);

  const double f_old = nll_of_predictor(data, eta, clamp);
  ModelParams trial{candidate, params.theta_h};
  double step = 1.0;
  for (int halvings = 0; halvings <= config.step_halving_max; ++halvings) {
    const double f_trial = neg_log_likelihood(data, trial, clamp);
    if (f_trial <= f_old) return IrlsStepResult{trial.theta_m, false, halvings};
    step *= 0.5;
    trial.theta_m = params.theta_m + step * (candidate - params.theta_m);
  }
  return IrlsStepResult{params.theta_m, true, config.step_halving_max};
}

double lipschitz_constant(const ProblemData& data, const ModelParams& params, double clamp) {
  const Vector gamma = clamped_exp_means(data, linear_predictor(data, params), clamp);
  const BasisSet& basis = data.basis();
  if (basis.z_is_identity) return gamma.maxCoeff();
  const Matrix ztwz =
      basis.z.transpose() * gamma.asDiagonal() * basis.z;
  Eigen::SelfAdjointEigenSolver<Matrix> es(ztwz, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

FistaResult fista_solve(const ProblemData& data, const Vector& theta_m,
                        const Vector& theta_h_start, double lambda, const SolverConfig& config) {
  config.validate();
  if (lambda < 0.0) throw std::invalid_argument("penalty lambda must be >= 0");
  const BasisSet& basis = data.basis();
  const double clamp = config.predictor_clamp;
  const bool identity = basis.z_is_identity;

  const Vector smooth = basis.x * theta_m;
  auto predictor_of = [&](const Vector& th) -> Vector {
    return identity ? Vector(smooth + th) : Vector(smooth + basis.z * th);
  };
  auto objective_of = [&](const Vector& th) {
    return nll_of_predictor(data, predictor_of(th), clamp) + lambda * th.lpNorm<1>();
  };

  const double l = lipschitz_constant(data, ModelParams{theta_m, theta_h_start}, clamp);

  Vector alpha = theta_h_start;
  Vector theta_prev = theta_h_start;
  Vector theta = theta_h_start;
  double t = 1.0;

  const double f_start = objective_of(theta_h_start);
  double f_best = f_start;
  Vector best = theta_h_start;

  FistaResult result;
  double f_prev = f_start;
  for (int s = 1; s <= config.max_inner; ++s) {
    const Vector gamma = clamped_exp_means(data, predictor_of(alpha), clamp);
    const Vector grad =
        identity ? Vector(gamma - data.y_vec()) : Vector(basis.z.transpose() * (gamma - data.y_vec()));
    theta = soft_threshold(Vector(alpha - grad / l), lambda / l);
    if (!theta.allFinite())
      throw DivergenceError("FISTA iterate non-finite at inner iteration " + std::to_string(s));

    const double t_next = fista_momentum_next(t);
    alpha = theta + ((t - 1.0) / t_next) * (theta - theta_prev);

    const double f = objective_of(theta);
    if (f < f_best) {
      f_best = f;
      best = theta;
    }
    result.iterations = s;
    const double rel = (theta - theta_prev).norm() / std::max(1.0, theta.norm());
    theta_prev = theta;
    if (f > f_prev) {
      // Function-value adaptive restart: drop the momentum whenever the
      // accelerated sequence overshoots.
      t = 1.0;
      alpha = theta;
    } else {
      t = t_next;
    }
    f_prev = f;
    if (rel < config.inner_tol) {
      result.converged = true;
      break;
    }
  }
  // Acceleration is not monotone; never return a point above the start.
  result.theta_h = (objective_of(theta) <= f_start + 1e-8) ? theta : best;
  return result;
}

namespace {

Vector initial_theta_m(const ProblemData& data, const SolverConfig& config) {
  const BasisSet& basis = data.basis();
  const Vector target =
      ((data.y_vec().array() + 0.5) / data.pop_vec().array()).log().matrix();
  Matrix gram = weighted_gram(basis.x_row, Vector::Ones(data.n()));
  gram.diagonal().array() += config.ridge;
  const Vector rhs = basis.x.transpose() * target;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw DivergenceError("initialization normal equations are not positive definite");
  return llt.solve(rhs);
}

}  // namespace

ModelFit fit(const ProblemData& data, double lambda, const SolverConfig& config,
             const std::optional<ModelParams>& warm) {
  config.validate();
  if (lambda < 0.0) throw std::invalid_argument("penalty lambda must be >= 0");
  const BasisSet& basis = data.basis();

  ModelParams params;
  if (warm) {
    if (warm->theta_m.size() != basis.p() || warm->theta_h.size() != basis.q())
      throw std::invalid_argument("warm start does not match basis column counts");
    params = *warm;
  } else {
    params.theta_m = initial_theta_m(data, config);
    params.theta_h = Vector::Zero(basis.q());
  }

  ModelFit result;
  double f_prev = objective(data, params, lambda, config.predictor_clamp);
  result.objective_trace.push_back(f_prev);

  for (int k = 1; k <= config.max_outer; ++k) {
    const IrlsStepResult step = irls_step(data, params, config);
    params.theta_m = step.theta_m;
    if (step.stagnated) result.stagnated = true;

    const FistaResult inner =
        fista_solve(data, params.theta_m, params.theta_h, lambda, config);
    params.theta_h = inner.theta_h;
    result.inner_iterations += inner.iterations;
    result.outer_iterations = k;

    const double f = objective(data, params, lambda, config.predictor_clamp);
    result.objective_trace.push_back(f);
    if (std::abs(f_prev - f) <= config.outer_tol * std::max(1.0, std::abs(f_prev))) {
      result.converged = true;
      f_prev = f;
      break;
    }
    f_prev = f;
  }

  ModelFit filled = fitted_tensors(data, params, lambda);
  filled.converged = result.converged;
  filled.stagnated = result.stagnated;
  filled.outer_iterations = result.outer_iterations;
  filled.inner_iterations = result.inner_iterations;
  filled.objective_trace = std::move(result.objective_trace);
  filled.objective_value = filled.objective_trace.back();
  return filled;
}

FitPath fit_path(const ProblemData& data, const std::vector<double>& grid,
                 const SolverConfig& config,
                 const std::vector<std::optional<ModelParams>>* warm_starts) {
  if (grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0)) throw std::invalid_argument("lambda grid must be positive");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("lambda grid must be strictly descending");
  }
  if (warm_starts && warm_starts->size() != grid.size())
    throw std::invalid_argument("warm start list does not match grid size");

  FitPath path;
  path.lambdas = grid;
  path.fits.resize(grid.size());
  path.errors.assign(grid.size(), "");

  if (!config.warm_start) {
    std::vector<std::future<ModelFit>> futs(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
      futs[i] = std::async(std::launch::async, [&, i] {
        return fit(data, grid[i], config, warm_starts ? (*warm_starts)[i] : std::nullopt);
      });
    for (size_t i = 0; i < grid.size(); ++i) {
      try {
        path.fits[i] = futs[i].get();
      } catch (const std::exception& e) {
        path.errors[i] = e.what();
      }
    }
    return path;
  }

  std::optional<ModelParams> carry;
  for (size_t i = 0; i < grid.size(); ++i) {
    std::optional<ModelParams> start = carry;
    if (warm_starts && (*warm_starts)[i]) start = (*warm_starts)[i];
    try {
      path.fits[i] = fit(data, grid[i], config, start);
      carry = path.fits[i]->params;
    } catch (const std::exception& e) {
      path.errors[i] = e.what();
    }
  }
  return path;
}

Vector fit_glm_theta_m(const ProblemData& data, const SolverConfig& config) {
  config.validate();
  ModelParams params{initial_theta_m(data, config), Vector::Zero(data.basis().q())};
  double f_prev = neg_log_likelihood(data, params, config.predictor_clamp);
  for (int k = 0; k < config.max_outer; ++k) {
    params.theta_m = irls_step(data, params, config).theta_m;
    const double f = neg_log_likelihood(data, params, config.predictor_clamp);
    if (std::abs(f_prev - f) <= config.outer_tol * std::max(1.0, std::abs(f_prev))) break;
    f_prev = f;
  }
  return params.theta_m;
}

double lambda_max(const ProblemData& data, const SolverConfig& config) {
  const ModelParams params{fit_glm_theta_m(data, config), Vector::Zero(data.basis().q())};
  return grad_theta_h(data, params, config.predictor_clamp).lpNorm<Eigen::Infinity>();
}

std::vector<double> make_lambda_grid(double lambda_max, int n, double min_ratio) {
  if (n < 1) throw std::invalid_argument("lambda grid size must be >= 1");
  if (!(min_ratio > 0.0 && min_ratio <= 1.0))
    throw std::invalid_argument("lambda grid min_ratio must lie in (0, 1]");
  const double top = std::max(lambda_max, 1e-12);
  std::vector<double> grid(n);
  if (n == 1) {
    grid[0] = top;
    return grid;
  }
  for (int i = 0; i < n; ++i)
    grid[i] = top * std::pow(min_ratio, static_cast<double>(i) / (n - 1));
  return grid;
}

}  // namespace hotspot
