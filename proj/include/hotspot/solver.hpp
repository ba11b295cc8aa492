#ifndef HOTSPOT_SOLVER_HPP
#define HOTSPOT_SOLVER_HPP

#include <optional>
#include <string>
#include <vector>

#include "hotspot/model.hpp"

namespace hotspot {

struct SolverConfig {
  int max_outer = 50;
  int max_inner = 200;
  double outer_tol = 1e-6;   // relative objective change
  double inner_tol = 1e-8;   // relative theta_h change
  double ridge = 1e-8;       // added to X^T W X
  int step_halving_max = 20;
  double predictor_clamp = 30.0;
  bool warm_start = true;    // warm starts along a lambda path

  void validate() const;
};

double soft_threshold(double x, double a);
Vector soft_threshold(const Vector& x, double a);

struct IrlsStepResult {
  Vector theta_m;
  bool stagnated = false;
  int halvings = 0;
};

/// One damped Newton / IRLS update of theta_m at fixed theta_h:
/// solve (X^T W X + ridge I) theta = X^T W eta with
/// W = diag(pop_i exp(eta_i)), eta the working response, then halve the
/// step toward the old theta_m until the objective does not increase.
IrlsStepResult irls_step(const ProblemData& data, const ModelParams& params,
                         const SolverConfig& config);

/// Largest eigenvalue of Z^T W Z at the current iterate; closed form
/// max_i W_ii when Z is the identity.
double lipschitz_constant(const ProblemData& data, const ModelParams& params,
                          double clamp = kPredictorClamp);

struct FistaResult {
  Vector theta_h;
  int iterations = 0;
  bool converged = false;
};

/// Accelerated proximal gradient for theta_h at fixed theta_m, soft
/// thresholding at lambda/L with momentum t_{s+1} = (1+sqrt(1+4t_s^2))/2
/// restarted at t=1. L is computed once at entry. Falls back to the best
/// iterate seen if the accelerated sequence ends above the start value.
FistaResult fista_solve(const ProblemData& data, const Vector& theta_m,
                        const Vector& theta_h_start, double lambda, const SolverConfig& config);

/// Momentum recursion, exposed for direct checking.
inline double fista_momentum_next(double t) { return (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0; }

/// Full two-loop estimate at one penalty: alternate irls_step and
/// fista_solve until the relative objective change drops below
/// outer_tol. theta_h starts at zero and theta_m at the least-squares
/// projection of log((y+0.5)/pop) onto the column space of X unless a
/// warm start is supplied.
ModelFit fit(const ProblemData& data, double lambda, const SolverConfig& config = {},
             const std::optional<ModelParams>& warm = std::nullopt);

struct FitPath {
  std::vector<double> lambdas;                 // descending
  std::vector<std::optional<ModelFit>> fits;   // nullopt where the fit failed
  std::vector<std::string> errors;             // failure messages, "" when ok

  const ModelFit* at(size_t i) const { return fits[i] ? &*fits[i] : nullptr; }
};

/// Fits every lambda in a descending grid, warm starting each fit from
/// the previous solution (or cold starting and fitting lambdas in
/// parallel when config.warm_start is false). Per-lambda failures are
/// recorded; the remaining fits proceed. Optional per-lambda warm starts
/// (e.g. from the previous monitoring window) override the defaults.
FitPath fit_path(const ProblemData& data, const std::vector<double>& grid,
                 const SolverConfig& config = {},
                 const std::vector<std::optional<ModelParams>>* warm_starts = nullptr);

/// GLM fit of the smooth trend alone (theta_h pinned at zero).
Vector fit_glm_theta_m(const ProblemData& data, const SolverConfig& config = {});

/// Smallest penalty at which theta_h = 0 is optimal:
/// || grad_theta_h at (theta_m_glm, 0) ||_inf.
double lambda_max(const ProblemData& data, const SolverConfig& config = {});

/// Geometric grid of n descending values spanning
/// [lambda_max * min_ratio, lambda_max].
std::vector<double> make_lambda_grid(double lambda_max, int n = 10, double min_ratio = 1e-3);

}  // namespace hotspot

#endif  // HOTSPOT_SOLVER_HPP
