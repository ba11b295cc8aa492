#ifndef HOTSPOT_MONITOR_HPP
#define HOTSPOT_MONITOR_HPP

#include <functional>
#include <optional>
#include <random>

#include "hotspot/solver.hpp"

namespace hotspot {

/// Null-hypothesis moments of the projection statistic, one row per
/// penalty in the grid. Penalties with zero phase-I variance are marked
/// unusable and skipped during standardization.
struct H0Moments {
  struct Row {
    double lambda = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    bool usable = false;
  };
  std::vector<Row> rows;  // aligned with the fitted grid, descending lambda
  int phase1_points = 0;

  bool any_usable() const;
};

/// Residual of the time-t frontal slice against the fitted background
/// mean counts (theta_h zeroed in the predictor), flattened row-major
/// to length n1*n2. Pearson scaling divides by sqrt of the same means.
/// t is 0-based.
Vector residual(const ModelFit& fit, const ProblemData& data, int t, bool pearson = false);

/// One-sided projection statistic: with hplus the positive part of the
/// time-t hot-spot slice, hplus . r / ||hplus||; zero when hplus is all
/// zero.
double p_plus(const ModelFit& fit, const ProblemData& data, int t, bool pearson = false);

/// Per-lambda sample mean and variance (denominator count-1) of P+ over
/// every time point of the phase-I window covered by `path`/`data`.
/// Requires at least 5 phase-I points. Zero-variance penalties are
/// flagged unusable.
H0Moments estimate_h0_moments(const FitPath& path, const ProblemData& data,
                              bool pearson = false);

struct PTildeResult {
  double value = 0.0;
  double lambda_star = 0.0;
  size_t lambda_index = 0;
  double p_plus_at_star = 0.0;
};

/// Penalty-maximized standardized statistic at time t: the max over
/// usable lambdas of (P+ - mean)/sd, with ties broken toward the larger
/// lambda. Throws when no lambda is usable.
PTildeResult p_tilde(const FitPath& path, const ProblemData& data, int t,
                     const H0Moments& moments, bool pearson = false);

/// max{0, w_prev + p_tilde - d_star}.
double cusum_update(double w_prev, double p_tilde, double d_star);

/// Draws one in-control statistic per call using the supplied RNG.
using StreamGenerator = std::function<double(std::mt19937_64&)>;

StreamGenerator standard_normal_stream();

/// Mean run length of the one-sided CUSUM over `reps` simulated streams
/// (common random numbers derived from `seed`). Runs are censored at
/// `cap` steps, which then contribute `cap`.
double estimate_arl(const StreamGenerator& gen, double d_star, double limit, int reps,
                    std::uint64_t seed, int cap = 0);

struct CalibrationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Control limit L such that the Monte-Carlo ARL0 of the chart on the
/// generator matches target_arl0 within 5%, found by bisection on
/// [0, 50] with common random numbers. Deterministic given seed.
double calibrate_limit(const StreamGenerator& gen, double d_star, double target_arl0, int reps,
                       std::uint64_t seed);

struct ChartPoint {
  int t = 0;  // 0-based time index
  double lambda_star = 0.0;
  double p_plus = 0.0;
  double p_tilde = 0.0;
  double w = 0.0;
  bool alarm = false;
  bool fit_failed = false;
};

using ChartHistory = std::vector<ChartPoint>;

/// CUSUM chart state: allowance, calibrated limit, running statistic and
/// per-step history.
struct CusumChart {
  double d_star = 0.5;
  double limit = 0.0;
  double w = 0.0;
  ChartHistory history;
};

struct ChartStep {
  double p_tilde = 0.0;
  double lambda_star = 0.0;
  double p_plus = 0.0;
};

/// Processes time points t_begin..t_end (0-based, inclusive) in order:
/// obtain the step statistic, update W, stop at the first W > limit.
/// A nullopt step marks a fit failure: the point contributes p_tilde = 0
/// and is flagged. Returns the 0-based alarm time, or nullopt if the
/// stream ends unalarmed.
std::optional<int> run_chart(CusumChart& chart, int t_begin, int t_end,
                             const std::function<std::optional<ChartStep>(int)>& step_at);

}  // namespace hotspot

#endif  // HOTSPOT_MONITOR_HPP
