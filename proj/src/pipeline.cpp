#include "hotspot/pipeline.hpp"

#include <cmath>

#include "hotspot/rng.hpp"

namespace hotspot {

void MonitorConfig::validate() const {
  if (!(d_star >= 0.0)) throw std::invalid_argument("CUSUM allowance must be >= 0");
  if (!(target_arl0 > 1.0)) throw std::invalid_argument("target ARL0 must exceed 1");
  if (calibration_reps < 1000)
    throw std::invalid_argument("calibration needs at least 1000 replications");
  if (n_lambda < 1) throw std::invalid_argument("lambda grid size must be >= 1");
  if (!(lambda_min_ratio > 0.0 && lambda_min_ratio <= 1.0))
    throw std::invalid_argument("lambda_min_ratio must lie in (0, 1]");
}

Tensor3 window_years(const Tensor3& t, int years) {
  const Dims d = t.dims();
  if (years < 1 || years > d.n3)
    throw std::invalid_argument("window of " + std::to_string(years) +
                                " years out of range for n3=" + std::to_string(d.n3));
  Tensor3 out(Dims{d.n1, d.n2, years});
  for (int i = 0; i < d.n1; ++i)
    for (int j = 0; j < d.n2; ++j)
      for (int k = 0; k < years; ++k) out(i, j, k) = t(i, j, k);
  for (int axis = 1; axis <= 2; ++axis)
    if (const auto& labels = t.axis_labels(axis)) out.set_axis_labels(axis, *labels);
  if (const auto& labels = t.axis_labels(3))
    out.set_axis_labels(3, std::vector<std::string>(labels->begin(), labels->begin() + years));
  return out;
}

StreamGenerator phase1_bootstrap_stream(std::vector<double> pool) {
  if (pool.empty()) throw std::invalid_argument("bootstrap pool is empty");
  return [pool = std::move(pool)](std::mt19937_64& rng) {
    std::uniform_int_distribution<size_t> pick(0, pool.size() - 1);
    return pool[pick(rng)];
  };
}

PipelineDetector::PipelineDetector(PipelineConfig config) : config_(std::move(config)) {
  config_.solver.validate();
  config_.monitor.validate();
}

namespace {

ProblemData make_window_data(const CountTensor& counts, const Tensor3& population, int years,
                             const BasisConfig& basis_config) {
  Tensor3 y = window_years(counts.tensor(), years);
  Tensor3 pop = window_years(population, years);
  const Dims d = y.dims();
  auto basis = std::make_shared<const BasisSet>(default_basis_set(d, basis_config));
  return ProblemData(CountTensor(std::move(y)), std::move(pop), std::move(basis));
}

/// Re-index hot-spot coefficients from an n3=from window to n3=to,
/// zero-filling the new years. Valid because identity hot-spot bases
/// index cells directly.
Vector extend_theta_h(const Vector& old, Dims dims, int from, int to) {
  Vector out = Vector::Zero(static_cast<long>(dims.n1) * dims.n2 * to);
  for (int i = 0; i < dims.n1; ++i)
    for (int j = 0; j < dims.n2; ++j) {
      const long src = (static_cast<long>(i) * dims.n2 + j) * from;
      const long dst = (static_cast<long>(i) * dims.n2 + j) * to;
      for (int k = 0; k < std::min(from, to); ++k) out[dst + k] = old[src + k];
    }
  return out;
}

}  // namespace

DetectionOutcome PipelineDetector::run(const CountTensor& counts, const Tensor3& population,
                                       int phase1_years, std::uint64_t seed) const {
  const Dims full = counts.tensor().dims();
  if (phase1_years < 5 || phase1_years >= full.n3)
    throw std::invalid_argument("phase-I window must cover 5..n3-1 years, got " +
                                std::to_string(phase1_years));

  const SolverConfig& solver_cfg = config_.solver;
  const MonitorConfig& mon = config_.monitor;

  // Phase I: fit the penalty path once on the in-control window and take
  // per-penalty sample moments of the projection statistic.
  ProblemData phase1 = make_window_data(counts, population, phase1_years, config_.basis);
  const double lmax = lambda_max(phase1, solver_cfg);
  const std::vector<double> grid = make_lambda_grid(lmax, mon.n_lambda, mon.lambda_min_ratio);
  const FitPath phase1_path = fit_path(phase1, grid, solver_cfg);
  const H0Moments moments = estimate_h0_moments(phase1_path, phase1, mon.pearson);
  if (!moments.any_usable())
    throw std::runtime_error("phase-I produced no usable penalty (all variances were zero)");

  // Calibrate the control limit by resampling the phase-I values of the
  // standardized statistic.
  std::vector<double> pool;
  pool.reserve(phase1_years);
  for (int t = 0; t < phase1_years; ++t)
    pool.push_back(p_tilde(phase1_path, phase1, t, moments, mon.pearson).value);
  const double limit =
      calibrate_limit(phase1_bootstrap_stream(pool), mon.d_star, mon.target_arl0,
                      mon.calibration_reps, derive_seed(seed, "calibrate", 0));

  DetectionOutcome outcome;
  outcome.limit = limit;
  outcome.d_star = mon.d_star;
  outcome.grid = grid;
  outcome.moments = moments;

  CusumChart chart;
  chart.d_star = mon.d_star;
  chart.limit = limit;

  // Monitoring: refit the path on the growing window, compute the
  // penalty-maximized statistic at the newest year, update the chart.
  struct YearState {
    ProblemData data;
    FitPath path;
  };
  std::optional<YearState> current;
  std::vector<std::optional<ModelParams>> warm(grid.size());

  auto step_at = [&](int t) -> std::optional<ChartStep> {
    const int years = t + 1;
    try {
      ProblemData data = make_window_data(counts, population, years, config_.basis);
      // Carry the previous year's solutions when the coefficient layout
      // still matches (identity hot-spot bases index cells directly).
      std::vector<std::optional<ModelParams>> starts(grid.size());
      if (current) {
        const Dims prev = current->data.dims();
        for (size_t i = 0; i < grid.size(); ++i) {
          const ModelFit* prev_fit = current->path.at(i);
          if (!prev_fit) continue;
          if (prev_fit->params.theta_m.size() != data.basis().p()) continue;
          starts[i] = ModelParams{
              prev_fit->params.theta_m,
              extend_theta_h(prev_fit->params.theta_h, prev, prev.n3, years)};
        }
      }
      FitPath path = fit_path(data, grid, solver_cfg, &starts);
      const PTildeResult stat = p_tilde(path, data, t, moments, mon.pearson);
      current = YearState{std::move(data), std::move(path)};
      return ChartStep{stat.value, stat.lambda_star, stat.p_plus_at_star};
    } catch (const std::exception&) {
      return std::nullopt;  // fit failure: the year contributes 0 and is flagged
    }
  };

  const std::optional<int> alarm_t =
      run_chart(chart, phase1_years, full.n3 - 1, step_at);
  outcome.history = chart.history;

  // Score localization and the background fit at the chart's chosen
  // penalty for the alarm year (or the last monitored year otherwise).
  const ModelFit* scoring_fit = nullptr;
  const ProblemData* scoring_data = nullptr;
  if (current) {
    double lambda_star = 0.0;
    for (auto it = chart.history.rbegin(); it != chart.history.rend(); ++it)
      if (!it->fit_failed) {
        lambda_star = it->lambda_star;
        break;
      }
    for (size_t i = 0; i < current->path.lambdas.size(); ++i)
      if (current->path.lambdas[i] == lambda_star && current->path.at(i)) {
        scoring_fit = current->path.at(i);
        scoring_data = &current->data;
        break;
      }
  }

  if (alarm_t) {
    outcome.alarm_year = *alarm_t + 1;
    if (scoring_fit) {
      outcome.report = make_report(*scoring_fit, *scoring_data, *alarm_t, config_.threshold);
      for (const auto& cell : outcome.report.cells)
        outcome.detected.insert({cell.location, cell.category});
    }
  }

  if (scoring_fit) {
    const Vector mu0 = scoring_data->pop_vec().array() *
                       (scoring_data->basis().x * scoring_fit->params.theta_m).array().exp();
    outcome.fitted_background = refold(mu0, scoring_data->dims());
    outcome.fitted_years = scoring_data->dims().n3;
  } else {
    // Every monitored year failed; fall back to the sparsest phase-I fit.
    for (size_t i = 0; i < phase1_path.lambdas.size(); ++i)
      if (const ModelFit* f = phase1_path.at(i)) {
        const Vector mu0 = phase1.pop_vec().array() *
                           (phase1.basis().x * f->params.theta_m).array().exp();
        outcome.fitted_background = refold(mu0, phase1.dims());
        outcome.fitted_years = phase1.dims().n3;
        break;
      }
    if (outcome.fitted_years == 0)
      throw std::runtime_error("no usable fit anywhere in the pipeline");
  }
  return outcome;
}

}  // namespace hotspot
