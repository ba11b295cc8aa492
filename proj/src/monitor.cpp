#include "hotspot/monitor.hpp"

#include <algorithm>
#include <cmath>

#include "hotspot/rng.hpp"

namespace hotspot {

bool H0Moments::any_usable() const {
  return std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.usable; });
}

namespace {

/// Row-major flattening of an n1 x n2 matrix, matching the layout of a
/// frontal slice within the tensor storage.
Vector flatten(const Matrix& m) {
  Vector v(m.size());
  long idx = 0;
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) v[idx++] = m(i, j);
  return v;
}

}  // namespace

Vector residual(const ModelFit& fit, const ProblemData& data, int t, bool pearson) {
  const Dims d = data.dims();
  if (t < 0 || t >= d.n3)
    throw std::out_of_range("residual: time index " + std::to_string(t) +
                            " out of range for n3=" + std::to_string(d.n3));
  // Background mean counts: population times exp of the smooth component
  // only (theta_h forced to zero in the predictor).
  const Vector mu0 =
      data.pop_vec().array() * (data.basis().x * fit.params.theta_m).array().exp();
  const Tensor3 mu0_t = refold(mu0, d);

  const Vector obs = flatten(frontal_slice(data.counts().tensor(), t));
  const Vector mean = flatten(frontal_slice(mu0_t, t));
  Vector r = obs - mean;
  if (pearson) r.array() /= mean.array().sqrt();
  return r;
}

double p_plus(const ModelFit& fit, const ProblemData& data, int t, bool pearson) {
  const Vector h = flatten(frontal_slice(fit.h_hat, t));
  const Vector hplus = h.array().max(0.0);
  const double norm2 = hplus.squaredNorm();
  if (norm2 == 0.0) return 0.0;
  return hplus.dot(residual(fit, data, t, pearson)) / std::sqrt(norm2);
}

H0Moments estimate_h0_moments(const FitPath& path, const ProblemData& data, bool pearson) {
  const int n3 = data.dims().n3;
  if (n3 < 5)
    throw std::invalid_argument("phase-I window has " + std::to_string(n3) +
                                " time points; at least 5 are required");
  H0Moments moments;
  moments.phase1_points = n3;
  moments.rows.resize(path.lambdas.size());
  for (size_t i = 0; i < path.lambdas.size(); ++i) {
    auto& row = moments.rows[i];
    row.lambda = path.lambdas[i];
    const ModelFit* fit = path.at(i);
    if (!fit) continue;
    double sum = 0.0, sumsq = 0.0;
    for (int t = 0; t < n3; ++t) {
      const double p = p_plus(*fit, data, t, pearson);
      sum += p;
      sumsq += p * p;
    }
    row.mean = sum / n3;
    row.variance = std::max(0.0, (sumsq - n3 * row.mean * row.mean) / (n3 - 1));
    row.usable = row.variance > 0.0;
  }
  return moments;
}

PTildeResult p_tilde(const FitPath& path, const ProblemData& data, int t,
                     const H0Moments& moments, bool pearson) {
  if (moments.rows.size() != path.lambdas.size())
    throw std::invalid_argument("moments do not match the fitted grid");
  if (!moments.any_usable())
    throw std::invalid_argument("no usable lambda: every penalty was dropped");

  PTildeResult best;
  bool have = false;
  // Grid is descending, so the first maximizer seen is the largest lambda.
  for (size_t i = 0; i < path.lambdas.size(); ++i) {
    const auto& row = moments.rows[i];
    const ModelFit* fit = path.at(i);
    if (!row.usable || !fit) continue;
    const double p = p_plus(*fit, data, t, pearson);
    const double z = (p - row.mean) / std::sqrt(row.variance);
    if (!have || z > best.value) {
      best = PTildeResult{z, path.lambdas[i], i, p};
      have = true;
    }
  }
  return best;
}

double cusum_update(double w_prev, double p_tilde, double d_star) {
  if (w_prev < 0.0) throw std::invalid_argument("CUSUM statistic must be >= 0");
  return std::max(0.0, w_prev + p_tilde - d_star);
}

StreamGenerator standard_normal_stream() {
  return [](std::mt19937_64& rng) {
    static thread_local std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
  };
}

double estimate_arl(const StreamGenerator& gen, double d_star, double limit, int reps,
                    std::uint64_t seed, int cap) {
  if (reps < 1) throw std::invalid_argument("estimate_arl: reps must be >= 1");
  if (cap <= 0) cap = 5000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    std::mt19937_64 rng(derive_seed(seed, "arl-stream", r));
    double w = 0.0;
    int steps = cap;
    for (int t = 1; t <= cap; ++t) {
      w = cusum_update(w, gen(rng), d_star);
      if (w > limit) {
        steps = t;
        break;
      }
    }
    total += steps;
  }
  return total / reps;
}

double calibrate_limit(const StreamGenerator& gen, double d_star, double target_arl0, int reps,
                       std::uint64_t seed) {
  if (!(target_arl0 > 1.0)) throw std::invalid_argument("target ARL0 must exceed 1");
  if (reps < 1000) throw std::invalid_argument("calibration needs at least 1000 replications");

  const int cap = std::max(5000, static_cast<int>(100.0 * target_arl0));
  auto arl = [&](double limit) { return estimate_arl(gen, d_star, limit, reps, seed, cap); };

  double lo = 0.0, hi = 50.0;
  const double arl_lo = arl(lo);
  const double arl_hi = arl(hi);
  if (arl_lo > target_arl0 || arl_hi < target_arl0)
    throw CalibrationError("cannot bracket ARL0=" + std::to_string(target_arl0) +
                           " on [0,50]: endpoint ARLs are " + std::to_string(arl_lo) + " and " +
                           std::to_string(arl_hi));

  double best = hi, best_gap = std::abs(arl_hi - target_arl0);
  for (int it = 0; it < 60 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double a = arl(mid);
    const double gap = std::abs(a - target_arl0);
    if (gap < best_gap) {
      best = mid;
      best_gap = gap;
    }
    if (gap <= 0.05 * target_arl0) return mid;
    (a < target_arl0 ? lo : hi) = mid;
  }
  if (best_gap <= 0.05 * target_arl0) return best;
  throw CalibrationError("bisection did not reach the 5% ARL0 tolerance; closest ARL " +
                         std::to_string(target_arl0 + (best_gap)) + " at L=" +
                         std::to_string(best));
}

std::optional<int> run_chart(CusumChart& chart, int t_begin, int t_end,
                             const std::function<std::optional<ChartStep>(int)>& step_at) {
  for (int t = t_begin; t <= t_end; ++t) {
    ChartPoint point;
    point.t = t;
    const std::optional<ChartStep> step = step_at(t);
    if (step) {
      point.p_tilde = step->p_tilde;
      point.lambda_star = step->lambda_star;
      point.p_plus = step->p_plus;
    } else {
      point.fit_failed = true;
    }
    chart.w = cusum_update(chart.w, point.p_tilde, chart.d_star);
    point.w = chart.w;
    point.alarm = chart.w > chart.limit;
    chart.history.push_back(point);
    if (point.alarm) return t;
  }
  return std::nullopt;
}

}  // namespace hotspot
