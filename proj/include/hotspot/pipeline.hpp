#ifndef HOTSPOT_PIPELINE_HPP
#define HOTSPOT_PIPELINE_HPP

#include <memory>
#include <set>

#include "hotspot/localize.hpp"
#include "hotspot/monitor.hpp"
#include "hotspot/simgen.hpp"

namespace hotspot {

struct MonitorConfig {
  double d_star = 0.5;
  double target_arl0 = 50.0;
  int calibration_reps = 1000;
  int n_lambda = 10;
  double lambda_min_ratio = 1e-3;
  bool pearson = false;

  void validate() const;
};

struct PipelineConfig {
  SolverConfig solver;
  MonitorConfig monitor;
  BasisConfig basis;
  ThresholdRule threshold;
};

/// First `years` frontal slices of a tensor.
Tensor3 window_years(const Tensor3& t, int years);

struct DetectionOutcome {
  std::optional<int> alarm_year;  // 1-based; nullopt when unalarmed
  std::set<Cell> detected;        // localized cells at the alarm year
  ChartHistory history;           // one entry per monitored year
  double limit = 0.0;
  double d_star = 0.5;
  std::vector<double> grid;
  H0Moments moments;
  HotspotReport report;           // populated when an alarm fired
  Tensor3 fitted_background;      // count-scale background means, scoring fit
  int fitted_years = 0;           // window covered by fitted_background
};

/// Detector contract for the evaluation harness: consume a count tensor
/// with its population offsets and an in-control window length, return
/// the alarm decision plus localization. Benchmark methods can be
/// plugged in behind this interface.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual DetectionOutcome run(const CountTensor& counts, const Tensor3& population,
                               int phase1_years, std::uint64_t seed) const = 0;
};

/// The full monitoring pipeline: fit the penalty path on the phase-I
/// window, estimate null moments per penalty, calibrate the CUSUM limit
/// on a phase-I bootstrap, then refit the path year by year, track the
/// penalty-maximized statistic, and localize at the alarm year.
class PipelineDetector : public Detector {
 public:
  explicit PipelineDetector(PipelineConfig config = {});

  DetectionOutcome run(const CountTensor& counts, const Tensor3& population, int phase1_years,
                       std::uint64_t seed) const override;

  const PipelineConfig& config() const { return config_; }

 private:
  PipelineConfig config_;
};

/// Resampling generator over the phase-I values of the standardized
/// statistic; used to calibrate the control limit without refitting.
StreamGenerator phase1_bootstrap_stream(std::vector<double> pool);

}  // namespace hotspot

#endif  // HOTSPOT_PIPELINE_HPP
