#ifndef HOTSPOT_EVALKIT_HPP
#define HOTSPOT_EVALKIT_HPP

#include <iosfwd>
#include <optional>

#include "hotspot/pipeline.hpp"

namespace hotspot {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
};

/// precision = |D intersect T| / |D| (0 when D is empty), recall with
/// |T|, F the harmonic mean (0 when precision + recall == 0).
Prf precision_recall_f(const std::set<Cell>& detected, const std::set<Cell>& truth);

/// Mean and sample sd (denominator count-1, 0 for a single run) of the
/// detection delay: alarm - tau for alarmed runs, n3 - tau for censored
/// ones. Alarm years are 1-based.
std::pair<double, double> arl1(const std::vector<std::optional<int>>& alarm_years, int tau,
                               int n3);

/// Square root of the mean squared difference between fitted and true
/// background mean counts.
double smse(const Tensor3& fitted_background, const Tensor3& true_background);

struct ReplicationRecord {
  int replication = 0;
  bool failed = false;
  std::string error;
  std::optional<int> alarm_year;
  Prf prf;
  double delay = 0.0;
  double smse_value = 0.0;
};

struct MetricStat {
  double mean = 0.0;
  double sd = 0.0;
};

struct AggregateTable {
  MetricStat precision, recall, f_measure, arl1, smse;
  int replications = 0;  // attempted
  int excluded = 0;      // failed and excluded from the aggregates

  void write_csv(std::ostream& os) const;
  void write_text(std::ostream& os) const;
};

/// Runs `replications` independent scenario draws through the detector
/// and aggregates localization and delay metrics. Replications fan out
/// across `workers` threads; per-replication seeds are derived from
/// `seed`, and aggregation folds in replication order, so results are
/// bit-identical for any worker count. Per-replication failures are
/// recorded and excluded with a count.
AggregateTable run_experiment(const ScenarioConfig& config, int replications,
                              std::uint64_t seed, const Detector& detector, int workers = 0,
                              std::vector<ReplicationRecord>* records = nullptr);

}  // namespace hotspot

#endif  // HOTSPOT_EVALKIT_HPP
