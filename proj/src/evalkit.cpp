#include "hotspot/evalkit.hpp"

#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "hotspot/rng.hpp"

namespace hotspot {

Prf precision_recall_f(const std::set<Cell>& detected, const std::set<Cell>& truth) {
  long hits = 0;
  for (const Cell& c : detected) hits += truth.count(c);
  Prf out;
  out.precision = detected.empty() ? 0.0 : static_cast<double>(hits) / detected.size();
  out.recall = truth.empty() ? 0.0 : static_cast<double>(hits) / truth.size();
  out.f_measure = (out.precision + out.recall == 0.0)
                      ? 0.0
                      : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

namespace {

/// Neumaier-compensated sum; aggregation must not depend on how the
/// replications were scheduled.
double compensated_sum(const std::vector<double>& values) {
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    const double t = sum + v;
    comp += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

MetricStat stat_of(const std::vector<double>& values) {
  MetricStat s;
  if (values.empty()) return s;
  s.mean = compensated_sum(values) / values.size();
  if (values.size() > 1) {
    std::vector<double> sq(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - s.mean;
      sq[i] = d * d;
    }
    s.sd = std::sqrt(compensated_sum(sq) / (values.size() - 1));
  }
  return s;
}

}  // namespace

std::pair<double, double> arl1(const std::vector<std::optional<int>>& alarm_years, int tau,
                               int n3) {
  if (alarm_years.empty()) throw std::invalid_argument("arl1 needs at least one run");
  std::vector<double> delays;
  delays.reserve(alarm_years.size());
  for (const auto& alarm : alarm_years) {
    if (alarm && (*alarm <= tau || *alarm > n3))
      throw std::invalid_argument("alarm year " + std::to_string(*alarm) +
                                  " outside (tau, n3]");
    delays.push_back(alarm ? static_cast<double>(*alarm - tau)
                           : static_cast<double>(n3 - tau));
  }
  const MetricStat s = stat_of(delays);
  return {s.mean, s.sd};
}

double smse(const Tensor3& fitted_background, const Tensor3& true_background) {
  if (!(fitted_background.dims() == true_background.dims()))
    throw std::invalid_argument("SMSE tensors differ: " + to_string(fitted_background.dims()) +
                                " vs " + to_string(true_background.dims()));
  const auto& a = fitted_background.values();
  const auto& b = true_background.values();
  std::vector<double> sq(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sq[i] = d * d;
  }
  return std::sqrt(compensated_sum(sq) / static_cast<double>(a.size()));
}

AggregateTable run_experiment(const ScenarioConfig& config, int replications,
                              std::uint64_t seed, const Detector& detector, int workers,
                              std::vector<ReplicationRecord>* records) {
  config.validate();
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, replications));

  std::vector<ReplicationRecord> rows(replications);
  std::atomic<int> next{0};

  auto worker = [&]() {
    for (int rep = next.fetch_add(1); rep < replications; rep = next.fetch_add(1)) {
      ReplicationRecord& row = rows[rep];
      row.replication = rep;
      try {
        std::mt19937_64 rng(derive_seed(seed, "scenario", rep));
        const Scenario scenario = generate_counts(config, PhiTable::builtin(), rng);
        const DetectionOutcome outcome =
            detector.run(scenario.counts, scenario.population, config.tau,
                         derive_seed(seed, "detector", rep));
        row.alarm_year = outcome.alarm_year;
        row.prf = precision_recall_f(outcome.detected, scenario.truth);
        row.delay = outcome.alarm_year ? static_cast<double>(*outcome.alarm_year - config.tau)
                                       : static_cast<double>(config.dims.n3 - config.tau);
        row.smse_value = smse(outcome.fitted_background,
                              window_years(scenario.background_mean, outcome.fitted_years));
      } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  AggregateTable table;
  table.replications = replications;
  std::vector<double> precision, recall, f, delays, smses;
  for (const auto& row : rows) {
    if (row.failed) {
      ++table.excluded;
      continue;
    }
    precision.push_back(row.prf.precision);
    recall.push_back(row.prf.recall);
    f.push_back(row.prf.f_measure);
    delays.push_back(row.delay);
    smses.push_back(row.smse_value);
  }
  table.precision = stat_of(precision);
  table.recall = stat_of(recall);
  table.f_measure = stat_of(f);
  table.arl1 = stat_of(delays);
  table.smse = stat_of(smses);
  if (records) *records = std::move(rows);
  return table;
}

void AggregateTable::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "metric,mean,sd\n"
     << "precision," << precision.mean << "," << precision.sd << "\n"
     << "recall," << recall.mean << "," << recall.sd << "\n"
     << "f_measure," << f_measure.mean << "," << f_measure.sd << "\n"
     << "arl1," << arl1.mean << "," << arl1.sd << "\n"
     << "smse," << smse.mean << "," << smse.sd << "\n"
     << "replications," << replications << ",\n"
     << "excluded," << excluded << ",\n";
}

void AggregateTable::write_text(std::ostream& os) const {
  auto line = [&os](const char* name, const MetricStat& s) {
    os << "  " << name << ": " << s.mean << " (sd " << s.sd << ")\n";
  };
  os << "replications: " << replications << " (excluded " << excluded << ")\n";
  os.precision(6);
  line("precision", precision);
  line("recall   ", recall);
  line("F-measure", f_measure);
  line("ARL1     ", arl1);
  line("SMSE     ", smse);
}

}  // namespace hotspot
