#ifndef HOTSPOT_SIMGEN_HPP
#define HOTSPOT_SIMGEN_HPP

#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hotspot/tensor.hpp"

namespace hotspot {

/// Logistic growth parameters per location: asymptote (in 10,000s of
/// people), midpoint year index, and time scale.
struct PhiRow {
  std::string location;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double phi3 = 0.0;
};

struct PhiTable {
  std::vector<PhiRow> rows;

  /// The bundled 49-state table.
  static const PhiTable& builtin();
  static PhiTable load_csv(const std::string& path);
  void save_csv(const std::string& path) const;
  void validate() const;
};

enum class PopulationTrend { increasing, decreasing };

PopulationTrend trend_from_string(const std::string& s);
std::string to_string(PopulationTrend t);

struct ScenarioConfig {
  Dims dims{49, 10, 26};
  double delta = 0.2;            // hot-spot magnitude
  int tau = 15;                  // 1-based change year; shift applies for t > tau
  double hotspot_fraction = 0.10;
  PopulationTrend population_trend = PopulationTrend::decreasing;
  double noise_sd = 0.5;         // population noise, in 10,000s
  std::uint64_t seed = 0;

  void validate() const;
};

/// Logistic population curve (in 10,000s): phi1/(1+exp(-(t-phi2)/phi3))
/// + eps, floored at 0.01. t is the 1-based year index.
double logistic_population(const PhiRow& phi, double t, double eps);

/// Decreasing variant: (phi1/a)/(1+exp((t-phi2)/phi3)) + 1 + eps, same
/// floor.
double decreasing_population(const PhiRow& phi, double a, double t, double eps);

/// The a > 0 equating the noise-free decreasing curve at t=1 to the
/// noise-free increasing curve at t=1. Throws when the target
/// population leaves no positive solution.
double solve_a(const PhiRow& phi);

using Cell = std::pair<int, int>;  // (location, category), 0-based

/// floor(fraction * n1 * n2) distinct cells sampled uniformly without
/// replacement; deterministic given the RNG state.
std::set<Cell> generate_hotspot_set(Dims dims, double fraction, std::mt19937_64& rng);

struct Scenario {
  CountTensor counts;
  Tensor3 population;      // persons (10,000s converted)
  std::set<Cell> truth;    // planted hot-spot cells
  Tensor3 background_mean; // population * 0.2, the in-control Poisson mean
};

/// Draws a full scenario: per-location logistic populations (shared
/// across categories), rate 0.2 plus delta on the planted cells after
/// tau, counts Poisson(population_persons * rate). Populations are in
/// units of 10,000 people, so Poisson means use persons.
Scenario generate_counts(const ScenarioConfig& config, const PhiTable& phi,
                         std::mt19937_64& rng);

/// KL(Poisson(lambda1) || Poisson(lambda0)).
double kl_poisson(double lambda1, double lambda0);

}  // namespace hotspot

#endif  // HOTSPOT_SIMGEN_HPP
