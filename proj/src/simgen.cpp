#include "hotspot/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hotspot {

const PhiTable& PhiTable::builtin() {
  static const PhiTable table{{
      {"Alabama", 80.6404, -4.0135, 66.0162},
      {"Arizona", 82.7195, 2.6681, 12.4089},
      {"Arkansas", 37.4245, -15.4787, 28.1058},
      {"California", 541.8391, -8.4830, 33.6786},
      {"Colorado", 98.7504, 17.0426, 28.2669},
      {"Connecticut", 38.0542, -33.2342, 20.1424},
      {"Delaware", 18.8717, 23.0528, 40.3679},
      {"District of Columbia", 84.8814, 234.3312, 85.0780},
      {"Florida", 472.3076, 32.7741, 35.0153},
      {"Georgia", 128.0025, -1.0137, 17.0737},
      {"Idaho", 47.9991, 46.7379, 38.0065},
      {"Illinois", 130.1208, -16.1579, 8.3610},
      {"Indiana", 87.0352, -26.3047, 42.7584},
      {"Iowa", 110.5464, 168.3283, 154.6580},
      {"Kansas", 35.6595, -33.1733, 38.3685},
      {"Kentucky", 61.6822, -21.2109, 47.4401},
      {"Louisiana", 138.2943, 170.8833, 212.9227},
      {"Maine", 13.9479, -37.1852, 19.3080},
      {"Maryland", 107.4051, 10.3277, 56.6712},
      {"Massachusetts", 172.8622, 72.9025, 113.4860},
      {"Michigan", 100.0291, -9.4310, 3.8436},
      {"Minnesota", 79.6624, -10.0102, 41.2455},
      {"Mississippi", 30.6879, -20.8025, 12.1407},
      {"Missouri", 68.6103, -26.4275, 23.9467},
      {"Montana", 65.8753, 179.3000, 92.5485},
      {"Nebraska", 90.1254, 168.2284, 109.1338},
      {"Nevada", 35.6347, 6.3429, 11.1336},
      {"New Hampshire", 13.8539, -13.8127, 10.6643},
      {"New Jersey", 92.5943, -21.7473, 13.7113},
      {"New Mexico", 24.5653, -12.2919, 20.4325},
      {"New York", 187.9958, -10.3970, 3.8098},
      {"North Carolina", 209.7977, 25.8509, 34.7033},
      {"North Dakota", 61.2268, 266.2989, 120.0412},
      {"Ohio", 120.8197, -61.9571, 26.2627},
      {"Oklahoma", 170.7639, 136.1955, 92.1323},
      {"Oregon", 80.6280, 22.5818, 43.4817},
      {"Pennsylvania", 119.5912, -156.0891, 4.3750},
      {"Rhode Island", 10.6925, -17.1867, 7.8247},
      {"South Carolina", 287.8320, 116.8317, 59.0815},
      {"South Dakota", 63.0675, 210.4712, 100.9319},
      {"Tennessee", 126.5228, 18.9025, 45.5198},
      {"Texas", 1296.6000, 79.1413, 42.5022},
      {"Utah", 87.5383, 44.0237, 32.6645},
      {"Vermont", 287.8320, 116.8317, 59.0815},
      {"Virginia", 287.8320, 116.8317, 59.0815},
      {"Washington", 72.4669, 0.2911, 6.1436},
      {"West Virginia", 40.7546, 388.1061, 1747.3000},
      {"Wisconsin", 63.7490, -29.2415, 23.1078},
      {"Wyoming", 60.6138, 173.6913, 66.5942},
  }};
  return table;
}

void PhiTable::validate() const {
  if (rows.empty()) throw std::invalid_argument("phi table is empty");
  for (const auto& r : rows) {
    if (!(r.phi1 > 0.0)) throw std::invalid_argument("phi1 must be positive for " + r.location);
    if (!std::isfinite(r.phi1) || !std::isfinite(r.phi2) || !std::isfinite(r.phi3))
      throw std::invalid_argument("phi row for " + r.location + " has a non-finite value");
  }
}

PhiTable PhiTable::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open phi table: " + path);
  PhiTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("phi table is empty: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    PhiRow row;
    std::string field;
    if (!std::getline(ss, row.location, ',')) continue;
    auto next = [&](double& out) {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("phi table row for " + row.location + " is incomplete");
      out = std::stod(field);
    };
    next(row.phi1);
    next(row.phi2);
    next(row.phi3);
    table.rows.push_back(std::move(row));
  }
  table.validate();
  return table;
}

void PhiTable::save_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write phi table: " + path);
  out << "location,phi1,phi2,phi3\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.location << "," << r.phi1 << "," << r.phi2 << "," << r.phi3 << "\n";
}

PopulationTrend trend_from_string(const std::string& s) {
  if (s == "increasing") return PopulationTrend::increasing;
  if (s == "decreasing") return PopulationTrend::decreasing;
  throw std::invalid_argument("population trend must be 'increasing' or 'decreasing', got '" +
                              s + "'");
}

std::string to_string(PopulationTrend t) {
  return t == PopulationTrend::increasing ? "increasing" : "decreasing";
}

void ScenarioConfig::validate() const {
  if (dims.n1 <= 0 || dims.n2 <= 0 || dims.n3 <= 0)
    throw std::invalid_argument("scenario dims must be positive");
  if (!(hotspot_fraction > 0.0 && hotspot_fraction < 1.0))
    throw std::invalid_argument("hotspot fraction must lie in (0, 1)");
  if (tau < 1 || tau >= dims.n3)
    throw std::invalid_argument("change year tau must satisfy 1 <= tau < n3");
  if (delta < 0.0) throw std::invalid_argument("hot-spot magnitude delta must be >= 0");
  if (noise_sd < 0.0) throw std::invalid_argument("population noise sd must be >= 0");
}

namespace {
constexpr double kPopulationFloor = 0.01;  // in 10,000s
constexpr double kPersonsPerUnit = 1e4;
constexpr double kBackgroundRate = 0.2;
}  // namespace

double logistic_population(const PhiRow& phi, double t, double eps) {
  const double value = phi.phi1 / (1.0 + std::exp(-(t - phi.phi2) / phi.phi3)) + eps;
  return std::max(value, kPopulationFloor);
}

double decreasing_population(const PhiRow& phi, double a, double t, double eps) {
  const double value = (phi.phi1 / a) / (1.0 + std::exp((t - phi.phi2) / phi.phi3)) + 1.0 + eps;
  return std::max(value, kPopulationFloor);
}

double solve_a(const PhiRow& phi) {
  const double target = phi.phi1 / (1.0 + std::exp(-(1.0 - phi.phi2) / phi.phi3));
  if (!(target > 1.0))
    throw std::invalid_argument("initial population " + std::to_string(target) + " for " +
                                phi.location + " leaves no positive matching constant");
  const double numerator = phi.phi1 / (1.0 + std::exp((1.0 - phi.phi2) / phi.phi3));
  return numerator / (target - 1.0);
}

std::set<Cell> generate_hotspot_set(Dims dims, double fraction, std::mt19937_64& rng) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("hotspot fraction must lie in (0, 1)");
  const long total = static_cast<long>(dims.n1) * dims.n2;
  const long count = static_cast<long>(std::floor(fraction * total));

  // Partial Fisher-Yates over the flattened cell indices.
  std::vector<long> idx(total);
  for (long i = 0; i < total; ++i) idx[i] = i;
  std::set<Cell> cells;
  for (long k = 0; k < count; ++k) {
    std::uniform_int_distribution<long> pick(k, total - 1);
    std::swap(idx[k], idx[pick(rng)]);
    cells.insert({static_cast<int>(idx[k] / dims.n2), static_cast<int>(idx[k] % dims.n2)});
  }
  return cells;
}

Scenario generate_counts(const ScenarioConfig& config, const PhiTable& phi,
                         std::mt19937_64& rng) {
  config.validate();
  phi.validate();
  if (static_cast<int>(phi.rows.size()) < config.dims.n1)
    throw std::invalid_argument("phi table has " + std::to_string(phi.rows.size()) +
                                " rows but the scenario needs " + std::to_string(config.dims.n1));
  const Dims d = config.dims;

  Scenario scenario;
  scenario.truth = generate_hotspot_set(d, config.hotspot_fraction, rng);

  // Population is shared across categories: one curve + noise per
  // (location, year), in 10,000s, then converted to persons.
  std::normal_distribution<double> noise(0.0, config.noise_sd);
  Matrix pop_units(d.n1, d.n3);
  for (int i = 0; i < d.n1; ++i) {
    const PhiRow& row = phi.rows[i];
    const double a =
        config.population_trend == PopulationTrend::decreasing ? solve_a(row) : 0.0;
    for (int t = 0; t < d.n3; ++t) {
      const double eps = config.noise_sd > 0.0 ? noise(rng) : 0.0;
      const double year = t + 1.0;
      pop_units(i, t) = config.population_trend == PopulationTrend::increasing
                            ? logistic_population(row, year, eps)
                            : decreasing_population(row, a, year, eps);
    }
  }

  Tensor3 population(d);
  Tensor3 background(d);
  Tensor3 counts(d);
  for (int i = 0; i < d.n1; ++i)
    for (int j = 0; j < d.n2; ++j) {
      const bool hot = scenario.truth.count({i, j}) > 0;
      for (int t = 0; t < d.n3; ++t) {
        const double persons = pop_units(i, t) * kPersonsPerUnit;
        const double rate =
            kBackgroundRate + ((hot && (t + 1) > config.tau) ? config.delta : 0.0);
        population(i, j, t) = persons;
        background(i, j, t) = persons * kBackgroundRate;
        std::poisson_distribution<long> poisson(persons * rate);
        counts(i, j, t) = static_cast<double>(poisson(rng));
      }
    }

  if (static_cast<int>(phi.rows.size()) >= d.n1) {
    std::vector<std::string> names(d.n1);
    for (int i = 0; i < d.n1; ++i) names[i] = phi.rows[i].location;
    counts.set_axis_labels(1, names);
    population.set_axis_labels(1, std::move(names));
  }

  scenario.counts = CountTensor(std::move(counts));
  scenario.population = std::move(population);
  scenario.background_mean = std::move(background);
  return scenario;
}

double kl_poisson(double lambda1, double lambda0) {
  if (!(lambda1 > 0.0) || !(lambda0 > 0.0))
    throw std::invalid_argument("KL divergence needs positive Poisson rates");
  return lambda0 - lambda1 + lambda1 * std::log(lambda1 / lambda0);
}

}  // namespace hotspot
