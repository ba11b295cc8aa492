#ifndef HOTSPOT_IO_HPP
#define HOTSPOT_IO_HPP

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hotspot/evalkit.hpp"

namespace hotspot {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IngestedCounts {
  CountTensor counts;
  std::vector<int> years;            // ascending, as read
  std::vector<std::string> imputed;  // "location/category/year" cells filled by imputation
};

/// Reads the long-format count table: header `location,year,<category...>`,
/// one row per (location, year). Locations and categories keep their
/// first-appearance order, years are sorted ascending. Missing cells
/// (empty or NA) are imputed with the rounded mean of the same
/// (location, category) series; imputed cells are logged in the result.
IngestedCounts ingest_counts(const std::filesystem::path& path);

/// Reads `location,year,population` and broadcasts the per-location
/// series across every category of `counts`. Every (location, year)
/// pair of the count tensor must be covered. With units_10k the values
/// are multiplied by 10,000.
Tensor3 ingest_population(const std::filesystem::path& path, const IngestedCounts& counts,
                          bool units_10k = false);

void emit_counts(const std::filesystem::path& path, const CountTensor& counts,
                 const std::vector<int>& years);
void emit_population(const std::filesystem::path& path, const Tensor3& population,
                     const std::vector<int>& years);
void emit_truth(const std::filesystem::path& path, const std::set<Cell>& truth,
                const CountTensor& counts);
void emit_chart_history(const std::filesystem::path& path, const ChartHistory& history,
                        int year_offset = 0);
void emit_report(const std::filesystem::path& path, const HotspotReport& report);
/// location x category grid of reported magnitudes (zero elsewhere),
/// for external choropleth plotting.
void emit_report_grid(const std::filesystem::path& path, const HotspotReport& report,
                      int n_locations, int n_categories);

/// Flat key = value configuration with strict key checking.
class Config {
 public:
  static Config load(const std::filesystem::path& path);
  static Config from_string(const std::string& text);

  void set(const std::string& key, const std::string& value);  // CLI override; wins
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;  // comma separated

  /// Throws ValidationError when a key outside `allowed` is present.
  void require_known(const std::set<std::string>& allowed) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Non-cryptographic digest of a file's bytes (FNV-1a 64), hex encoded.
std::string file_digest(const std::filesystem::path& path);

/// Reproducibility record written next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::vector<std::string> outputs;

  void write(const std::filesystem::path& path) const;
};

/// write-temp-then-rename so partially written outputs never appear.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace hotspot

#endif  // HOTSPOT_IO_HPP
