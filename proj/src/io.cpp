#include "hotspot/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hotspot/rng.hpp"

namespace hotspot {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& field) {
  const std::string t = trim(field);
  return t.empty() || t == "NA" || t == "na";
}

long parse_count(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &pos);
  } catch (const std::exception&) {
    throw ValidationError("non-numeric count '" + t + "' at " + where);
  }
  if (pos != t.size()) throw ValidationError("trailing characters in count '" + t + "' at " + where);
  if (value < 0.0) throw ValidationError("negative count at " + where);
  if (std::abs(value - std::round(value)) > 1e-9)
    throw ValidationError("non-integer count '" + t + "' at " + where);
  return static_cast<long>(std::llround(value));
}

}  // namespace

IngestedCounts ingest_counts(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open counts file: " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("counts file is empty: " + path.string());
  const auto header = split_csv_line(line);
  if (header.size() < 3 || trim(header[0]) != "location" || trim(header[1]) != "year")
    throw ValidationError("counts header must be 'location,year,<category...>'");
  std::vector<std::string> categories(header.begin() + 2, header.end());
  for (auto& c : categories) c = trim(c);

  std::vector<std::string> locations;
  std::map<std::string, int> location_index;
  std::set<int> year_set;
  // cell value per (location, year, category); -1 marks missing
  std::map<std::pair<std::string, int>, std::vector<long>> rows;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ValidationError("line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    const std::string location = trim(fields[0]);
    int year = 0;
    try {
      year = std::stoi(trim(fields[1]));
    } catch (const std::exception&) {
      throw ValidationError("bad year on line " + std::to_string(line_no));
    }
    const auto key = std::make_pair(location, year);
    if (rows.count(key))
      throw ValidationError("duplicate (location, year) pair: " + location + ", " +
                            std::to_string(year));
    if (!location_index.count(location)) {
      location_index[location] = static_cast<int>(locations.size());
      locations.push_back(location);
    }
    year_set.insert(year);
    std::vector<long> values(categories.size(), -1);
    for (size_t c = 0; c < categories.size(); ++c) {
      const std::string& field = fields[c + 2];
      if (is_missing(field)) continue;
      values[c] = parse_count(field, location + "/" + categories[c] + "/" +
                                         std::to_string(year));
    }
    rows[key] = std::move(values);
  }
  if (locations.empty()) throw ValidationError("counts file has no data rows");

  const std::vector<int> years(year_set.begin(), year_set.end());
  const Dims dims{static_cast<int>(locations.size()), static_cast<int>(categories.size()),
                  static_cast<int>(years.size())};

  IngestedCounts result;
  Tensor3 tensor(dims);
  // First pass: fill what we have, marking gaps.
  std::vector<char> present(static_cast<size_t>(dims.size()), 0);
  for (int i = 0; i < dims.n1; ++i)
    for (int t = 0; t < dims.n3; ++t) {
      const auto it = rows.find({locations[i], years[t]});
      if (it == rows.end()) continue;
      for (int j = 0; j < dims.n2; ++j)
        if (it->second[j] >= 0) {
          tensor(i, j, t) = static_cast<double>(it->second[j]);
          present[static_cast<size_t>((static_cast<long>(i) * dims.n2 + j) * dims.n3 + t)] = 1;
        }
    }
  // Second pass: mean-impute gaps from the same (location, category)
  // series, rounded to the nearest integer.
  for (int i = 0; i < dims.n1; ++i)
    for (int j = 0; j < dims.n2; ++j) {
      double sum = 0.0;
      int count = 0;
      for (int t = 0; t < dims.n3; ++t)
        if (present[static_cast<size_t>((static_cast<long>(i) * dims.n2 + j) * dims.n3 + t)]) {
          sum += tensor(i, j, t);
          ++count;
        }
      for (int t = 0; t < dims.n3; ++t) {
        if (present[static_cast<size_t>((static_cast<long>(i) * dims.n2 + j) * dims.n3 + t)])
          continue;
        if (count == 0)
          throw ValidationError("series " + locations[i] + "/" + categories[j] +
                                " has no observed values to impute from");
        tensor(i, j, t) = std::round(sum / count);
        result.imputed.push_back(locations[i] + "/" + categories[j] + "/" +
                                 std::to_string(years[t]));
      }
    }

  tensor.set_axis_labels(1, locations);
  tensor.set_axis_labels(2, categories);
  std::vector<std::string> year_labels(years.size());
  for (size_t t = 0; t < years.size(); ++t) year_labels[t] = std::to_string(years[t]);
  tensor.set_axis_labels(3, year_labels);

  result.counts = CountTensor(std::move(tensor));
  result.years = years;
  return result;
}

Tensor3 ingest_population(const std::filesystem::path& path, const IngestedCounts& counts,
                          bool units_10k) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open population file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("population file is empty");
  const auto header = split_csv_line(line);
  if (header.size() != 3 || trim(header[0]) != "location" || trim(header[1]) != "year" ||
      trim(header[2]) != "population")
    throw ValidationError("population header must be 'location,year,population'");

  std::map<std::pair<std::string, int>, double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 3)
      throw ValidationError("population line " + std::to_string(line_no) + " malformed");
    const std::string location = trim(fields[0]);
    int year = 0;
    double value = 0.0;
    try {
      year = std::stoi(trim(fields[1]));
      value = std::stod(trim(fields[2]));
    } catch (const std::exception&) {
      throw ValidationError("bad population row on line " + std::to_string(line_no));
    }
    if (!(value > 0.0))
      throw ValidationError("nonpositive population for " + location + " in year " +
                            std::to_string(year));
    values[{location, year}] = value * (units_10k ? 1e4 : 1.0);
  }

  const Tensor3& y = counts.counts.tensor();
  const Dims dims = y.dims();
  const auto& locations = *y.axis_labels(1);
  Tensor3 population(dims);
  for (int i = 0; i < dims.n1; ++i)
    for (int t = 0; t < dims.n3; ++t) {
      const auto it = values.find({locations[i], counts.years[t]});
      if (it == values.end())
        throw ValidationError("population missing for " + locations[i] + " in year " +
                              std::to_string(counts.years[t]));
      for (int j = 0; j < dims.n2; ++j) population(i, j, t) = it->second;
    }
  for (int axis = 1; axis <= 3; ++axis)
    if (const auto& labels = y.axis_labels(axis)) population.set_axis_labels(axis, *labels);
  return population;
}

namespace {

std::string default_label(const char* prefix, int index) {
  return std::string(prefix) + std::to_string(index + 1);
}

std::vector<std::string> labels_or_default(const Tensor3& t, int axis, const char* prefix) {
  if (const auto& labels = t.axis_labels(axis)) return *labels;
  std::vector<std::string> out(t.dims()[axis]);
  for (int i = 0; i < t.dims()[axis]; ++i) out[i] = default_label(prefix, i);
  return out;
}

}  // namespace

void emit_counts(const std::filesystem::path& path, const CountTensor& counts,
                 const std::vector<int>& years) {
  const Tensor3& t = counts.tensor();
  const Dims d = t.dims();
  if (static_cast<int>(years.size()) != d.n3)
    throw std::invalid_argument("year list does not match the count tensor");
  const auto locations = labels_or_default(t, 1, "location");
  const auto categories = labels_or_default(t, 2, "category");

  std::ostringstream os;
  os << "location,year";
  for (const auto& c : categories) os << "," << c;
  os << "\n";
  for (int k = 0; k < d.n3; ++k)
    for (int i = 0; i < d.n1; ++i) {
      os << locations[i] << "," << years[k];
      for (int j = 0; j < d.n2; ++j) os << "," << static_cast<long>(t(i, j, k));
      os << "\n";
    }
  atomic_write(path, os.str());
}

void emit_population(const std::filesystem::path& path, const Tensor3& population,
                     const std::vector<int>& years) {
  const Dims d = population.dims();
  if (static_cast<int>(years.size()) != d.n3)
    throw std::invalid_argument("year list does not match the population tensor");
  const auto locations = labels_or_default(population, 1, "location");
  std::ostringstream os;
  os << "location,year,population\n";
  os.precision(17);
  for (int k = 0; k < d.n3; ++k)
    for (int i = 0; i < d.n1; ++i)
      os << locations[i] << "," << years[k] << "," << population(i, 0, k) << "\n";
  atomic_write(path, os.str());
}

void emit_truth(const std::filesystem::path& path, const std::set<Cell>& truth,
                const CountTensor& counts) {
  const auto locations = labels_or_default(counts.tensor(), 1, "location");
  const auto categories = labels_or_default(counts.tensor(), 2, "category");
  std::ostringstream os;
  os << "location_index,category_index,location,category\n";
  for (const auto& [i, j] : truth)
    os << (i + 1) << "," << (j + 1) << "," << locations[i] << "," << categories[j] << "\n";
  atomic_write(path, os.str());
}

void emit_chart_history(const std::filesystem::path& path, const ChartHistory& history,
                        int year_offset) {
  std::ostringstream os;
  os << "t,lambda_star,p_plus,p_tilde,w,alarm,fit_failed\n";
  os.precision(17);
  for (const auto& pt : history)
    os << (pt.t + 1 + year_offset) << "," << pt.lambda_star << "," << pt.p_plus << ","
       << pt.p_tilde << "," << pt.w << "," << (pt.alarm ? 1 : 0) << ","
       << (pt.fit_failed ? 1 : 0) << "\n";
  atomic_write(path, os.str());
}

void emit_report(const std::filesystem::path& path, const HotspotReport& report) {
  std::ostringstream os;
  os << "location,label,category,magnitude,rule\n";
  os.precision(17);
  for (const auto& cell : report.cells) {
    const std::string label = report.location_labels.empty()
                                  ? ""
                                  : report.location_labels[cell.location];
    const std::string category =
        report.category_labels.empty() ? std::to_string(cell.category + 1)
                                       : report.category_labels[cell.category];
    os << (cell.location + 1) << "," << label << "," << category << "," << cell.magnitude
       << "," << report.rule << "\n";
  }
  atomic_write(path, os.str());
}

void emit_report_grid(const std::filesystem::path& path, const HotspotReport& report,
                      int n_locations, int n_categories) {
  Matrix grid = Matrix::Zero(n_locations, n_categories);
  for (const auto& cell : report.cells) grid(cell.location, cell.category) = cell.magnitude;
  std::ostringstream os;
  os << "location";
  for (int j = 0; j < n_categories; ++j)
    os << ","
       << (report.category_labels.empty() ? default_label("category", j)
                                          : report.category_labels[j]);
  os << "\n";
  os.precision(17);
  for (int i = 0; i < n_locations; ++i) {
    os << (report.location_labels.empty() ? default_label("location", i)
                                          : report.location_labels[i]);
    for (int j = 0; j < n_categories; ++j) os << "," << grid(i, j);
    os << "\n";
  }
  atomic_write(path, os.str());
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str());
}

Config Config::from_string(const std::string& text) {
  Config config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line.substr(0, line.find('#')));
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ValidationError("config line " + std::to_string(line_no) +
                            " is not 'key = value': " + line);
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw ValidationError("config line " + std::to_string(line_no) + " has no key");
    if (config.values_.count(key))
      throw ValidationError("duplicate config key '" + key + "'");
    config.values_[key] = value;
  }
  return config;
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stod(it->second);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' is not a number: " + it->second);
  }
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' is not an integer: " + it->second);
  }
}

std::uint64_t Config::get_seed(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    return std::stoull(it->second);
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "' is not a seed: " + it->second);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ValidationError("config key '" + key + "' is not a boolean: " + it->second);
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  const auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::istringstream ss(it->second);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      out.push_back(std::stod(trim(field)));
    } catch (const std::exception&) {
      throw ValidationError("config key '" + key + "' has a non-numeric entry: " + field);
    }
  }
  return out;
}

void Config::require_known(const std::set<std::string>& allowed) const {
  for (const auto& [key, value] : values_)
    if (!allowed.count(key)) throw ValidationError("unknown config key '" + key + "'");
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file for digest: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  std::ostringstream hex;
  hex << std::hex << fnv1a64(buffer.str());
  return hex.str();
}

void RunManifest::write(const std::filesystem::path& path) const {
  nlohmann::json j;
  j["command"] = command;
  j["arguments"] = arguments;
  j["config"] = config;
  j["seed"] = seed;
  j["input_digests"] = input_digests;
  j["outputs"] = outputs;
  j["tool_version"] = "0.1.0";
  j["seed_derivation"] = "substream = splitmix64(splitmix64(seed ^ fnv1a64(purpose)) + index)";
  atomic_write(path, j.dump(2) + "\n");
}

void atomic_write(const std::filesystem::path& path, const std::string& contents) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace hotspot
