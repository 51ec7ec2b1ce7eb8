#ifndef HAWKES_IO_HPP
#define HAWKES_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hawkes/geo.hpp"
#include "hawkes/mcmc.hpp"
#include "hawkes/types.hpp"

namespace hawkes {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_double(const std::string& s, const char* what, std::size_t row) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("row ") + std::to_string(row) + ": bad " + what + " value '" +
                             s + "'");
  }
}

}  // namespace detail

/// Loads the events CSV (header event_id,t_weeks,lon,lat,region_id; the
/// location columns may be absent for coarse-only data) and joins
/// densities from the region table when one is given.
inline Catalog load_events(const std::string& path, const RegionTable* regions = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_events: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("load_events: empty file " + path);
  const auto header = detail::split_csv_line(line);
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  };
  const auto c_t = column("t_weeks");
  const auto c_lon = column("lon");
  const auto c_lat = column("lat");
  const auto c_region = column("region_id");
  if (!c_t) throw std::runtime_error("load_events: missing column t_weeks");
  if (c_lon.has_value() != c_lat.has_value())
    throw std::runtime_error("load_events: lon and lat must both be present or both absent");
  const bool coarse_only = !c_lon.has_value();
  if (coarse_only && !c_region)
    throw std::runtime_error("load_events: coarse-only data requires a region_id column");

  std::vector<Event> events;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < header.size())
      throw std::runtime_error("load_events: row " + std::to_string(row) + ": too few fields");
    Event e;
    e.t = detail::parse_double(fields[*c_t], "t_weeks", row);
    if (!(e.t >= 0.0) || !std::isfinite(e.t))
      throw std::runtime_error("load_events: row " + std::to_string(row) + ": invalid time");
    if (!coarse_only) {
      const std::string& slon = fields[*c_lon];
      const std::string& slat = fields[*c_lat];
      if (slon.empty() || slat.empty())
        throw std::runtime_error("load_events: row " + std::to_string(row) + ": missing location");
      e.lon = detail::parse_double(slon, "lon", row);
      e.lat = detail::parse_double(slat, "lat", row);
    } else {
      e.lon = std::numeric_limits<double>::quiet_NaN();
      e.lat = std::numeric_limits<double>::quiet_NaN();
    }
    if (c_region && fields.size() > *c_region) e.region_id = fields[*c_region];
    if (regions != nullptr && !e.region_id.empty()) {
      if (!regions->contains(e.region_id))
        throw std::runtime_error("load_events: row " + std::to_string(row) +
                                 ": unresolvable region id '" + e.region_id + "'");
      e.density = regions->at(e.region_id).density;
    }
    events.push_back(std::move(e));
  }
  return Catalog::sorted(std::move(events), coarse_only);
}

inline void write_events_csv(const std::string& path, const Catalog& catalog) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_events_csv: cannot open " + path);
  out << std::setprecision(17);
  // coarse catalogs have no usable coordinates; omit the columns entirely
  // so the file reads back in coarse-only mode
  if (catalog.coarse_only())
    out << "event_id,t_weeks,region_id\n";
  else
    out << "event_id,t_weeks,lon,lat,region_id\n";
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const Event& e = catalog[i];
    out << i << ',' << e.t << ',';
    if (!catalog.coarse_only()) out << e.lon << ',' << e.lat << ',';
    out << e.region_id << '\n';
  }
}

// ---------------------------------------------------------------------------
// Chain persistence

inline void write_chain_csv(const std::string& path, const ChainOutput& chain,
                            std::size_t burn_in) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_chain_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "iteration,mu0,tau_t,xi0,sigma_x,sigma_t,loglik\n";
  for (std::size_t i = 0; i < chain.draws.size(); ++i) {
    out << burn_in + i + 1;
    for (double v : chain.draws[i]) out << ',' << v;
    out << ',' << chain.loglik_trace[i] << '\n';
  }
}

/// Sidecar with acceptance rates, seed, timing, and the config hash.
inline void write_chain_sidecar(const std::string& path, const ChainOutput& chain,
                                std::size_t config_hash) {
  nlohmann::json j;
  j["seed"] = chain.seed;
  j["seconds"] = chain.seconds;
  j["config_hash"] = config_hash;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    j["acceptance_rates"][kParamNames[k]] = chain.acceptance_rate(k);
    j["final_steps"][kParamNames[k]] = chain.final_steps[k];
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_chain_sidecar: cannot open " + path);
  out << j.dump(2) << '\n';
}

/// Reads a chain CSV back into per-parameter draws (column order of
/// kParamNames, then loglik).
inline std::vector<std::vector<double>> read_chain_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_chain_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_chain_csv: empty file " + path);
  std::vector<std::vector<double>> columns(kParamCount + 1);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != kParamCount + 2)
      throw std::runtime_error("read_chain_csv: row " + std::to_string(row) + ": bad field count");
    for (std::size_t k = 0; k < kParamCount + 1; ++k)
      columns[k].push_back(detail::parse_double(fields[k + 1], "draw", row));
  }
  return columns;
}

// ---------------------------------------------------------------------------
// Run configuration

/// Everything the CLI needs for a run; loaded from a single JSON
/// document, with each flag overriding its key.
struct RunConfig {
  std::string events_path;
  std::string regions_path;
  std::string densities_path;
  std::string out_dir = ".";
  std::string region_id_key = "id";
  std::string density_key = "density";
  Variant variant = Variant::constant;
  Precision precision = Precision::dbl;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::optional<double> area_override;
  std::size_t chains = 4;
  std::size_t iterations = 5000;
  std::size_t burn_in = 1000;
  std::size_t refresh_period = 1;
  std::array<double, kParamCount> initial{0.5, 5.0, 0.5, 0.1, 2.0};
  std::array<double, kParamCount> step_sizes{0.1, 0.1, 0.1, 0.1, 0.1};
  std::string mile_convention = "averaged";
  std::string density_convention = "sqrt";

  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.events_path = j.value("events", c.events_path);
    c.regions_path = j.value("regions", c.regions_path);
    c.densities_path = j.value("densities", c.densities_path);
    c.out_dir = j.value("out", c.out_dir);
    c.region_id_key = j.value("region_id_key", c.region_id_key);
    c.density_key = j.value("density_key", c.density_key);
    if (j.contains("variant")) c.variant = variant_from_string(j.at("variant"));
    if (j.contains("precision")) c.precision = precision_from_string(j.at("precision"));
    c.workers = j.value("workers", c.workers);
    c.seed = j.value("seed", c.seed);
    if (j.contains("area")) c.area_override = j.at("area").get<double>();
    c.chains = j.value("chains", c.chains);
    c.iterations = j.value("iterations", c.iterations);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.refresh_period = j.value("refresh_period", c.refresh_period);
    if (j.contains("initial"))
      for (std::size_t k = 0; k < kParamCount; ++k)
        c.initial[k] = j.at("initial").value(kParamNames[k], c.initial[k]);
    if (j.contains("step_sizes"))
      for (std::size_t k = 0; k < kParamCount; ++k)
        c.step_sizes[k] = j.at("step_sizes").value(kParamNames[k], c.step_sizes[k]);
    c.mile_convention = j.value("mile_convention", c.mile_convention);
    c.density_convention = j.value("density_convention", c.density_convention);
    return c;
  }

  static RunConfig from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("RunConfig: cannot open " + path);
    nlohmann::json j;
    in >> j;
    return from_json(j);
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["events"] = events_path;
    j["regions"] = regions_path;
    j["densities"] = densities_path;
    j["out"] = out_dir;
    j["variant"] = to_string(variant);
    j["precision"] = to_string(precision);
    j["workers"] = workers;
    j["seed"] = seed;
    if (area_override) j["area"] = *area_override;
    j["chains"] = chains;
    j["iterations"] = iterations;
    j["burn_in"] = burn_in;
    j["refresh_period"] = refresh_period;
    for (std::size_t k = 0; k < kParamCount; ++k) {
      j["initial"][kParamNames[k]] = initial[k];
      j["step_sizes"][kParamNames[k]] = step_sizes[k];
    }
    j["mile_convention"] = mile_convention;
    j["density_convention"] = density_convention;
    return j;
  }

  std::size_t hash() const { return std::hash<std::string>{}(to_json().dump()); }
};

}  // namespace hawkes

#endif  // HAWKES_IO_HPP
