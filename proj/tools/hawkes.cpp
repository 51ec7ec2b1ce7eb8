// Command-line front end: simulate, loglik, bench, fit, diagnose,
// lengthscales.  A single JSON config file supplies defaults; every flag
// overrides its config key.  Invalid configuration exits with status 2,
// runtime failures with status 1.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hawkes/diagnostics.hpp"
#include "hawkes/engine.hpp"
#include "hawkes/io.hpp"
#include "hawkes/mcmc.hpp"
#include "hawkes/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace hawkes;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> precision;
  std::optional<std::string> variant;
  std::optional<std::string> out;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed, "random seed (overrides config)");
    cmd->add_option("--workers", workers, "likelihood worker count (overrides config)");
    cmd->add_option("--precision", precision, "single or double (overrides config)")
        ->check(CLI::IsMember({"single", "double"}));
    cmd->add_option("--variant", variant, "constant or varying (overrides config)")
        ->check(CLI::IsMember({"constant", "varying"}));
    cmd->add_option("--out", out, "output path (overrides config)");
  }

  RunConfig resolve() const {
    RunConfig c = config_path.empty() ? RunConfig{} : RunConfig::from_file(config_path);
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    if (precision) c.precision = precision_from_string(*precision);
    if (variant) c.variant = variant_from_string(*variant);
    if (out) c.out_dir = *out;
    return c;
  }
};

std::optional<RegionTable> load_regions(const RunConfig& config) {
  if (config.regions_path.empty()) return std::nullopt;
  RegionTable table =
      RegionTable::from_geojson(config.regions_path, config.region_id_key, config.density_key);
  if (!config.densities_path.empty()) table.load_density_csv(config.densities_path);
  return table;
}

/// Area of the spatial domain: the explicit override, the catalog
/// bounding box, or (for coarse-only data) the region-table bounding box.
double resolve_area(const RunConfig& config, const Catalog& catalog,
                    const std::optional<RegionTable>& regions) {
  if (config.area_override) return *config.area_override;
  if (!catalog.coarse_only()) return domain_area(catalog);
  if (!regions)
    throw std::invalid_argument("coarse-only events need either an area override or regions");
  double lon_min = 0, lon_max = 0, lat_min = 0, lat_max = 0;
  bool first = true;
  auto feed = [&](double lon, double lat) {
    if (first) {
      lon_min = lon_max = lon;
      lat_min = lat_max = lat;
      first = false;
      return;
    }
    lon_min = std::min(lon_min, lon);
    lon_max = std::max(lon_max, lon);
    lat_min = std::min(lat_min, lat);
    lat_max = std::max(lat_max, lat);
  };
  for (const Region& r : regions->regions()) {
    if (r.is_point) {
      feed(r.point[0], r.point[1]);
      continue;
    }
    for (const auto& poly : r.polygons)
      for (const Point& p : poly.outer) feed(p[0], p[1]);
  }
  if (first) throw std::invalid_argument("region table has no geometry for the area");
  const double w = std::max(lon_max - lon_min, 2e-6);
  const double h = std::max(lat_max - lat_min, 2e-6);
  return w * h;
}

HawkesParams initial_params(const RunConfig& config, double area) {
  HawkesParams p;
  p.mu0 = config.initial[0];
  p.tau_t = config.initial[1];
  p.xi0 = config.initial[2];
  p.sigma_x = config.initial[3];
  p.sigma_t = config.initial[4];
  p.area = area;
  p.variant = config.variant;
  return p;
}

ChainConfig chain_config(const RunConfig& config, double area, std::size_t chain_index) {
  ChainConfig c;
  c.iterations = config.iterations;
  c.burn_in = config.burn_in;
  c.seed = config.seed + chain_index;
  c.initial = initial_params(config, area);
  c.step_sizes = config.step_sizes;
  c.refresh_period = config.refresh_period;
  c.precision = config.precision;
  c.workers = config.workers;
  c.validate();
  return c;
}

/// Per-parameter summaries and convergence diagnostics over a set of
/// chain draw tables (each kParamCount+1 columns, loglik last).
json summarize_chains(const std::vector<std::vector<std::vector<double>>>& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnose: no chains");
  json out;
  out["chains"] = chains.size();
  out["draws_per_chain"] = chains[0][0].size();
  for (std::size_t k = 0; k <= kParamCount; ++k) {
    const std::string name = k < kParamCount ? kParamNames[k] : "loglik";
    DrawMatrix per_chain;
    std::vector<double> pooled;
    for (const auto& c : chains) {
      per_chain.push_back(c[k]);
      pooled.insert(pooled.end(), c[k].begin(), c[k].end());
    }
    const Summary s = summarize(pooled);
    json entry;
    entry["median"] = s.median;
    entry["lower"] = s.lower;
    entry["upper"] = s.upper;
    const DiagnosticResult rhat = split_rank_rhat(per_chain);
    const DiagnosticResult bulk = ess(per_chain, EssKind::bulk);
    const DiagnosticResult tail = ess(per_chain, EssKind::tail);
    entry["rhat"] = rhat.value;
    entry["ess_bulk"] = bulk.value;
    entry["ess_tail"] = tail.value;
    entry["degenerate"] = rhat.degenerate;
    out["parameters"][name] = entry;
  }
  std::vector<double> mu0, xi0;
  for (const auto& c : chains) {
    mu0.insert(mu0.end(), c[0].begin(), c[0].end());
    xi0.insert(xi0.end(), c[2].begin(), c[2].end());
  }
  const Summary frac = summarize(contagion_fraction(mu0, xi0));
  out["contagion_fraction"] = {{"median", frac.median}, {"lower", frac.lower},
                               {"upper", frac.upper}};
  return out;
}

void print_summary(const json& summary) {
  std::printf("%-10s %12s %12s %12s %8s %10s %10s\n", "parameter", "median", "2.5%", "97.5%",
              "rhat", "ess_bulk", "ess_tail");
  for (std::size_t k = 0; k <= kParamCount; ++k) {
    const std::string name = k < kParamCount ? kParamNames[k] : "loglik";
    const json& e = summary["parameters"][name];
    std::printf("%-10s %12.6g %12.6g %12.6g %8.4f %10.1f %10.1f\n", name.c_str(),
                e["median"].get<double>(), e["lower"].get<double>(), e["upper"].get<double>(),
                e["rhat"].get<double>(), e["ess_bulk"].get<double>(),
                e["ess_tail"].get<double>());
  }
  const json& f = summary["contagion_fraction"];
  std::printf("%-10s %12.6g %12.6g %12.6g\n", "contagion", f["median"].get<double>(),
              f["lower"].get<double>(), f["upper"].get<double>());
}

// -------------------------------------------------------------------------
// Subcommands

int cmd_simulate(const CommonFlags& common, const SimConfig& base, const std::string& truth_path) {
  const RunConfig config = common.resolve();
  SimConfig sim = base;
  sim.seed = config.seed;
  sim.variant = config.variant;
  std::optional<RegionTable> regions = load_regions(config);
  if (regions) sim.regions = &*regions;
  if (sim.variant == Variant::varying && !regions)
    throw std::invalid_argument("simulate: the varying variant needs --config with regions");
  const Catalog catalog = simulate_catalog(sim);

  const std::string events_out = common.out.value_or(
      config.events_path.empty() ? "events.csv" : config.events_path);
  write_events_csv(events_out, catalog);

  json truth;
  truth["immigrant_rate"] = sim.immigrant_rate;
  truth["horizon"] = sim.horizon;
  truth["xi0"] = sim.xi0;
  truth["sigma_x"] = sim.sigma_x;
  truth["sigma_t"] = sim.sigma_t;
  truth["variant"] = to_string(sim.variant);
  truth["seed"] = sim.seed;
  truth["n"] = catalog.size();
  const std::string tp = truth_path.empty() ? events_out + ".truth.json" : truth_path;
  std::ofstream out(tp);
  out << truth.dump(2) << '\n';
  std::printf("wrote %zu events to %s (truth: %s)\n", catalog.size(), events_out.c_str(),
              tp.c_str());
  return 0;
}

int cmd_loglik(const CommonFlags& common) {
  const RunConfig config = common.resolve();
  if (config.events_path.empty()) throw std::invalid_argument("loglik: no events file configured");
  const std::optional<RegionTable> regions = load_regions(config);
  const Catalog catalog = load_events(config.events_path, regions ? &*regions : nullptr);
  HawkesParams params = initial_params(config, resolve_area(config, catalog, regions));
  const double value = log_likelihood(catalog, params,
                                      make_partition(catalog.size(), config.workers),
                                      config.precision);
  std::printf("loglik %.17g\n", value);
  return 0;
}

int cmd_bench(const CommonFlags& common, std::vector<std::size_t> sizes,
              std::vector<std::size_t> worker_counts, std::size_t reps, bool report_slope) {
  const RunConfig config = common.resolve();
  if (sizes.empty()) sizes = {10000, 20000, 40000};
  if (worker_counts.empty()) worker_counts = {config.workers};
  const auto rows = benchmark_eval(sizes, worker_counts, reps, config.precision, config.variant,
                                   config.seed + 42);
  if (common.out) {
    std::ofstream out(*common.out);
    if (!out) throw std::runtime_error("bench: cannot open " + *common.out);
    write_benchmark_csv(out, rows);
    std::printf("wrote %zu benchmark rows to %s\n", rows.size(), common.out->c_str());
  } else {
    write_benchmark_csv(std::cout, rows);
  }
  if (report_slope) {
    std::vector<std::pair<std::size_t, double>> points;
    for (const auto& r : rows)
      if (r.workers == worker_counts.front()) points.emplace_back(r.n, r.seconds_median);
    std::printf("loglog_slope %.4f\n", fitted_loglog_slope(points));
  }
  return 0;
}

int cmd_fit(const CommonFlags& common, std::optional<std::size_t> chains_flag,
            std::optional<std::size_t> iterations_flag, std::optional<std::size_t> burn_in_flag) {
  RunConfig config = common.resolve();
  if (chains_flag) config.chains = *chains_flag;
  if (iterations_flag) config.iterations = *iterations_flag;
  if (burn_in_flag) config.burn_in = *burn_in_flag;
  if (config.events_path.empty()) throw std::invalid_argument("fit: no events file configured");
  const std::optional<RegionTable> regions = load_regions(config);
  const Catalog catalog = load_events(config.events_path, regions ? &*regions : nullptr);
  if (catalog.coarse_only() && !regions)
    throw std::invalid_argument("fit: coarse-only events require a region table");
  const double area = resolve_area(config, catalog, regions);
  fs::create_directories(config.out_dir);
  const std::size_t config_hash = config.hash();

  std::vector<std::vector<std::vector<double>>> tables;
  for (std::size_t i = 0; i < config.chains; ++i) {
    const ChainConfig cc = chain_config(config, area, i);
    ChainOutput chain;
    try {
      chain = regions ? run_cut_posterior(cc, catalog, *regions)
                      : run_fixed_posterior(cc, catalog);
    } catch (const std::exception& e) {
      throw std::runtime_error("fit: chain " + std::to_string(i) + " failed: " + e.what());
    }
    const std::string stem = config.out_dir + "/chain_" + std::to_string(i);
    write_chain_csv(stem + ".csv", chain, config.burn_in);
    write_chain_sidecar(stem + ".json", chain, config_hash);
    tables.push_back(read_chain_csv(stem + ".csv"));
    std::printf("chain %zu: %zu draws in %.1fs\n", i, chain.draws.size(), chain.seconds);
  }
  const json summary = summarize_chains(tables);
  std::ofstream out(config.out_dir + "/summary.json");
  out << summary.dump(2) << '\n';
  print_summary(summary);
  return 0;
}

int cmd_diagnose(const CommonFlags& common, std::vector<std::string> chain_paths,
                 const std::string& dir) {
  if (!dir.empty())
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("chain_", 0) == 0 && entry.path().extension() == ".csv")
        chain_paths.push_back(entry.path().string());
    }
  std::sort(chain_paths.begin(), chain_paths.end());
  if (chain_paths.empty()) throw std::invalid_argument("diagnose: no chain files given");
  std::vector<std::vector<std::vector<double>>> tables;
  for (const auto& p : chain_paths) tables.push_back(read_chain_csv(p));
  const json summary = summarize_chains(tables);
  if (common.out) {
    std::ofstream out(*common.out);
    out << summary.dump(2) << '\n';
  }
  print_summary(summary);
  return 0;
}

int cmd_lengthscales(const CommonFlags& common, std::vector<std::string> chain_paths,
                     const std::string& counties_path, const std::string& density_convention,
                     const std::string& mile_convention) {
  const RunConfig config = common.resolve();
  if (chain_paths.empty()) throw std::invalid_argument("lengthscales: no chain files given");
  const DensityConvention dconv = density_convention_from_string(
      density_convention.empty() ? config.density_convention : density_convention);
  const MileConvention mconv = mile_convention_from_string(
      mile_convention.empty() ? config.mile_convention : mile_convention);

  std::vector<double> sigma_x_draws;
  for (const auto& p : chain_paths) {
    const auto columns = read_chain_csv(p);
    sigma_x_draws.insert(sigma_x_draws.end(), columns[3].begin(), columns[3].end());
  }
  if (sigma_x_draws.empty()) throw std::invalid_argument("lengthscales: chains have no draws");

  std::ifstream in(counties_path);
  if (!in) throw std::runtime_error("lengthscales: cannot open " + counties_path);
  std::string line;
  std::getline(in, line);  // header: county,density,latitude
  std::printf("%-28s %12s %10s %12s %12s %12s\n", "county", "density", "latitude", "median_mi",
              "lower_mi", "upper_mi");
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() < 3)
      throw std::runtime_error("lengthscales: row " + std::to_string(row) + ": need county,density,latitude");
    const std::string county = fields[0];
    const double density = detail::parse_double(fields[1], "density", row);
    const double latitude = detail::parse_double(fields[2], "latitude", row);
    std::vector<double> miles;
    miles.reserve(sigma_x_draws.size());
    HawkesParams p = initial_params(config, 1.0);
    for (double sx : sigma_x_draws) {
      p.sigma_x = sx;
      const double deg = effective_lengthscale_degrees(p, density, dconv);
      miles.push_back(lengthscale_to_miles(deg, latitude, mconv));
    }
    const Summary s = summarize(miles);
    std::printf("%-28s %12.2f %10.2f %12.4g %12.4g %12.4g\n", county.c_str(), density, latitude,
                s.median, s.lower, s.upper);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spatiotemporal self-exciting point process toolkit"};
  app.require_subcommand(1);

  CommonFlags common;

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic catalog");
  common.attach(sim_cmd);
  SimConfig sim;
  std::string truth_path;
  sim_cmd->add_option("--rate", sim.immigrant_rate, "immigrant rate (events/week)");
  sim_cmd->add_option("--horizon", sim.horizon, "time horizon (weeks)");
  sim_cmd->add_option("--xi0", sim.xi0, "self-excitatory weight (< 1)");
  sim_cmd->add_option("--sigma-x", sim.sigma_x, "trigger spatial scale (degrees)");
  sim_cmd->add_option("--sigma-t", sim.sigma_t, "trigger temporal scale (weeks)");
  sim_cmd->add_option("--window", sim.window, "lon_min lat_min lon_max lat_max")->expected(4);
  sim_cmd->add_option("--truth", truth_path, "ground-truth JSON path");

  // loglik
  auto* ll_cmd = app.add_subcommand("loglik", "evaluate the log-likelihood once");
  common.attach(ll_cmd);

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "time likelihood evaluations");
  common.attach(bench_cmd);
  std::vector<std::size_t> bench_sizes, bench_workers;
  std::size_t bench_reps = 3;
  bool bench_slope = false;
  bench_cmd->add_option("--sizes", bench_sizes, "catalog sizes to time");
  bench_cmd->add_option("--workers-list", bench_workers, "worker counts to time");
  bench_cmd->add_option("--reps", bench_reps, "timed repetitions per cell");
  bench_cmd->add_flag("--slope", bench_slope, "report the fitted log-log slope vs N");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "run the posterior sampler");
  common.attach(fit_cmd);
  std::optional<std::size_t> fit_chains, fit_iterations, fit_burn_in;
  fit_cmd->add_option("--chains", fit_chains, "number of chains");
  fit_cmd->add_option("--iterations", fit_iterations, "iterations per chain");
  fit_cmd->add_option("--burn-in", fit_burn_in, "burn-in iterations");

  // diagnose
  auto* diag_cmd = app.add_subcommand("diagnose", "summarize saved chains");
  common.attach(diag_cmd);
  std::vector<std::string> diag_chains;
  std::string diag_dir;
  diag_cmd->add_option("--chains", diag_chains, "chain CSV files");
  diag_cmd->add_option("--dir", diag_dir, "directory containing chain_*.csv");

  // lengthscales
  auto* len_cmd = app.add_subcommand("lengthscales", "per-county effective lengthscales (miles)");
  common.attach(len_cmd);
  std::vector<std::string> len_chains;
  std::string counties_path, len_density_convention, len_mile_convention;
  len_cmd->add_option("--chains", len_chains, "chain CSV files")->required();
  len_cmd->add_option("--counties", counties_path, "CSV: county,density,latitude")->required();
  len_cmd->add_option("--density-convention", len_density_convention, "sqrt or linear")
      ->check(CLI::IsMember({"sqrt", "linear"}));
  len_cmd->add_option("--mile-convention", len_mile_convention,
                      "latitudinal, longitudinal, or averaged")
      ->check(CLI::IsMember({"latitudinal", "longitudinal", "averaged"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return cmd_simulate(common, sim, truth_path);
    if (ll_cmd->parsed()) return cmd_loglik(common);
    if (bench_cmd->parsed())
      return cmd_bench(common, bench_sizes, bench_workers, bench_reps, bench_slope);
    if (fit_cmd->parsed()) return cmd_fit(common, fit_chains, fit_iterations, fit_burn_in);
    if (diag_cmd->parsed()) return cmd_diagnose(common, diag_chains, diag_dir);
    if (len_cmd->parsed())
      return cmd_lengthscales(common, len_chains, counties_path, len_density_convention,
                              len_mile_convention);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
