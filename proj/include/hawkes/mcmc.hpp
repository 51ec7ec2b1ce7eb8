#ifndef HAWKES_MCMC_HPP
#define HAWKES_MCMC_HPP

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hawkes/engine.hpp"
#include "hawkes/geo.hpp"
#include "hawkes/types.hpp"

namespace hawkes {

inline constexpr std::size_t kParamCount = 5;
inline constexpr std::array<const char*, kParamCount> kParamNames{"mu0", "tau_t", "xi0",
                                                                 "sigma_x", "sigma_t"};

/// Independent log-normal priors on the five positive parameters,
/// weakly informative by default (log-scale sd 10).
struct PriorSpec {
  std::array<double, kParamCount> log_mean{0.0, 0.0, 0.0, 0.0, 0.0};
  std::array<double, kParamCount> log_sd{10.0, 10.0, 10.0, 10.0, 10.0};

  double log_density(const std::array<double, kParamCount>& theta) const {
    double lp = 0.0;
    for (std::size_t k = 0; k < kParamCount; ++k) {
      const double lx = std::log(theta[k]);
      const double z = (lx - log_mean[k]) / log_sd[k];
      lp += -lx - std::log(log_sd[k]) - 0.5 * z * z;
    }
    return lp;
  }
};

struct ChainConfig {
  std::size_t iterations = 5000;
  std::size_t burn_in = 1000;
  std::uint64_t seed = 0;
  HawkesParams initial;
  std::array<double, kParamCount> step_sizes{0.1, 0.1, 0.1, 0.1, 0.1};
  std::size_t refresh_period = 1;  // iterations between X refreshes
  Precision precision = Precision::dbl;
  std::size_t workers = 1;
  PriorSpec prior;
  std::size_t adapt_window = 50;
  double adapt_delta = 0.5;

  void validate() const {
    initial.validate();
    if (burn_in >= iterations) throw std::invalid_argument("ChainConfig: burn_in must be < iterations");
    if (refresh_period < 1) throw std::invalid_argument("ChainConfig: refresh_period must be >= 1");
    if (workers < 1) throw std::invalid_argument("ChainConfig: workers must be >= 1");
    for (double s : step_sizes)
      if (!(s >= 0.0)) throw std::invalid_argument("ChainConfig: step sizes must be nonnegative");
  }
};

struct ChainOutput {
  std::vector<std::array<double, kParamCount>> draws;  // post burn-in
  std::vector<double> loglik_trace;
  std::array<std::size_t, kParamCount> accepts{};
  std::array<std::size_t, kParamCount> proposals{};
  std::array<double, kParamCount> final_steps{};
  double seconds = 0.0;
  std::uint64_t seed = 0;

  double acceptance_rate(std::size_t k) const {
    return proposals[k] == 0 ? 0.0
                             : static_cast<double>(accepts[k]) / static_cast<double>(proposals[k]);
  }
};

/// One uniform draw per event from its region's polygons, independent
/// across events; O(N).  Errors carry the offending event index.
inline std::pair<std::vector<double>, std::vector<double>> resample_locations(
    const Catalog& catalog, const RegionTable& regions, std::mt19937_64& rng) {
  std::vector<double> lon(catalog.size()), lat(catalog.size());
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const std::string& id = catalog[i].region_id;
    if (!regions.contains(id))
      throw std::runtime_error("resample_locations: event " + std::to_string(i) +
                               " has unresolvable region id '" + id + "'");
    try {
      const Point p = sample_point_in_region(regions.at(id), rng);
      lon[i] = p[0];
      lat[i] = p[1];
    } catch (const std::exception& e) {
      throw std::runtime_error("resample_locations: event " + std::to_string(i) + ": " + e.what());
    }
  }
  return {std::move(lon), std::move(lat)};
}

/// Burn-in step-size adaptation toward 0.44 acceptance; a no-op once
/// burn-in has ended so the post-burn-in kernel stays fixed.
inline void adapt_steps(const std::array<std::size_t, kParamCount>& accepts,
                        const std::array<std::size_t, kParamCount>& proposals,
                        std::array<double, kParamCount>& steps, bool in_burn_in,
                        double delta = 0.5) {
  if (!in_burn_in) return;
  for (std::size_t k = 0; k < kParamCount; ++k) {
    if (proposals[k] == 0 || steps[k] == 0.0) continue;
    const double rate = static_cast<double>(accepts[k]) / static_cast<double>(proposals[k]);
    steps[k] *= std::exp(delta * (rate - 0.44));
  }
}

/// Cut-posterior sampler: alternates uniform-in-region location
/// refreshes with a fixed-order univariate Metropolis-Hastings sweep
/// over (mu0, tau_t, xi0, sigma_x, sigma_t) using log-scale Gaussian
/// random-walk proposals.  With a null region table the locations stay
/// fixed and the sampler targets the ordinary posterior p(Theta | X, t).
template <typename Real>
class Sampler {
 public:
  Sampler(const ChainConfig& config, const Catalog& catalog, const RegionTable* regions)
      : config_(config),
        regions_(regions),
        workspace_(catalog, config.initial.variant, config.workers),
        catalog_(&catalog),
        location_rng_(config.seed),
        param_rng_(config.seed ^ 0x9e3779b97f4a7c15ull) {
    config_.validate();
    if (catalog.coarse_only() && regions == nullptr)
      throw std::invalid_argument("Sampler: coarse-only catalog requires a region table");
    params_ = config_.initial;
    theta_ = {params_.mu0, params_.tau_t, params_.xi0, params_.sigma_x, params_.sigma_t};
    steps_ = config_.step_sizes;
    if (regions_ != nullptr) {
      auto [lon, lat] = resample_locations(*catalog_, *regions_, location_rng_);
      cur_lon_ = std::move(lon);
      cur_lat_ = std::move(lat);
      workspace_.set_locations(cur_lon_, cur_lat_);
    }
    loglik_ = workspace_.evaluate_full(params_);
    log_prior_ = config_.prior.log_density(theta_);
  }

  /// Draws fresh locations from p(X | regions); skips the likelihood
  /// refresh when the draw is identical (degenerate point regions).
  void refresh_locations() {
    if (regions_ == nullptr) return;
    auto [lon, lat] = resample_locations(*catalog_, *regions_, location_rng_);
    if (lon == cur_lon_ && lat == cur_lat_) return;
    cur_lon_ = std::move(lon);
    cur_lat_ = std::move(lat);
    workspace_.set_locations(cur_lon_, cur_lat_);
    loglik_ = workspace_.evaluate_proposal(params_);
    workspace_.commit_proposal();
  }

  /// One fixed-order univariate MH sweep; leaves p(Theta | X, t)
  /// invariant.  Non-finite proposal likelihoods count as rejections.
  void sweep() {
    for (std::size_t k = 0; k < kParamCount; ++k) {
      ++output_.proposals[k];
      const double z = normal_(param_rng_);
      const double u = unit_(param_rng_);
      std::array<double, kParamCount> proposal_theta = theta_;
      proposal_theta[k] = theta_[k] * std::exp(steps_[k] * z);
      const HawkesParams proposal = params_from(proposal_theta);
      const double prop_ll = workspace_.evaluate_proposal(proposal);
      if (!std::isfinite(prop_ll)) continue;
      const double prop_lp = config_.prior.log_density(proposal_theta);
      const double jacobian = std::log(proposal_theta[k]) - std::log(theta_[k]);
      const double log_accept = (prop_ll - loglik_) + (prop_lp - log_prior_) + jacobian;
      if (std::log(u) < log_accept) {
        theta_ = proposal_theta;
        params_ = proposal;
        loglik_ = prop_ll;
        log_prior_ = prop_lp;
        workspace_.commit_proposal();
        ++output_.accepts[k];
      }
    }
  }

  ChainOutput run() {
    const auto start = std::chrono::steady_clock::now();
    std::array<std::size_t, kParamCount> window_accepts{}, window_proposals{};
    for (std::size_t iter = 0; iter < config_.iterations; ++iter) {
      if (regions_ != nullptr && iter % config_.refresh_period == 0) refresh_locations();
      const auto accepts_before = output_.accepts;
      const auto proposals_before = output_.proposals;
      sweep();
      const bool in_burn_in = iter < config_.burn_in;
      if (in_burn_in) {
        for (std::size_t k = 0; k < kParamCount; ++k) {
          window_accepts[k] += output_.accepts[k] - accepts_before[k];
          window_proposals[k] += output_.proposals[k] - proposals_before[k];
        }
        if ((iter + 1) % config_.adapt_window == 0) {
          adapt_steps(window_accepts, window_proposals, steps_, true, config_.adapt_delta);
          window_accepts = {};
          window_proposals = {};
        }
      } else {
        output_.draws.push_back(theta_);
        output_.loglik_trace.push_back(loglik_);
      }
    }
    output_.final_steps = steps_;
    output_.seed = config_.seed;
    output_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return output_;
  }

  const HawkesParams& params() const { return params_; }
  double loglik() const { return loglik_; }
  const std::vector<double>& current_lon() const { return cur_lon_; }
  const std::vector<double>& current_lat() const { return cur_lat_; }
  LikelihoodWorkspace<Real>& workspace() { return workspace_; }

 private:
  HawkesParams params_from(const std::array<double, kParamCount>& theta) const {
    HawkesParams p = params_;
    p.mu0 = theta[0];
    p.tau_t = theta[1];
    p.xi0 = theta[2];
    p.sigma_x = theta[3];
    p.sigma_t = theta[4];
    return p;
  }

  ChainConfig config_;
  const RegionTable* regions_;
  LikelihoodWorkspace<Real> workspace_;
  const Catalog* catalog_;
  std::mt19937_64 location_rng_;
  std::mt19937_64 param_rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  HawkesParams params_;
  std::array<double, kParamCount> theta_{};
  std::array<double, kParamCount> steps_{};
  std::vector<double> cur_lon_, cur_lat_;
  double loglik_ = 0.0;
  double log_prior_ = 0.0;
  ChainOutput output_;
};

/// Runs one cut-posterior chain: per iteration an X refresh (every
/// refresh-period iterations) followed by one MH sweep.
inline ChainOutput run_cut_posterior(const ChainConfig& config, const Catalog& catalog,
                                     const RegionTable& regions) {
  if (config.precision == Precision::dbl) return Sampler<double>(config, catalog, &regions).run();
  return Sampler<float>(config, catalog, &regions).run();
}

/// Standard posterior sampler with the event locations held fixed.
inline ChainOutput run_fixed_posterior(const ChainConfig& config, const Catalog& catalog) {
  if (config.precision == Precision::dbl) return Sampler<double>(config, catalog, nullptr).run();
  return Sampler<float>(config, catalog, nullptr).run();
}

}  // namespace hawkes

#endif  // HAWKES_MCMC_HPP
