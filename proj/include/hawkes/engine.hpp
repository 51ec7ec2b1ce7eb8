#ifndef HAWKES_ENGINE_HPP
#define HAWKES_ENGINE_HPP

#include <chrono>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "hawkes/model.hpp"
#include "hawkes/types.hpp"

namespace hawkes {

/// Contiguous half-open index ranges assigning contribution terms to
/// workers.  Ranges are disjoint, cover [0, N), and differ in size by at
/// most one, remainder to the lowest-indexed workers.
struct Partition {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;

  std::size_t workers() const { return ranges.size(); }

  static Partition make(std::size_t n, std::size_t g) {
    if (g == 0) throw std::invalid_argument("Partition: worker count must be positive");
    if (g > n) throw std::invalid_argument("Partition: more workers than terms");
    Partition p;
    const std::size_t base = n / g;
    const std::size_t rem = n % g;
    std::size_t begin = 0;
    for (std::size_t w = 0; w < g; ++w) {
      const std::size_t len = base + (w < rem ? 1 : 0);
      p.ranges.emplace_back(begin, begin + len);
      begin += len;
    }
    return p;
  }
};

inline Partition make_partition(std::size_t n, std::size_t g) { return Partition::make(n, g); }

namespace detail {

/// Runs fn(worker_index) on each worker; worker 0 runs on the calling
/// thread.  Used for both likelihood slices and lane-cache refreshes.
template <typename Fn>
void run_workers(std::size_t g, Fn&& fn) {
  if (g <= 1) {
    fn(0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(g - 1);
  for (std::size_t w = 1; w < g; ++w) pool.emplace_back(fn, w);
  fn(0);
  for (auto& t : pool) t.join();
}

}  // namespace detail

/// Slice-sum over one worker's range, ascending n, double accumulator.
template <typename Real>
double slice_log_likelihood(const EvalData<Real>& data, const HawkesParams& p, std::size_t begin,
                            std::size_t end) {
  std::vector<Real> bg(kLaneCount), tr(kLaneCount);
  const Real tau_t_prec = static_cast<Real>(p.tau_t_prec());
  const Real sigma_x_prec = static_cast<Real>(p.sigma_x_prec());
  const Real omega = static_cast<Real>(p.omega());
  const Real bg_coef = background_coefficient<Real>(p);
  const Real tr_coef = trigger_coefficient<Real>(p);
  double sum = 0.0;
  for (std::size_t n = begin; n < end; ++n) {
    accumulate_background_lanes(data, n, tau_t_prec, bg.data());
    accumulate_trigger_lanes(data, n, sigma_x_prec, omega, tr.data());
    const double inner = combine_lanes(bg.data(), tr.data(), bg_coef, tr_coef);
    sum += inner - integral_term(p, static_cast<double>(data.t[n]),
                                 static_cast<double>(data.t_end));
  }
  return sum;
}

/// Total log-likelihood: each worker computes its slice over an immutable
/// catalog, writes one output slot, and slices reduce in ascending worker
/// order after the join.  Deterministic for fixed (G, precision).
template <typename Real>
double log_likelihood_t(const EvalData<Real>& data, const HawkesParams& p,
                        const Partition& part) {
  std::vector<double> slices(part.workers(), 0.0);
  detail::run_workers(part.workers(), [&](std::size_t w) {
    const auto [b, e] = part.ranges[w];
    slices[w] = slice_log_likelihood(data, p, b, e);
  });
  double total = 0.0;
  for (double s : slices) total += s;
  return total;
}

inline double log_likelihood(const Catalog& catalog, const HawkesParams& p, const Partition& part,
                             Precision precision) {
  p.validate();
  if (part.ranges.empty() || part.ranges.back().second != catalog.size())
    throw std::invalid_argument("log_likelihood: partition does not cover the catalog");
  if (precision == Precision::dbl) {
    return log_likelihood_t(EvalData<double>::from(catalog, p.variant), p, part);
  }
  return log_likelihood_t(EvalData<float>::from(catalog, p.variant), p, part);
}

/// Likelihood evaluator with per-event lane caches, for samplers that
/// propose one parameter at a time.  A mu0/xi0 change only recombines the
/// cached lanes; tau_t refreshes the background lanes; sigma_x/sigma_t
/// refresh the triggering lanes.  Results are bitwise identical to
/// log_likelihood_t at every parameter setting.
template <typename Real>
class LikelihoodWorkspace {
 public:
  LikelihoodWorkspace(const Catalog& catalog, Variant variant, std::size_t workers)
      : data_(EvalData<Real>::from(catalog, variant)),
        part_(Partition::make(catalog.size(), std::min(workers, catalog.size()))),
        bg_(catalog.size() * kLaneCount),
        tr_(catalog.size() * kLaneCount),
        bg_scratch_(catalog.size() * kLaneCount),
        tr_scratch_(catalog.size() * kLaneCount) {}

  const EvalData<Real>& data() const { return data_; }
  EvalData<Real>& data() { return data_; }
  const Partition& partition() const { return part_; }

  /// Full refresh of both lane caches, then combine.
  double evaluate_full(const HawkesParams& p) {
    refresh_background(p, bg_);
    refresh_trigger(p, tr_);
    bg_tau_ = p.tau_t;
    tr_sigma_x_ = p.sigma_x;
    tr_sigma_t_ = p.sigma_t;
    return combine(p, bg_, tr_);
  }

  /// Evaluates the likelihood at proposal `p`, reusing whichever lane
  /// caches the proposal leaves unchanged.  Scratch caches are promoted
  /// into place only on commit_proposal().
  double evaluate_proposal(const HawkesParams& p) {
    proposal_bg_ = &bg_;
    proposal_tr_ = &tr_;
    if (p.tau_t != bg_tau_) {
      refresh_background(p, bg_scratch_);
      proposal_bg_ = &bg_scratch_;
    }
    if (p.sigma_x != tr_sigma_x_ || p.sigma_t != tr_sigma_t_) {
      refresh_trigger(p, tr_scratch_);
      proposal_tr_ = &tr_scratch_;
    }
    proposal_params_ = p;
    return combine(p, *proposal_bg_, *proposal_tr_);
  }

  void commit_proposal() {
    if (proposal_bg_ == &bg_scratch_) std::swap(bg_, bg_scratch_);
    if (proposal_tr_ == &tr_scratch_) std::swap(tr_, tr_scratch_);
    bg_tau_ = proposal_params_.tau_t;
    tr_sigma_x_ = proposal_params_.sigma_x;
    tr_sigma_t_ = proposal_params_.sigma_t;
    proposal_bg_ = nullptr;
    proposal_tr_ = nullptr;
  }

  /// Replaces the event locations (cut-posterior X refresh) and drops the
  /// triggering cache.
  void set_locations(const std::vector<double>& lon, const std::vector<double>& lat) {
    for (std::size_t i = 0; i < data_.size(); ++i) {
      data_.x[i] = static_cast<Real>(lon[i]);
      data_.y[i] = static_cast<Real>(lat[i]);
    }
    tr_sigma_x_ = -1.0;  // forces a trigger refresh on next evaluate
  }

 private:
  void refresh_background(const HawkesParams& p, std::vector<Real>& out) {
    const Real prec = static_cast<Real>(p.tau_t_prec());
    detail::run_workers(part_.workers(), [&](std::size_t w) {
      const auto [b, e] = part_.ranges[w];
      for (std::size_t n = b; n < e; ++n)
        accumulate_background_lanes(data_, n, prec, out.data() + n * kLaneCount);
    });
  }

  void refresh_trigger(const HawkesParams& p, std::vector<Real>& out) {
    const Real prec = static_cast<Real>(p.sigma_x_prec());
    const Real omega = static_cast<Real>(p.omega());
    detail::run_workers(part_.workers(), [&](std::size_t w) {
      const auto [b, e] = part_.ranges[w];
      for (std::size_t n = b; n < e; ++n)
        accumulate_trigger_lanes(data_, n, prec, omega, out.data() + n * kLaneCount);
    });
  }

  double combine(const HawkesParams& p, const std::vector<Real>& bg, const std::vector<Real>& tr) {
    const Real bg_coef = background_coefficient<Real>(p);
    const Real tr_coef = trigger_coefficient<Real>(p);
    std::vector<double> slices(part_.workers(), 0.0);
    detail::run_workers(part_.workers(), [&](std::size_t w) {
      const auto [b, e] = part_.ranges[w];
      double sum = 0.0;
      for (std::size_t n = b; n < e; ++n) {
        const double inner =
            combine_lanes(bg.data() + n * kLaneCount, tr.data() + n * kLaneCount, bg_coef, tr_coef);
        sum += inner - integral_term(p, static_cast<double>(data_.t[n]),
                                     static_cast<double>(data_.t_end));
      }
      slices[w] = sum;
    });
    double total = 0.0;
    for (double s : slices) total += s;
    return total;
  }

  EvalData<Real> data_;
  Partition part_;
  std::vector<Real> bg_, tr_, bg_scratch_, tr_scratch_;
  std::vector<Real>* proposal_bg_ = nullptr;
  std::vector<Real>* proposal_tr_ = nullptr;
  HawkesParams proposal_params_;
  double bg_tau_ = -1.0;
  double tr_sigma_x_ = -1.0;
  double tr_sigma_t_ = -1.0;
};

// ---------------------------------------------------------------------------
// Benchmarking

struct BenchRow {
  std::size_t n = 0;
  std::size_t workers = 0;
  Precision precision = Precision::dbl;
  Variant variant = Variant::constant;
  double seconds_median = 0.0;
  double seconds_min = 0.0;
};

inline void write_benchmark_csv(std::ostream& os, const std::vector<BenchRow>& rows) {
  os << "N,G,precision,variant,seconds_median,seconds_min\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.workers << ',' << to_string(r.precision) << ',' << to_string(r.variant)
       << ',' << r.seconds_median << ',' << r.seconds_min << '\n';
}

/// Synthetic uniform catalog used only for timing runs.
inline Catalog benchmark_catalog(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ut(0.0, 100.0), ux(-5.0, 5.0), ud(10.0, 5000.0);
  std::vector<Event> events;
  events.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    events.push_back({ut(rng), ux(rng), ux(rng), "", ud(rng)});
  return Catalog::sorted(std::move(events));
}

/// Wall-clock per evaluation for each (N, G) cell; monotonic clock,
/// median of repeats, one discarded warm-up evaluation per cell.
inline std::vector<BenchRow> benchmark_eval(const std::vector<std::size_t>& sizes,
                                            const std::vector<std::size_t>& worker_counts,
                                            std::size_t repeats,
                                            Precision precision = Precision::dbl,
                                            Variant variant = Variant::constant,
                                            std::uint64_t seed = 42) {
  if (sizes.empty()) throw std::invalid_argument("benchmark_eval: sizes must be nonempty");
  std::vector<BenchRow> rows;
  if (repeats == 0) return rows;
  HawkesParams params{.mu0 = 1.0, .tau_t = 5.0, .xi0 = 0.5, .sigma_x = 0.5, .sigma_t = 2.0,
                      .area = 100.0, .variant = variant};
  for (std::size_t n : sizes) {
    const Catalog catalog = benchmark_catalog(n, seed);
    for (std::size_t g : worker_counts) {
      const Partition part = Partition::make(n, g);
      std::vector<double> secs;
      volatile double sink = 0.0;
      for (std::size_t r = 0; r <= repeats; ++r) {  // r == 0 is warm-up
        const auto start = std::chrono::steady_clock::now();
        sink = log_likelihood(catalog, params, part, precision);
        const auto stop = std::chrono::steady_clock::now();
        if (r > 0) secs.push_back(std::chrono::duration<double>(stop - start).count());
      }
      (void)sink;
      std::sort(secs.begin(), secs.end());
      BenchRow row{n, g, precision, variant, 0.0, secs.front()};
      const std::size_t mid = secs.size() / 2;
      row.seconds_median =
          secs.size() % 2 ? secs[mid] : 0.5 * (secs[mid - 1] + secs[mid]);
      rows.push_back(row);
    }
  }
  return rows;
}

/// Least-squares slope of log(seconds) against log(N).
inline double fitted_loglog_slope(const std::vector<std::pair<std::size_t, double>>& points) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double k = static_cast<double>(points.size());
  for (const auto& [n, sec] : points) {
    const double lx = std::log(static_cast<double>(n));
    const double ly = std::log(sec);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace hawkes

#endif  // HAWKES_ENGINE_HPP
