#ifndef HAWKES_DIAGNOSTICS_HPP
#define HAWKES_DIAGNOSTICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "hawkes/model.hpp"

namespace hawkes {

using DrawMatrix = std::vector<std::vector<double>>;  // chains x draws

struct DiagnosticResult {
  double value = 0.0;
  bool degenerate = false;
};

/// Type-7 quantile (linear interpolation between order statistics) of
/// already-sorted values.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile: empty input");
  if (sorted.size() == 1) return sorted[0];
  const double h = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline double quantile(std::vector<double> values, double p) {
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, p);
}

/// Inverse standard normal CDF (Acklam's rational approximation refined
/// with one Halley step).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = gaussian_cdf(x) - p;
  const double u = e / gaussian_pdf(x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace detail {

inline void require_shape(const DrawMatrix& chains) {
  if (chains.empty()) throw std::invalid_argument("diagnostics: no chains");
  const std::size_t s = chains[0].size();
  for (const auto& c : chains)
    if (c.size() != s) throw std::invalid_argument("diagnostics: ragged chains");
  if (s < 4) throw std::invalid_argument("diagnostics: need at least 4 draws per chain");
}

inline bool all_constant(const DrawMatrix& chains) {
  const double v = chains[0][0];
  for (const auto& c : chains)
    for (double x : c)
      if (x != v) return false;
  return true;
}

/// Splits each chain into halves (odd trailing draw dropped).
inline DrawMatrix split_chains(const DrawMatrix& chains) {
  DrawMatrix out;
  for (const auto& c : chains) {
    const std::size_t half = c.size() / 2;
    out.emplace_back(c.begin(), c.begin() + half);
    out.emplace_back(c.begin() + half, c.begin() + 2 * half);
  }
  return out;
}

/// Pooled average ranks mapped through the normal quantile with the
/// (r - 3/8)/(n + 1/4) offset.
inline DrawMatrix rank_normalize(const DrawMatrix& chains) {
  const std::size_t m = chains.size();
  const std::size_t s = chains[0].size();
  const std::size_t total = m * s;
  std::vector<std::pair<double, std::size_t>> pooled;
  pooled.reserve(total);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < s; ++j) pooled.emplace_back(chains[i][j], i * s + j);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> rank(total);
  std::size_t i = 0;
  while (i < total) {
    std::size_t j = i;
    while (j + 1 < total && pooled[j + 1].first == pooled[i].first) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[pooled[k].second] = avg;
    i = j + 1;
  }
  DrawMatrix out(m, std::vector<double>(s));
  const double denom = static_cast<double>(total) + 0.25;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < s; ++b)
      out[a][b] = normal_quantile((rank[a * s + b] - 0.375) / denom);
  return out;
}

/// Potential scale reduction on pre-split chains.
inline double basic_rhat(const DrawMatrix& chains) {
  const std::size_t m = chains.size();
  const double s = static_cast<double>(chains[0].size());
  std::vector<double> means(m);
  double grand = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    means[i] = std::accumulate(chains[i].begin(), chains[i].end(), 0.0) / s;
    grand += means[i];
  }
  grand /= static_cast<double>(m);
  double b = 0.0, w = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    b += (means[i] - grand) * (means[i] - grand);
    double v = 0.0;
    for (double x : chains[i]) v += (x - means[i]) * (x - means[i]);
    w += v / (s - 1.0);
  }
  b *= s / (static_cast<double>(m) - 1.0);
  w /= static_cast<double>(m);
  const double var_plus = w * (s - 1.0) / s + b / s;
  return std::sqrt(var_plus / w);
}

/// Effective sample size on pre-split chains via per-chain
/// autocovariances combined with Geyer's initial monotone sequence.
inline double basic_ess(const DrawMatrix& chains) {
  const std::size_t m = chains.size();
  const std::size_t s = chains[0].size();
  const double sd = static_cast<double>(s);
  std::vector<double> means(m), vars(m);
  for (std::size_t i = 0; i < m; ++i) {
    means[i] = std::accumulate(chains[i].begin(), chains[i].end(), 0.0) / sd;
    double v = 0.0;
    for (double x : chains[i]) v += (x - means[i]) * (x - means[i]);
    vars[i] = v / (sd - 1.0);
  }
  const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / static_cast<double>(m);
  double b_over_s = 0.0;
  if (m > 1) {
    double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(m);
    for (double mu : means) b_over_s += (mu - grand) * (mu - grand);
    b_over_s /= static_cast<double>(m - 1);
  }
  const double var_plus = w * (sd - 1.0) / sd + b_over_s;
  if (!(var_plus > 0.0)) return 0.0;

  auto acov = [&](std::size_t chain, std::size_t lag) {
    const auto& c = chains[chain];
    double a = 0.0;
    for (std::size_t i = 0; i + lag < s; ++i) a += (c[i] - means[chain]) * (c[i + lag] - means[chain]);
    return a / sd;
  };

  auto rho = [&](std::size_t lag) {
    double mean_acov = 0.0;
    for (std::size_t i = 0; i < m; ++i) mean_acov += acov(i, lag);
    mean_acov /= static_cast<double>(m);
    return 1.0 - (w - mean_acov) / var_plus;
  };

  // Geyer initial positive sequence over lag pairs (rho_0 taken as 1),
  // then enforce monotone decrease.
  double pair_sum = 1.0 + rho(1);
  double prev_pair = pair_sum;
  if (prev_pair > 0.0) {
    for (std::size_t lag = 2; lag + 1 < s; lag += 2) {
      double pair = rho(lag) + rho(lag + 1);
      if (pair <= 0.0) break;
      pair = std::min(pair, prev_pair);
      pair_sum += pair;
      prev_pair = pair;
    }
  }
  double tau = -1.0 + 2.0 * pair_sum;
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(m * s) + 10.0));
  return static_cast<double>(m * s) / tau;
}

}  // namespace detail

/// Rank-normalized split R-hat.  Constant chains are defined as 1 with
/// the degeneracy flag set.
inline DiagnosticResult split_rank_rhat(const DrawMatrix& chains) {
  detail::require_shape(chains);
  if (detail::all_constant(chains)) return {1.0, true};
  const auto split = detail::split_chains(chains);
  if (split.size() < 2) throw std::invalid_argument("split_rank_rhat: need at least 2 split chains");
  return {detail::basic_rhat(detail::rank_normalize(split)), false};
}

enum class EssKind { bulk, tail };

/// Bulk ESS of the rank-normalized split chains, or tail ESS as the
/// minimum over the 5% and 95% quantile-indicator chains.  Constant
/// chains give 0 with the degeneracy flag set.
inline DiagnosticResult ess(const DrawMatrix& chains, EssKind kind) {
  detail::require_shape(chains);
  if (detail::all_constant(chains)) return {0.0, true};
  const auto split = detail::split_chains(chains);
  if (kind == EssKind::bulk) return {detail::basic_ess(detail::rank_normalize(split)), false};
  std::vector<double> pooled;
  for (const auto& c : split) pooled.insert(pooled.end(), c.begin(), c.end());
  std::sort(pooled.begin(), pooled.end());
  double result = std::numeric_limits<double>::infinity();
  for (double p : {0.05, 0.95}) {
    const double q = quantile_sorted(pooled, p);
    DrawMatrix indicator(split.size());
    for (std::size_t i = 0; i < split.size(); ++i)
      for (double x : split[i]) indicator[i].push_back(x <= q ? 1.0 : 0.0);
    result = std::min(result, detail::basic_ess(indicator));
  }
  return {result, false};
}

/// Posterior median and central 95% interval (type-7 quantiles).
struct Summary {
  double median = 0.0;
  double lower = 0.0;  // 2.5%
  double upper = 0.0;  // 97.5%
};

inline Summary summarize(const std::vector<double>& draws) {
  if (draws.empty()) throw std::invalid_argument("summarize: empty draws");
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  return {quantile_sorted(sorted, 0.5), quantile_sorted(sorted, 0.025),
          quantile_sorted(sorted, 0.975)};
}

/// Elementwise xi0 / (xi0 + mu0): the fraction of events attributed to
/// local contagion.
inline std::vector<double> contagion_fraction(const std::vector<double>& mu0_draws,
                                              const std::vector<double>& xi0_draws) {
  if (mu0_draws.size() != xi0_draws.size())
    throw std::invalid_argument("contagion_fraction: draws must be paired");
  std::vector<double> out;
  out.reserve(mu0_draws.size());
  for (std::size_t i = 0; i < mu0_draws.size(); ++i)
    out.push_back(xi0_draws[i] / (xi0_draws[i] + mu0_draws[i]));
  return out;
}

}  // namespace hawkes

#endif  // HAWKES_DIAGNOSTICS_HPP
