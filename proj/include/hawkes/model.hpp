#ifndef HAWKES_MODEL_HPP
#define HAWKES_MODEL_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hawkes/types.hpp"

namespace hawkes {

/// Rate sums below this floor are clipped before the logarithm, in both
/// precisions.
inline constexpr double kRateClip = 1e-40;

/// Interleaving width of the strided partial sums.
inline constexpr int kLaneCount = 256;

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kInv2Pi = 0.15915494309189533577;

/// Standard normal density.
inline double gaussian_pdf(double z) {
  return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

/// Standard normal CDF via erfc.
inline double gaussian_cdf(double z) {
  return 0.5 * std::erfc(-z * 0.7071067811865475244);
}

/// log sum exp with the maximum factored out.
inline double log_sum_exp(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  double m = values[0];
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

// The lane loops below carry no cross-iteration dependencies; the simd
// pragma asks the vectorizer to treat them as such without relaxing
// floating-point semantics anywhere else.
#define HAWKES_SIMD _Pragma("omp simd")

namespace detail {

/// e^x for x <= 0, double precision: libm is accurate and sufficient.
inline double exp_nonpos(double x) { return std::exp(x); }

/// e^x for x <= 0, single precision.  Cephes-style range reduction and
/// degree-5 polynomial; branch-free scaling so the compiler can
/// vectorize the likelihood inner loop.  Returns exact 0 below the
/// subnormal range (also for -inf inputs).
inline float exp_nonpos(float x) {
  const bool under = !(x >= -103.97f);  // also catches -inf
  x = under ? -103.97f : x;
  const float kf = __builtin_rintf(x * 1.44269504088896341f);
  float r = std::fmaf(kf, -0.693359375f, x);
  r = std::fmaf(kf, 2.12194440e-4f, r);
  float p = 1.9875691500e-4f;
  p = std::fmaf(p, r, 1.3981999507e-3f);
  p = std::fmaf(p, r, 8.3334519073e-3f);
  p = std::fmaf(p, r, 4.1665795894e-2f);
  p = std::fmaf(p, r, 1.6666665459e-1f);
  p = std::fmaf(p, r, 5.0000001201e-1f);
  const float y = 1.0f + r + r * r * p;
  // 2^k in two factors so k down to -150 stays representable.
  const int k = static_cast<int>(kf);
  const int k1 = k >> 1;
  const int k2 = k - k1;
  const float s1 = std::bit_cast<float>(static_cast<std::uint32_t>(k1 + 127) << 23);
  const float s2 = std::bit_cast<float>(static_cast<std::uint32_t>(k2 + 127) << 23);
  const float out = y * s1 * s2;
  return under ? 0.0f : out;
}

}  // namespace detail

/// Catalog flattened into per-precision arrays for the evaluation loops.
/// `dens` holds the source-side kernel modulation: the event's population
/// density under the varying variant, 1 otherwise.
template <typename Real>
struct EvalData {
  std::vector<Real> t, x, y, dens;
  Real t_end = 0;

  static EvalData from(const Catalog& catalog, Variant variant) {
    EvalData d;
    const std::size_t n = catalog.size();
    d.t.reserve(n);
    d.x.reserve(n);
    d.y.reserve(n);
    d.dens.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Event& e = catalog[i];
      d.t.push_back(static_cast<Real>(e.t));
      d.x.push_back(static_cast<Real>(e.lon));
      d.y.push_back(static_cast<Real>(e.lat));
      d.dens.push_back(variant == Variant::varying ? static_cast<Real>(e.density) : Real(1));
    }
    d.t_end = d.t.back();
    return d;
  }

  std::size_t size() const { return t.size(); }

  /// Count of events strictly before time tn (times are sorted).
  std::size_t count_before(Real tn) const {
    return static_cast<std::size_t>(std::lower_bound(t.begin(), t.end(), tn) - t.begin());
  }
};

/// Strided partial sums of the background kernel terms for target n:
/// bg[l] accumulates e^{-z^2/2} over j = l, l+256, ... with j != n
/// excluded through the time guard.
template <typename Real>
void accumulate_background_lanes(const EvalData<Real>& d, std::size_t n, Real tau_t_prec,
                                 Real* bg) {
  const std::size_t count = d.size();
  const Real tn = d.t[n];
  for (int l = 0; l < kLaneCount; ++l) bg[l] = 0;
  for (std::size_t base = 0; base < count; base += kLaneCount) {
    const int m = static_cast<int>(std::min<std::size_t>(kLaneCount, count - base));
    const Real* tj = d.t.data() + base;
    HAWKES_SIMD
    for (int l = 0; l < m; ++l) {
      const Real td = tn - tj[l];
      const Real z = td * tau_t_prec;
      const Real e = detail::exp_nonpos(Real(-0.5) * z * z);
      bg[l] += td != Real(0) ? e : Real(0);
    }
  }
}

/// Strided partial sums of the triggering kernel terms for target n:
/// tr[l] accumulates D_j e^{-omega dt - d^2 D_j / (2 sigma_x^2)} over the
/// strictly-earlier events.
template <typename Real>
void accumulate_trigger_lanes(const EvalData<Real>& d, std::size_t n, Real sigma_x_prec,
                              Real omega, Real* tr) {
  const Real tn = d.t[n];
  const Real xn = d.x[n];
  const Real yn = d.y[n];
  const Real half_prec2 = Real(0.5) * sigma_x_prec * sigma_x_prec;
  const std::size_t before = d.count_before(tn);
  for (int l = 0; l < kLaneCount; ++l) tr[l] = 0;
  for (std::size_t base = 0; base < before; base += kLaneCount) {
    const int m = static_cast<int>(std::min<std::size_t>(kLaneCount, before - base));
    const Real* tj = d.t.data() + base;
    const Real* xj = d.x.data() + base;
    const Real* yj = d.y.data() + base;
    const Real* qj = d.dens.data() + base;
    HAWKES_SIMD
    for (int l = 0; l < m; ++l) {
      const Real td = tn - tj[l];
      const Real dx = xn - xj[l];
      const Real dy = yn - yj[l];
      const Real q = qj[l];
      const Real arg = -(omega * td + half_prec2 * (dx * dx + dy * dy) * q);
      tr[l] += q * detail::exp_nonpos(arg);
    }
  }
}

/// Per-event integral term
/// Lambda_n = mu0 (Phi((t_N - t_n)/tau_t) - Phi(-t_n/tau_t))
///          - xi0 (e^{-(t_N - t_n)/sigma_t} - 1).
inline double integral_term(const HawkesParams& p, double t_n, double t_end) {
  if (t_n > t_end) throw std::invalid_argument("integral_term: t_n > t_end");
  const double bg = p.mu0 * (gaussian_cdf((t_end - t_n) / p.tau_t) - gaussian_cdf(-t_n / p.tau_t));
  const double tr = -p.xi0 * (std::exp(-(t_end - t_n) / p.sigma_t) - 1.0);
  return bg + tr;
}

/// Combines lane sums into log(max(sum of rates, clip)), the stabilized
/// inner value of one contribution: a running maximum over lanes,
/// normalization by the maximum, then log(max) + log(normalized sum).
template <typename Real>
double combine_lanes(const Real* bg, const Real* tr, Real bg_coef, Real tr_coef) {
  Real m = 0;
  for (int l = 0; l < kLaneCount; ++l) {
    const Real c = bg_coef * bg[l] + tr_coef * tr[l];
    m = std::max(m, c);
  }
  const Real m_clip = std::max(m, static_cast<Real>(kRateClip));
  Real s = 0;
  for (int l = 0; l < kLaneCount; ++l) {
    const Real c = bg_coef * bg[l] + tr_coef * tr[l];
    s += c / m_clip;
  }
  const double lg = std::log(static_cast<double>(m_clip)) + std::log(static_cast<double>(s));
  return std::max(lg, std::log(kRateClip));
}

template <typename Real>
Real background_coefficient(const HawkesParams& p) {
  return static_cast<Real>(p.mu0 * p.inv_area() * p.tau_t_prec() * kInvSqrt2Pi);
}

template <typename Real>
Real trigger_coefficient(const HawkesParams& p) {
  return static_cast<Real>(p.xi0 * p.omega() * p.sigma_x_prec() * p.sigma_x_prec() * kInv2Pi);
}

/// Stabilized log-likelihood contribution of event n:
/// ell_n = log(max(sum_j lambda_{nj}, clip)) - Lambda_n.
template <typename Real>
double event_contribution_t(const EvalData<Real>& d, const HawkesParams& p, std::size_t n) {
  std::vector<Real> bg(kLaneCount), tr(kLaneCount);
  accumulate_background_lanes(d, n, static_cast<Real>(p.tau_t_prec()), bg.data());
  accumulate_trigger_lanes(d, n, static_cast<Real>(p.sigma_x_prec()),
                           static_cast<Real>(p.omega()), tr.data());
  const double inner = combine_lanes(bg.data(), tr.data(), background_coefficient<Real>(p),
                                     trigger_coefficient<Real>(p));
  return inner - integral_term(p, static_cast<double>(d.t[n]), static_cast<double>(d.t_end));
}

inline double event_contribution(const HawkesParams& p, const Catalog& catalog, std::size_t n) {
  if (n >= catalog.size()) throw std::out_of_range("event_contribution: index out of range");
  p.validate();
  const auto d = EvalData<double>::from(catalog, p.variant);
  return event_contribution_t(d, p, n);
}

/// Pairwise rate lambda_{nn'}: background KDE term gated on unequal times
/// plus the triggering term gated on strict precedence.
inline double pair_rate(const HawkesParams& p, const Event& source, const Event& target) {
  p.validate();
  const double td = target.t - source.t;
  double rate = 0.0;
  if (td != 0.0)
    rate += p.mu0 * p.inv_area() * p.tau_t_prec() * gaussian_pdf(td * p.tau_t_prec());
  if (td > 0.0) {
    const double scale =
        p.variant == Variant::varying ? p.sigma_x / std::sqrt(source.density) : p.sigma_x;
    const double dx = target.lon - source.lon;
    const double dy = target.lat - source.lat;
    const double d2 = dx * dx + dy * dy;
    rate += p.xi0 * p.omega() * std::exp(-td * p.omega()) * kInv2Pi / (scale * scale) *
            std::exp(-0.5 * d2 / (scale * scale));
  }
  return rate;
}

}  // namespace hawkes

#endif  // HAWKES_MODEL_HPP
