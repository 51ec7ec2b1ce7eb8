#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "hawkes/model.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;

namespace {

// Simpson quadrature, independent of the closed forms under test.
double simpson(double a, double b, int panels, const std::function<double(double)>& f) {
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Event ev(double t, double lon, double lat, double density = 1.0) {
  return Event{t, lon, lat, "", density};
}

HawkesParams unit_params(Variant v = Variant::constant) {
  HawkesParams p;
  p.variant = v;
  return p;
}

std::vector<Event> random_events(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ut(0.0, 50.0), ux(-3.0, 3.0), ud(0.5, 2000.0);
  std::vector<Event> events;
  for (std::size_t i = 0; i < n; ++i) events.push_back(ev(ut(rng), ux(rng), ux(rng), ud(rng)));
  return events;
}

HawkesParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  HawkesParams p;
  p.mu0 = 0.05 + 2.0 * u(rng);
  p.tau_t = 0.5 + 10.0 * u(rng);
  p.xi0 = 0.05 + 1.5 * u(rng);
  p.sigma_x = 0.05 + u(rng);
  p.sigma_t = 0.2 + 5.0 * u(rng);
  p.area = 10.0 + 100.0 * u(rng);
  return p;
}

}  // namespace

TEST_CASE("gaussian_pdf matches the standard normal density") {
  CHECK(gaussian_pdf(0.0) == Catch::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(gaussian_pdf(1.0) == Catch::Approx(0.24197072451914337).epsilon(1e-12));
  CHECK(gaussian_pdf(40.0) == 0.0);  // underflow to zero permitted
  // quadrature cross-check: mass between -1 and 1
  const double mass = simpson(-1.0, 1.0, 2000, [](double z) { return gaussian_pdf(z); });
  CHECK(mass == Catch::Approx(0.6826894921370859).epsilon(1e-9));
}

TEST_CASE("gaussian_cdf agrees with quadrature of the density") {
  CHECK(gaussian_cdf(0.0) == Catch::Approx(0.5).margin(1e-15));
  CHECK(gaussian_cdf(1.0) == Catch::Approx(0.8413447460685429).margin(1e-12));
  CHECK(gaussian_cdf(-1.0) == Catch::Approx(0.15865525393145705).margin(1e-12));
  const double tail = simpson(-10.0, 1.3, 20000, [](double z) { return gaussian_pdf(z); });
  CHECK(gaussian_cdf(1.3) == Catch::Approx(tail).margin(1e-10));
  // monotone in [0, 1]
  double prev = 0.0;
  for (double z = -8.0; z <= 8.0; z += 0.25) {
    const double c = gaussian_cdf(z);
    CHECK(c >= prev);
    CHECK(c <= 1.0);
    prev = c;
  }
}

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp(std::vector<double>{3.25}) == 3.25);
  CHECK(log_sum_exp(std::vector<double>{0.0, 0.0}) == Catch::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.5}) ==
        Catch::Approx(1000.9740769841801).epsilon(1e-13));
  CHECK(std::isfinite(log_sum_exp(std::vector<double>{1e30, -1e30})));
  CHECK_THROWS_AS(log_sum_exp(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("single-precision exp kernel tracks libm") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const float x = static_cast<float>(-103.0 * u(rng));
    const float got = detail::exp_nonpos(x);
    const double want = std::exp(static_cast<double>(x));
    CHECK(std::abs(got - want) <= 4e-7 * want + 1e-44);
  }
  CHECK(detail::exp_nonpos(0.0f) == 1.0f);
  CHECK(detail::exp_nonpos(-200.0f) == 0.0f);
  CHECK(detail::exp_nonpos(-std::numeric_limits<float>::infinity()) == 0.0f);
}

TEST_CASE("pair_rate hand example") {
  HawkesParams p = unit_params();
  const Event source = ev(0.0, 0.0, 0.0);
  const Event target = ev(1.0, 0.0, 0.0);
  CHECK(pair_rate(p, source, target) == Catch::Approx(0.3005205560434625).epsilon(1e-12));
  // identical times: both indicators fail
  CHECK(pair_rate(p, source, source) == 0.0);
  // background only in the reverse direction (target precedes source)
  CHECK(pair_rate(p, target, source) == Catch::Approx(0.24197072451914337).epsilon(1e-12));
}

TEST_CASE("pair_rate varying variant with unit density matches constant") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    HawkesParams p = random_params(rng);
    auto events = random_events(rng, 2);
    events[0].density = 1.0;
    p.variant = Variant::constant;
    const double a = pair_rate(p, events[0], events[1]);
    p.variant = Variant::varying;
    const double b = pair_rate(p, events[0], events[1]);
    CHECK(a == b);
  }
}

TEST_CASE("pair_rate is nonnegative for random inputs") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    HawkesParams p = random_params(rng);
    if (i % 2) p.variant = Variant::varying;
    const auto events = random_events(rng, 2);
    CHECK(pair_rate(p, events[0], events[1]) >= 0.0);
  }
}

TEST_CASE("integral_term closed form against quadrature") {
  HawkesParams p = unit_params();
  CHECK(integral_term(p, 0.0, 1.0) == Catch::Approx(0.9734653048971006).epsilon(1e-12));
  // quadrature oracle: integral over (0, t_N] of the event's weighted
  // temporal kernels
  std::mt19937_64 rng(17);
  for (int i = 0; i < 20; ++i) {
    HawkesParams q = random_params(rng);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t_end = 1.0 + 20.0 * u(rng);
    const double t_n = t_end * u(rng);
    auto background = [&](double t) {
      return q.mu0 / q.tau_t * gaussian_pdf((t - t_n) / q.tau_t);
    };
    auto trigger = [&](double t) {
      return q.xi0 / q.sigma_t * std::exp(-(t - t_n) / q.sigma_t);
    };
    // split at t_n: the triggering integrand jumps there
    const double want = simpson(0.0, t_n, 20000, background) +
                        simpson(t_n, t_end, 20000, background) +
                        simpson(t_n, t_end, 20000, trigger);
    CHECK(integral_term(q, t_n, t_end) == Catch::Approx(want).margin(1e-5));
  }
}

TEST_CASE("integral_term edges") {
  HawkesParams p = unit_params();
  CHECK(integral_term(p, 0.0, 0.0) == 0.0);  // t_N = 0 boundary
  const double boundary = integral_term(p, 5.0, 5.0);
  CHECK(boundary >= 0.0);
  std::mt19937_64 rng(19);
  for (int i = 0; i < 200; ++i) {
    HawkesParams q = random_params(rng);
    std::uniform_real_distribution<double> u(0.0, 30.0);
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    CHECK(integral_term(q, a, b) >= 0.0);
  }
  CHECK_THROWS_AS(integral_term(p, 2.0, 1.0), std::invalid_argument);
}

TEST_CASE("event_contribution boundary and clip cases") {
  HawkesParams p = unit_params();
  const Catalog solo({ev(0.0, 0.0, 0.0)});
  CHECK(event_contribution(p, solo, 0) == Catch::Approx(-92.10340371976183).epsilon(1e-12));

  // astronomically separated events: every pair rate underflows, the
  // clip floor engages exactly
  std::vector<Event> far;
  for (int i = 0; i < 4; ++i) far.push_back(ev(i * 1e8, i * 1e8, -1e8 * i));
  const Catalog far_catalog(far);
  for (std::size_t n = 0; n < far_catalog.size(); ++n) {
    const double lam = integral_term(p, far_catalog[n].t, far_catalog.t_end());
    CHECK(event_contribution(p, far_catalog, n) == std::log(kRateClip) - lam);
  }
}

TEST_CASE("event_contribution matches a naive lambda sum") {
  HawkesParams p = unit_params();
  const Catalog two({ev(0.0, 0.0, 0.0), ev(1.0, 0.0, 0.0)});
  const double want1 =
      std::log(pair_rate(p, two[0], two[1]) + pair_rate(p, two[1], two[1])) -
      integral_term(p, 1.0, 1.0);
  CHECK(event_contribution(p, two, 1) == Catch::Approx(want1).epsilon(1e-12));

  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    HawkesParams q = random_params(rng);
    if (rep % 2) q.variant = Variant::varying;
    const Catalog catalog = Catalog::sorted(random_events(rng, 40));
    for (std::size_t n = 0; n < catalog.size(); n += 7) {
      double sum = 0.0;
      for (std::size_t j = 0; j < catalog.size(); ++j)
        sum += pair_rate(q, catalog[j], catalog[n]);
      const double want =
          std::log(std::max(sum, kRateClip)) - integral_term(q, catalog[n].t, catalog.t_end());
      CHECK(event_contribution(q, catalog, n) == Catch::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("clip floor lower-bounds every contribution") {
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 50; ++rep) {
    HawkesParams q = random_params(rng);
    const Catalog catalog = Catalog::sorted(random_events(rng, 20));
    for (std::size_t n = 0; n < catalog.size(); ++n) {
      const double lam = integral_term(q, catalog[n].t, catalog.t_end());
      CHECK(event_contribution(q, catalog, n) + lam >= std::log(kRateClip) - 1e-12);
    }
  }
}

TEST_CASE("variant collapse is bitwise at unit density") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 20; ++rep) {
    HawkesParams q = random_params(rng);
    auto events = random_events(rng, 30);
    for (auto& e : events) e.density = 1.0;
    const Catalog catalog = Catalog::sorted(std::move(events));
    for (std::size_t n = 0; n < catalog.size(); n += 5) {
      q.variant = Variant::constant;
      const double a = event_contribution(q, catalog, n);
      q.variant = Variant::varying;
      const double b = event_contribution(q, catalog, n);
      CHECK(a == b);
    }
  }
}

TEST_CASE("translation invariance of contributions") {
  std::mt19937_64 rng(37);
  HawkesParams q = random_params(rng);
  auto events = random_events(rng, 25);
  const Catalog base = Catalog::sorted(std::vector<Event>(events));
  for (auto& e : events) {
    e.lon += 13.75;
    e.lat -= 4.5;
  }
  const Catalog shifted = Catalog::sorted(std::move(events));
  for (std::size_t n = 0; n < base.size(); ++n)
    CHECK(event_contribution(q, base, n) ==
          Catch::Approx(event_contribution(q, shifted, n)).epsilon(1e-12));
}

TEST_CASE("catalog ordering is enforced, file order irrelevant after sorting") {
  std::vector<Event> events{ev(2.0, 0, 0), ev(1.0, 0.5, 0.5), ev(3.0, -1, 1)};
  CHECK_THROWS_AS(Catalog(events), std::invalid_argument);
  const Catalog sorted_a = Catalog::sorted(std::vector<Event>(events));
  std::reverse(events.begin(), events.end());
  const Catalog sorted_b = Catalog::sorted(std::move(events));
  HawkesParams p = unit_params();
  for (std::size_t n = 0; n < sorted_a.size(); ++n)
    CHECK(event_contribution(p, sorted_a, n) == event_contribution(p, sorted_b, n));
}

TEST_CASE("catalog invariant violations") {
  CHECK_THROWS_AS(Catalog({}), std::invalid_argument);
  CHECK_THROWS_AS(Catalog({ev(-1.0, 0, 0)}), std::invalid_argument);
  CHECK_THROWS_AS(Catalog({ev(0.0, 0, 0, -2.0)}), std::invalid_argument);
  auto nan_loc = ev(0.0, std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(Catalog({nan_loc}), std::invalid_argument);
  CHECK_NOTHROW(Catalog({nan_loc}, /*coarse_only=*/true));
}

TEST_CASE("params validation") {
  HawkesParams p = unit_params();
  CHECK_NOTHROW(p.validate());
  p.sigma_t = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
