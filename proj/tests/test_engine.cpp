#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hawkes/engine.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;

namespace {

Catalog random_catalog(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> ut(0.0, 80.0), ux(-4.0, 4.0), ud(0.5, 3000.0);
  std::vector<Event> events;
  for (std::size_t i = 0; i < n; ++i)
    events.push_back({ut(rng), ux(rng), ux(rng), "", ud(rng)});
  return Catalog::sorted(std::move(events));
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

TEST_CASE("make_partition distributes remainder to the front") {
  const Partition p = make_partition(10, 3);
  REQUIRE(p.workers() == 3);
  CHECK(p.ranges[0] == std::pair<std::size_t, std::size_t>(0, 4));
  CHECK(p.ranges[1] == std::pair<std::size_t, std::size_t>(4, 7));
  CHECK(p.ranges[2] == std::pair<std::size_t, std::size_t>(7, 10));

  const Partition singletons = make_partition(8, 8);
  for (std::size_t w = 0; w < 8; ++w)
    CHECK(singletons.ranges[w] == std::pair<std::size_t, std::size_t>(w, w + 1));

  const Partition big = make_partition(1000000, 32);
  for (const auto& [b, e] : big.ranges) CHECK(e - b == 31250);

  CHECK_THROWS_AS(make_partition(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_partition(5, 6), std::invalid_argument);
}

TEST_CASE("partition invariants hold for random shapes") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng() % 5000;
    const std::size_t g = 1 + rng() % n;
    const Partition p = make_partition(n, g);
    REQUIRE(p.workers() == g);
    std::size_t expect_begin = 0;
    std::size_t min_len = n, max_len = 0;
    for (const auto& [b, e] : p.ranges) {
      CHECK(b == expect_begin);
      CHECK(e > b);
      min_len = std::min(min_len, e - b);
      max_len = std::max(max_len, e - b);
      expect_begin = e;
    }
    CHECK(expect_begin == n);
    CHECK(max_len - min_len <= 1);
  }
}

TEST_CASE("single-slice likelihood equals direct contribution sum") {
  std::mt19937_64 rng(41);
  const Catalog catalog = random_catalog(rng, 120);
  const HawkesParams p = random_params(rng);
  double direct = 0.0;
  for (std::size_t n = 0; n < catalog.size(); ++n) direct += event_contribution(p, catalog, n);
  const double total = log_likelihood(catalog, p, make_partition(catalog.size(), 1), Precision::dbl);
  CHECK(total == direct);
}

TEST_CASE("N=1 catalog hits the clip floor") {
  const Catalog solo({Event{0.0, 0.0, 0.0, "", 1.0}});
  HawkesParams p;
  const double ll = log_likelihood(solo, p, make_partition(1, 1), Precision::dbl);
  CHECK(ll == Catch::Approx(-92.10340371976183).epsilon(1e-12));
}

TEST_CASE("partition independence across worker counts") {
  std::mt19937_64 rng(43);
  const Catalog catalog = random_catalog(rng, 2000);
  for (int rep = 0; rep < 3; ++rep) {
    HawkesParams p = random_params(rng);
    if (rep % 2) p.variant = Variant::varying;
    const double base = log_likelihood(catalog, p, make_partition(catalog.size(), 1), Precision::dbl);
    const float base_single =
        static_cast<float>(log_likelihood(catalog, p, make_partition(catalog.size(), 1), Precision::single));
    for (std::size_t g : {2, 4, 8}) {
      const double got = log_likelihood(catalog, p, make_partition(catalog.size(), g), Precision::dbl);
      CHECK(got == Catch::Approx(base).epsilon(1e-12));
      const double got_single =
          log_likelihood(catalog, p, make_partition(catalog.size(), g), Precision::single);
      CHECK(got_single == Catch::Approx(base_single).epsilon(1e-5));
    }
  }
}

TEST_CASE("determinism: identical calls give bitwise-identical results") {
  std::mt19937_64 rng(47);
  const Catalog catalog = random_catalog(rng, 600);
  const HawkesParams p = random_params(rng);
  for (std::size_t g : {1, 3, 7}) {
    const Partition part = make_partition(catalog.size(), g);
    const double a = log_likelihood(catalog, p, part, Precision::dbl);
    const double b = log_likelihood(catalog, p, part, Precision::dbl);
    CHECK(a == b);
    const double fa = log_likelihood(catalog, p, part, Precision::single);
    const double fb = log_likelihood(catalog, p, part, Precision::single);
    CHECK(fa == fb);
  }
}

TEST_CASE("engine agrees with the naive oracle") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 10 + rng() % 800;
    const Catalog catalog = random_catalog(rng, n);
    HawkesParams p = random_params(rng);
    if (rep % 2) p.variant = Variant::varying;
    const double oracle = naive_log_likelihood(catalog, p);
    const double got = log_likelihood(catalog, p, make_partition(n, 1 + rep % 4), Precision::dbl);
    CHECK(got == Catch::Approx(oracle).epsilon(1e-10));
    const double got_single =
        log_likelihood(catalog, p, make_partition(n, 1 + rep % 4), Precision::single);
    CHECK(got_single == Catch::Approx(oracle).epsilon(1e-4));
  }
}

TEST_CASE("single precision stays finite on adversarial catalogs") {
  // coincident locations and times spread apart
  std::vector<Event> coincident;
  for (int i = 0; i < 3000; ++i) coincident.push_back({i * 0.01, 0.5, 0.5, "", 1.0});
  const Catalog c1(coincident);
  HawkesParams p;
  p.sigma_x = 1e-3;
  CHECK(std::isfinite(log_likelihood(c1, p, make_partition(c1.size(), 2), Precision::single)));

  std::vector<Event> separated;
  for (int i = 0; i < 3000; ++i)
    separated.push_back({i * 10.0, (i % 2 ? 1.0 : -1.0) * 1e4, (i % 3 ? 1.0 : -1.0) * 1e4, "", 1.0});
  const Catalog c2(separated);
  CHECK(std::isfinite(log_likelihood(c2, p, make_partition(c2.size(), 2), Precision::single)));
}

TEST_CASE("workspace recombination is bitwise consistent with full evaluation") {
  std::mt19937_64 rng(59);
  const Catalog catalog = random_catalog(rng, 300);
  HawkesParams p = random_params(rng);
  const Partition part = make_partition(catalog.size(), 2);

  LikelihoodWorkspace<double> ws(catalog, p.variant, 2);
  CHECK(ws.evaluate_full(p) == log_likelihood(catalog, p, part, Precision::dbl));

  // mu0/xi0-only change: cached lanes, still exact
  HawkesParams q = p;
  q.mu0 *= 1.7;
  q.xi0 *= 0.4;
  CHECK(ws.evaluate_proposal(q) == log_likelihood(catalog, q, part, Precision::dbl));
  ws.commit_proposal();

  // tau_t change refreshes background lanes only
  HawkesParams r = q;
  r.tau_t *= 2.3;
  CHECK(ws.evaluate_proposal(r) == log_likelihood(catalog, r, part, Precision::dbl));
  // rejected: current caches must still serve q exactly
  CHECK(ws.evaluate_proposal(q) == log_likelihood(catalog, q, part, Precision::dbl));
  ws.commit_proposal();

  // sigma changes refresh the trigger lanes
  HawkesParams s = q;
  s.sigma_x *= 0.6;
  s.sigma_t *= 1.9;
  CHECK(ws.evaluate_proposal(s) == log_likelihood(catalog, s, part, Precision::dbl));
  ws.commit_proposal();
  CHECK(ws.evaluate_full(s) == log_likelihood(catalog, s, part, Precision::dbl));
}

TEST_CASE("benchmark_eval produces a well-formed table") {
  const auto rows = benchmark_eval({200, 400}, {1, 2}, 3);
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.seconds_min > 0.0);
    CHECK(r.seconds_median >= r.seconds_min);
  }
  CHECK(benchmark_eval({200}, {1}, 0).empty());

  std::ostringstream os;
  write_benchmark_csv(os, rows);
  CHECK(os.str().find("N,G,precision,variant,seconds_median,seconds_min") == 0);
}

TEST_CASE("fitted log-log slope recovers a quadratic") {
  std::vector<std::pair<std::size_t, double>> pts;
  for (std::size_t n : {1000, 2000, 4000}) pts.emplace_back(n, 1e-9 * n * n);
  CHECK(fitted_loglog_slope(pts) == Catch::Approx(2.0).margin(1e-9));
}
