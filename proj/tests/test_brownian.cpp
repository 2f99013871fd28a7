#include <cmath>
#include <vector>

#include "doctest.h"
#include "fractal_lab/brownian.hpp"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/rng.hpp"
#include "fractal_lab/stats.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

double var_of(const std::vector<double>& xs) { return sample_variance(xs); }

// |sample variance - v| within 3 sigma for Gaussian data (sd of s^2 is v sqrt(2/(n-1))).
bool variance_band(const std::vector<double>& xs, double v) {
  return std::fabs(var_of(xs) - v) <= 3.0 * v * std::sqrt(2.0 / static_cast<double>(xs.size() - 1));
}

}  // namespace

TEST_CASE("rng streams") {
  Rng a(7), b(7), c(8);
  for (int k = 0; k < 100; ++k) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
  }
  CHECK(Rng(7).next_u64() != c.next_u64());
  CHECK(derive_stream(1, {2, 3}) != derive_stream(1, {3, 2}));
  CHECK(derive_stream(1, {2, 3}) == derive_stream(1, {2, 3}));
  Rng u(3);
  for (int k = 0; k < 10000; ++k) {
    const double x = u.uniform_open();
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("inverse normal cdf inverts the cdf") {
  for (double p : {1e-300, 1e-12, 1e-5, 0.01, 0.2, 0.5, 0.7, 0.975, 1 - 1e-9}) {
    const double x = inverse_normal_cdf(p);
    CHECK(oracle::Phi(x) == doctest::Approx(p).epsilon(1e-12));
  }
}

TEST_CASE("poisson variates") {
  for (double mean_ : {0.5, 7.0, 1600.0}) {
    Rng r(static_cast<std::uint64_t>(mean_ * 10));
    std::vector<double> xs;
    for (int k = 0; k < 20000; ++k) xs.push_back(static_cast<double>(r.poisson(mean_)));
    const double se = std::sqrt(mean_ / xs.size());
    CHECK(std::fabs(mean(xs) - mean_) <= 4 * se);
    CHECK(sample_variance(xs) / mean_ == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("fill_gaussian is independent of thread count and matches the serial version") {
  std::vector<double> a(3 * kGaussBlock + 17), b(a.size()), c(a.size());
  set_thread_cap(1);
  fill_gaussian(a, 42, 1.5);
  set_thread_cap(4);
  fill_gaussian(b, 42, 1.5);
  set_thread_cap(0);
  reference::fill_gaussian(c, 42, 1.5);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("sample_bm basics") {
  const auto p = sample_bm(2, 10, 1.0, 5);
  CHECK(p.size() == 1025);
  CHECK(p.at(0)[0] == 0.0);
  CHECK(p.at(0)[1] == 0.0);
  const auto q = sample_bm(2, 10, 1.0, 5);
  CHECK(p.values == q.values);
  CHECK_THROWS_AS(sample_bm(0, 10, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_bm(1, 0, 1.0, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_bm(1, 10, 0.0, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_bm(1, 27, 1.0, 1), CapacityError);
}

TEST_CASE("B(1) variance and independent increments") {
  std::vector<double> end, first, second;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto p = sample_bm(1, 10, 1.0, derive_stream(11, {s}));
    end.push_back(p.at(1024)[0]);
    first.push_back(p.at(512)[0]);
    second.push_back(p.at(1024)[0] - p.at(512)[0]);
  }
  CHECK(variance_band(end, 1.0));
  double cov = 0.0;
  for (std::size_t k = 0; k < first.size(); ++k) cov += first[k] * second[k];
  const double corr = cov / first.size() / 0.5;
  CHECK(std::fabs(corr) <= 3.0 / std::sqrt(10000.0));
}

TEST_CASE("rescaled increments are standard normal (KS)") {
  const auto p = sample_bm(1, 14, 1.0, 77);
  std::vector<double> inc;
  for (std::size_t k = 1; k <= 10000; ++k) inc.push_back((p.at(k)[0] - p.at(k - 1)[0]) * std::sqrt(16384.0));
  std::sort(inc.begin(), inc.end());
  double d = 0.0;
  for (std::size_t k = 0; k < inc.size(); ++k) {
    const double F = oracle::Phi(inc[k]);
    d = std::max({d, std::fabs(F - double(k) / inc.size()), std::fabs(F - double(k + 1) / inc.size())});
  }
  CHECK(d <= 1.628 / std::sqrt(10000.0));
}

TEST_CASE("refinement keeps the coarse grid and follows the bridge law") {
  const auto p = sample_bm(2, 8, 1.0, 3);
  const auto r = refine_bm(p, 10);
  CHECK(restrict_bm(r, 8).values == p.values);
  CHECK(refine_bm(refine_bm(p, 9), 10).values == r.values);
  CHECK_THROWS_AS(refine_bm(p, 8), InvalidArgument);

  std::vector<double> resid;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto c = sample_bm(1, 1, 1.0, derive_stream(5, {s}));
    const auto f = refine_bm(c, 2);
    resid.push_back(f.at(1)[0] - 0.5 * (f.at(0)[0] + f.at(2)[0]));
  }
  // dt = 1/2 on the coarse grid: midpoint variance dt/4.
  CHECK(variance_band(resid, 0.125));
}

TEST_CASE("bridge loops") {
  const auto l = sample_bridge_loop({0.3, -0.2}, 1.0, 65, 9);
  CHECK(l.size() == 65);
  CHECK(l.values[0] == 0.3);
  CHECK(l.values[1] == -0.2);
  CHECK(l.values[128] == 0.3);
  CHECK(l.values[129] == -0.2);
  CHECK_THROWS_AS(sample_bridge_loop({0, 0}, 1.0, 7, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_bridge_loop({0, 0}, 0.0, 9, 1), InvalidArgument);

  std::vector<double> mid;
  for (std::uint64_t s = 0; s < 10000; ++s) mid.push_back(sample_bridge_loop({0, 0}, 1.0, 65, s).values[64]);
  CHECK(variance_band(mid, 0.25));

  int small = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto t = sample_bridge_loop({0, 0}, 1e-6, 65, s);
    double rmax = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) rmax = std::max(rmax, std::hypot(t.values[2 * k], t.values[2 * k + 1]));
    small += rmax < 0.01;
  }
  CHECK(small >= 990);
}

TEST_CASE("dyadic scan matches the reference and the event definition") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = sample_bm(2, 14, 1.0, s);
    const auto hits = dyadic_event_scan(p, 1.5, 6);
    const auto ref = reference::dyadic_event_scan(p, 1.5, 6);
    REQUIRE(hits.size() == ref.size());
    for (std::size_t k = 0; k < hits.size(); ++k) {
      CHECK(hits[k].index == ref[k].index);
      CHECK(hits[k].increment_norm <= 2.0 / 8.0);
      CHECK(hits[k].max_excursion >= 1.5 / 8.0);
    }
  }
  const auto p = sample_bm(1, 12, 1.0, 1);
  std::size_t small_inc = 0;
  for (std::size_t i = 0; i < 256; ++i) small_inc += std::fabs(p.at(16 * (i + 1))[0] - p.at(16 * i)[0]) <= 2.0 / 16.0;
  CHECK(dyadic_event_scan(p, 0.0, 8).size() == small_inc);
  CHECK_THROWS_AS(dyadic_event_scan(sample_bm(1, 8, 2.0, 1), 1.0, 4), InvalidArgument);
  CHECK_THROWS_AS(dyadic_event_scan(p, 1.0, 13), InvalidArgument);
}

TEST_CASE("hit witnesses satisfy the trace and graph ratio bounds") {
  const double a = 3.0;
  const int level = 8, depth = 16;
  int checked = 0;
  for (std::uint64_t s = 0; s < 200 && checked < 20; ++s) {
    const auto p = sample_bm(1, depth, 1.0, derive_stream(99, {s}));
    const auto hits = dyadic_event_scan(p, a, level);
    if (hits.empty()) continue;
    const auto trace = trace_curve(p), graph = graph_curve(p);
    for (const auto& h : hits) {
      const std::size_t i0 = h.index << (depth - level), i1 = (h.index + 1) << (depth - level);
      CHECK(witness_ratio(trace, i0, i1) >= a / 2.0);
      CHECK(witness_ratio(graph, i0, i1) >= a / 3.0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("per-path hit counts follow the interval decomposition") {
  // Hits per path equal 2^j P(E and F); P from the image-series oracle
  // (continuous maximum) bounds the grid estimate from above.
  const double a = 2.0;
  const int level = 6, depth = 14;
  std::vector<double> hits;
  for (std::uint64_t s = 0; s < 1000; ++s)
    hits.push_back(static_cast<double>(dyadic_event_scan(sample_bm(1, depth, 1.0, derive_stream(4, {s})), a, level).size()));
  const auto est = joint_event_probability(1, a, depth - level, 20000, 8);
  const double m = mean(hits), se = std::sqrt(sample_variance(hits) / hits.size());
  const double expected = 64.0 * est.estimate;
  CHECK(std::fabs(m - expected) <= 3.0 * se + 64.0 * est.radius);
  CHECK(m <= 64.0 * oracle::joint_event_1d(2.0, a) + 3.0 * se);
}

TEST_CASE("at least one hit at level 12 with a = 3 is a rare event per path") {
  // The continuous-time probability of a hit among the 4096 intervals.
  const double p1 = oracle::joint_event_1d(2.0, 3.0);
  const double any = 1.0 - std::pow(1.0 - p1, 4096.0);
  CHECK(any == doctest::Approx(0.2285).epsilon(1e-3));
  int with_hit = 0;
  for (std::uint64_t s = 0; s < 200; ++s)
    with_hit += !dyadic_event_scan(sample_bm(1, 20, 1.0, derive_stream(12, {s})), 3.0, 12).empty();
  // Grid maxima only lower the rate.
  CHECK(with_hit / 200.0 <= any + 3.0 * std::sqrt(any * (1 - any) / 200.0));
}

TEST_CASE("joint event probability") {
  const auto e0 = joint_event_probability(1, 0.0, 8, 20000, 1);
  CHECK(std::fabs(e0.estimate - (2.0 * oracle::Phi(2.0) - 1.0)) <= e0.radius);
  CHECK(joint_event_probability(1, 50.0, 8, 1000, 1).estimate == 0.0);
  double prev = 2.0;
  for (double a : {1.0, 2.0, 3.0, 4.0}) {
    const auto e = joint_event_probability(1, a, 8, 20000, 2);
    CHECK(e.estimate <= prev);
    prev = e.estimate + e.radius;
  }
  CHECK_THROWS_AS(joint_event_probability(1, 1.0, 8, 99, 1), InvalidArgument);
}

TEST_CASE("Levy modulus ratio") {
  BrownianPath z = sample_bm(1, 8, 1.0, 1);
  std::fill(z.values.begin(), z.values.end(), 0.0);
  CHECK(levy_modulus_ratio(z, 1.0 / 16) == 0.0);
  CHECK_THROWS_AS(levy_modulus_ratio(z, 1.0 / 1024), InvalidArgument);

  std::vector<double> coarse, fine;
  int in_band = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto p = sample_bm(1, 20, 1.0, derive_stream(21, {s}));
    const double r = levy_modulus_ratio(p, std::ldexp(1.0, -16));
    fine.push_back(r);
    coarse.push_back(levy_modulus_ratio(p, std::ldexp(1.0, -8)));
    in_band += r >= 0.8 && r <= 1.2;
  }
  CHECK(in_band >= 90);
  CHECK(std::fabs(median(fine) - 1.0) < std::fabs(median(coarse) - 1.0));
}

TEST_CASE("graph curve") {
  BrownianPath z = sample_bm(1, 6, 1.0, 1);
  std::fill(z.values.begin(), z.values.end(), 0.0);
  const auto g = graph_curve(z);
  CHECK(g.dim() == 2);
  CHECK(turning_constant(g).constant == 1.0);
  const auto h = graph_curve(sample_bm(2, 6, 1.0, 2));
  CHECK(h.dim() == 3);
  for (std::size_t k = 1; k < h.size(); ++k) CHECK(h.points()[k][0] > h.points()[k - 1][0]);
}
