#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/loewner.hpp"
#include "fractal_lab/raster.hpp"
#include "fractal_lab/rng.hpp"
#include "fractal_lab/stats.hpp"
#include "oracles.hpp"

using namespace fractal_lab;
using cplx = std::complex<double>;

namespace {

// g_t(z) = sqrt(z^2 + 4t) on the branch mapping H into H.
cplx slit_map(cplx z, double t) {
  const cplx w = std::sqrt(z * z + 4.0 * t);
  return w.imag() >= 0.0 ? w : -w;
}

cplx at(const TraceCurve& tr, std::size_t k) { return {tr.curve.points()[k][0], tr.curve.points()[k][1]}; }

Driver zero_driver(Geometry g, double dt, std::size_t steps, double value = 0.0) {
  return Driver::from_values(g, dt, std::vector<double>(steps + 1, value));
}

}  // namespace

TEST_CASE("brownian drivers") {
  const auto z = drive_brownian(0.0, 1.0, 1e-3, 4, Geometry::Chordal);
  CHECK(z.steps() == 1000);
  for (double w : z.W) CHECK(w == 0.0);

  std::vector<double> ends;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const auto d = drive_brownian(4.0, 1.0, 1e-2, derive_stream(31, {s}), Geometry::Chordal);
    CHECK(d.W[0] == 0.0);
    ends.push_back(d.W.back());
  }
  CHECK(std::fabs(sample_variance(ends) - 4.0) <= 3.0 * 4.0 * std::sqrt(2.0 / 9999.0));

  const auto a = drive_brownian(2.0, 1.0, 1e-3, 9, Geometry::Radial);
  const auto b = drive_brownian(2.0, 1.0, 1e-3, 9, Geometry::Radial);
  CHECK(a.radial());
  CHECK(a.W == b.W);
  CHECK_THROWS_AS(drive_brownian(-1.0, 1.0, 1e-3, 1, Geometry::Chordal), InvalidArgument);
  CHECK_THROWS_AS(drive_brownian(1.0, 1.0, 2.0, 1, Geometry::Chordal), InvalidArgument);
}

TEST_CASE("rho drivers: parameter checks") {
  CHECK_THROWS_AS(drive_sle_rho_chordal(2.0, -2.0, 0.0, 1.0, 1.0, 1e-3, 1), UnsupportedParameter);
  CHECK_THROWS_AS(drive_sle_rho_chordal(2.0, -3.0, 0.0, 1.0, 1.0, 1e-3, 1), UnsupportedParameter);
  CHECK_THROWS_AS(drive_sle_rho_radial(2.0, -2.5, 0.0, 1.0, 1.0, 1e-3, 1), UnsupportedParameter);
  CHECK_THROWS_AS(drive_sle_rho_chordal(2.0, 1.0, 0.5, 0.5, 1.0, 1e-3, 1), InvalidArgument);
  CHECK_NOTHROW(drive_sle_rho_chordal(2.0, -1.9, 0.0, 1.0, 1.0, 1e-3, 1));
}

TEST_CASE("deterministic chordal rho driver follows the closed form") {
  // kappa = 0: d(W - V) = (rho + 2)/(W - V) dt and dW = rho/(W - V) dt, so
  // (W - V)^2 = g0^2 + 2(rho + 2)t and W - w0 = rho/(rho + 2) (gap - g0).
  for (double rho : {2.0, 0.5, -1.0}) {
    const auto d = drive_sle_rho_chordal(0.0, rho, 0.0, 1.0, 1.0, 1e-5, 1);
    double err = 0.0;
    for (std::size_t k = 0; k < d.W.size(); k += 97) {
      const double g = -std::sqrt(1.0 + 2.0 * (rho + 2.0) * d.time(k));
      err = std::max({err, std::fabs(d.W[k] - d.V[k] - g), std::fabs(d.W[k] - rho / (rho + 2.0) * (g + 1.0))});
    }
    CHECK(err <= 1e-6);
    CHECK(d.flagged.empty());
  }
}

TEST_CASE("deterministic radial rho driver follows the gap ODE") {
  // Gap normalised into (0, 2 pi): w0 = 0, v0 = 1 gives g0 = 2 pi - 1.
  const double rho = 2.0, g0 = 2.0 * std::numbers::pi - 1.0;
  const auto d = drive_sle_rho_radial(0.0, rho, 0.0, 1.0, 1.0, 1e-5, 1);
  double err = 0.0;
  for (std::size_t k = 0; k < d.W.size(); k += 1000) {
    const double g = oracle::rk4(g0, d.time(k), 4096, [rho](double x) { return (0.5 * rho + 1.0) / std::tan(0.5 * x); });
    err = std::max({err, std::fabs(d.W[k] - d.V[k] - g), std::fabs(d.W[k] - rho / (rho + 2.0) * (g - g0))});
  }
  CHECK(err <= 1e-6);
}

TEST_CASE("radial gap stays in (0, 2 pi) and chordal gap stays positive for rho >= 2") {
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto c = drive_sle_rho_chordal(2.0, 2.0, 0.0, -0.5, 1.0, 1e-3, derive_stream(41, {s}));
    bool positive = true;
    for (std::size_t k = 0; k < c.W.size(); ++k) positive = positive && c.W[k] - c.V[k] > 0.0;
    CHECK(positive);
    CHECK(c.flagged.empty());
  }
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto r = drive_sle_rho_radial(4.0, 0.5, 0.0, 2.0, 1.0, 1e-3, derive_stream(42, {s}));
    for (std::size_t k = 0; k < r.W.size(); ++k) {
      CHECK(r.W[k] - r.V[k] > 0.0);
      CHECK(r.W[k] - r.V[k] < 2.0 * std::numbers::pi);
    }
  }
}

TEST_CASE("rho = 0 drivers have the law of the plain driver") {
  std::vector<double> c0, c1, r0, r1;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    c0.push_back(drive_sle_rho_chordal(2.0, 0.0, 0.0, 1.0, 1.0, 1e-2, derive_stream(51, {s})).W.back());
    c1.push_back(drive_brownian(2.0, 1.0, 1e-2, derive_stream(52, {s}), Geometry::Chordal).W.back());
    r0.push_back(drive_sle_rho_radial(2.0, 0.0, 0.0, 1.0, 1.0, 1e-2, derive_stream(53, {s})).W.back());
    r1.push_back(drive_brownian(2.0, 1.0, 1e-2, derive_stream(54, {s}), Geometry::Radial).W.back());
  }
  CHECK_FALSE(ks_two_sample(c0, c1, 0.01).reject);
  CHECK_FALSE(ks_two_sample(r0, r1, 0.01).reject);
}

TEST_CASE("zero driver traces the vertical slit") {
  const auto d = zero_driver(Geometry::Chordal, 1e-4, 10000);
  const auto tr = chordal_trace(d);
  double err = 0.0;
  for (std::size_t k = 0; k < tr.curve.size(); ++k)
    err = std::max(err, std::abs(at(tr, k) - cplx(0.0, 2.0 * std::sqrt(d.time(k)))));
  CHECK(err <= 1e-9);
  CHECK(tr.swallowed == 0);
  CHECK(at(tr, 0) == cplx(0.0, 0.0));

  const auto shifted = chordal_trace(zero_driver(Geometry::Chordal, 1e-4, 10000, 0.75));
  for (std::size_t k = 0; k < tr.curve.size(); k += 500)
    CHECK(std::abs(at(shifted, k) - at(tr, k) - 0.75) <= 1e-12);
}

TEST_CASE("zipper matches the reference composition and is deterministic") {
  const auto d = drive_brownian(3.0, 1.0, 1e-3, 17, Geometry::Chordal);
  const auto a = chordal_trace(d), b = reference::chordal_trace(d), c = chordal_trace(d);
  CHECK(a.curve.points().coords() == b.curve.points().coords());
  CHECK(a.curve.points().coords() == c.curve.points().coords());
  CHECK(a.max_displacement == b.max_displacement);

  const auto r = drive_brownian(3.0, 1.0, 1e-3, 18, Geometry::Radial);
  CHECK(radial_trace(r).curve.points().coords() == reference::radial_trace(r).curve.points().coords());

  for (std::size_t k : {std::size_t{1}, std::size_t{10}, std::size_t{500}, std::size_t{1000}}) {
    CHECK(trace_tip(d, k) == at(a, k));
    CHECK(std::abs(trace_tip(r, k) - at(radial_trace(r), k)) <= 1e-12);
  }
}

TEST_CASE("Brownian scaling of the chordal trace") {
  const auto d = drive_brownian(2.5, 1.0, 1e-3, 5, Geometry::Chordal);
  for (double lambda : {2.0, 0.3, 7.0}) {
    std::vector<double> W(d.W);
    for (double& w : W) w *= lambda;
    const auto big = chordal_trace(Driver::from_values(Geometry::Chordal, lambda * lambda * d.dt, W));
    const auto base = chordal_trace(d);
    double err = 0.0;
    for (std::size_t k = 0; k < base.curve.size(); ++k) err = std::max(err, std::abs(at(big, k) - lambda * at(base, k)));
    CHECK(err <= 1e-6 * lambda);
  }
}

TEST_CASE("kappa = 2 traces: polyline crossings are chord artifacts") {
  // A driver jump starts the next slit on the boundary of the old hull, not
  // at the old tip, so the chord joining consecutive tips is not part of the
  // hull. Crossings of the tip polyline therefore only pair chords two apart.
  for (std::uint64_t s = 0; s < 2; ++s) {
    const auto tr = chordal_trace(drive_brownian(2.0, 1.0, 1e-4, derive_stream(61, {s}), Geometry::Chordal));
    const auto& p = tr.curve.points();
    std::size_t near = 0, far = 0;
    for (std::size_t a = 0; a + 1 < p.size(); ++a)
      for (std::size_t b = a + 2; b + 1 < p.size(); ++b) {
        if (segment_distance({p[a][0], p[a][1]}, {p[a + 1][0], p[a + 1][1]}, {p[b][0], p[b][1]},
                             {p[b + 1][0], p[b + 1][1]}) > 0.0)
          continue;
        (b == a + 2 ? near : far) += 1;
      }
    CHECK(far == 0);
    CHECK(polyline_self_crossings(p, 1e-3) == near);
  }

  // Repeating each driver value m times leaves the hull unchanged.
  const auto d = drive_brownian(2.0, 0.05, 1e-4, 62, Geometry::Chordal);
  std::vector<double> W{d.W[0]};
  for (std::size_t k = 1; k < d.W.size(); ++k) W.insert(W.end(), 4, d.W[k]);
  const auto fine = chordal_trace(Driver::from_values(Geometry::Chordal, d.dt / 4, W));
  const auto base = chordal_trace(d);
  for (std::size_t k = 0; k < base.curve.size(); ++k) CHECK(std::abs(at(fine, 4 * k) - at(base, k)) <= 1e-12);
}

TEST_CASE("radial traces") {
  const auto d = zero_driver(Geometry::Radial, 1e-3, 2000);
  const auto tr = radial_trace(d);
  CHECK(at(tr, 0) == cplx(1.0, 0.0));
  double off_axis = 0.0, koebe = 0.0;
  for (std::size_t k = 0; k < tr.curve.size(); ++k) {
    const cplx p = at(tr, k);
    off_axis = std::max(off_axis, std::fabs(p.imag()));
    CHECK(p.real() > 0.0);
    CHECK(p.real() <= 1.0);
    koebe = std::max(koebe, std::fabs(p.real() - oracle::koebe_root(std::exp(-d.time(k)) / 4.0)));
  }
  CHECK(off_axis <= 1e-6);
  CHECK(koebe <= 1e-6);

  const auto r = drive_brownian(3.0, 1.0, 1e-3, 71, Geometry::Radial);
  const auto base = radial_trace(r);
  for (double theta : {0.7, -2.0}) {
    std::vector<double> W(r.W);
    for (double& w : W) w += theta;
    const auto rot = radial_trace(Driver::from_values(Geometry::Radial, r.dt, W));
    double err = 0.0;
    for (std::size_t k = 0; k < base.curve.size(); ++k)
      err = std::max(err, std::abs(at(rot, k) - std::polar(1.0, theta) * at(base, k)));
    CHECK(err <= 1e-9);
  }

  // Koebe 1/4: dist(0, K_t) >= e^-t / 4, and tips lie on the hull. The
  // median tip modulus at capacity checkpoints 0, 0.5, ..., 3 decreases.
  std::vector<std::vector<double>> mods(7);
  for (std::uint64_t s = 0; s < 40; ++s) {
    const auto q = radial_trace(drive_brownian(3.0, 3.0, 1e-3, derive_stream(72, {s}), Geometry::Radial));
    for (std::size_t k = 0; k < q.curve.size(); ++k) CHECK(std::abs(at(q, k)) >= 0.25 * std::exp(-q.curve.times()[k]));
    for (std::size_t c = 0; c < 7; ++c) mods[c].push_back(std::abs(at(q, 500 * c)));
  }
  for (std::size_t c = 1; c < 7; ++c) CHECK(median(mods[c]) < median(mods[c - 1]));
}

TEST_CASE("whole-plane traces") {
  CHECK_THROWS_AS(whole_plane_trace(2.0, std::nullopt, 0.3, 1.0, 1e-3, 1), InvalidArgument);
  CHECK_THROWS_AS(whole_plane_trace(2.0, std::nullopt, 0.0, 1.0, 1e-3, 1), InvalidArgument);

  const auto ray = whole_plane_trace(0.0, std::nullopt, 0.25, 4.0, 1e-3, 1);
  double prev = 0.0, off = 0.0, mod = 0.0;
  for (std::size_t k = 0; k < ray.curve.size(); ++k) {
    const cplx p = at(ray, k);
    CHECK(p.real() > prev);
    prev = p.real();
    off = std::max(off, std::fabs(p.imag()));
    mod = std::max(mod, std::abs(p));
  }
  CHECK(std::abs(at(ray, 0) - 0.25) <= 1e-12);
  CHECK(off <= 1e-6 * mod);
  CHECK(mod > 1.0);
  CHECK(ray.curve.times().front() == doctest::Approx(-std::log(4.0)));

  // kappa = 0 at capacity 1: the disk slit [r a, a] with r / (1 + r)^2 = a / 4
  // inverts to a tip at a / r = 4 - O(a). The whole-plane limit is 4.
  for (double a : {0.25, 0.125, 0.0625}) {
    const double dt = 1e-3;
    const auto step = static_cast<std::size_t>(std::llround(std::log(1.0 / a) / dt));
    const auto d = whole_plane_driver(0.0, std::nullopt, step * dt, dt, 1);
    const double tip = std::abs(whole_plane_image(trace_tip(d, step), a));
    CHECK(tip == doctest::Approx(a / oracle::koebe_root(std::exp(-static_cast<double>(step) * dt) / 4.0)).epsilon(1e-9));
    CHECK(std::fabs(tip - 4.0) <= 2.5 * a);
  }

  // kappa = 2: tip modulus at capacity 1 stabilises as a shrinks. The O(a)
  // bias above separates a = 1/4 from a = 1/8 at this sample size.
  const double dt = 2e-3;
  std::vector<std::vector<double>> tips(3);
  for (int j = 0; j < 3; ++j) {
    const double a = std::ldexp(1.0, -3 - j);
    const auto step = static_cast<std::size_t>(std::llround(std::log(1.0 / a) / dt));
    for (std::uint64_t s = 0; s < 400; ++s) {
      const auto d = whole_plane_driver(2.0, std::nullopt, step * dt, dt, derive_stream(81, {std::uint64_t(j + 1), s}));
      tips[j].push_back(std::abs(whole_plane_image(trace_tip(d, step), a)));
    }
  }
  CHECK_FALSE(ks_two_sample(tips[0], tips[1], 0.05).reject);
  CHECK_FALSE(ks_two_sample(tips[1], tips[2], 0.05).reject);
}

TEST_CASE("forward map") {
  const auto zero = zero_driver(Geometry::Chordal, 1e-3, 1000);
  for (cplx z : {cplx(1.0, 1.0), cplx(-3.0, 0.1), cplx(0.2, 5.0), cplx(10.0, 0.01), cplx(0.0, 3.0)}) {
    const auto r = forward_map(zero, z, 1.0);
    CHECK(r.status == ForwardStatus::Ok);
    CHECK(std::abs(r.value - slit_map(z, 1.0)) <= 1e-10 * std::abs(slit_map(z, 1.0)));
    CHECK(forward_map(zero, z, 0.0).value == z);
  }

  // Points on the slit are swallowed when the tip reaches them: 2 sqrt(t) = y.
  const auto sw = forward_map(zero, {0.0, 1.0}, 1.0);
  CHECK(sw.status == ForwardStatus::Swallowed);
  CHECK(sw.time == doctest::Approx(0.25).epsilon(1e-3));

  const auto d = drive_brownian(2.0, 1.0, 1e-3, 91, Geometry::Chordal);
  for (double arg : {0.1, 0.9, 1.7, 2.5, 3.0}) {
    const cplx z = std::polar(1e3, arg);
    const auto r = forward_map(d, z, 1.0);
    CHECK(std::abs(r.value - z - 2.0 / z) <= 10.0 * std::pow(std::abs(z), -2.0));
  }
}

TEST_CASE("forward map sends the traced tip to the driving value") {
  const auto d = drive_brownian(2.0, 0.5, 1e-3, 93, Geometry::Chordal);
  const auto tr = chordal_trace(d);
  for (std::size_t k : {std::size_t{50}, std::size_t{200}, std::size_t{500}}) {
    // Nudge into H: the tip itself is a boundary point of the hull.
    const auto r = forward_map(d, at(tr, k) + cplx(0.0, 1e-12), d.time(k));
    CHECK(std::abs(r.value - d.W[k]) <= 1e-5);
  }
}
