#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/geom.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

PolyCurve curve2(const std::vector<std::array<double, 2>>& pts) {
  std::vector<double> c;
  for (const auto& p : pts) {
    c.push_back(p[0]);
    c.push_back(p[1]);
  }
  return PolyCurve::from_points(PointSet(2, c));
}

std::vector<oracle::Pt> rows(const PointSet& ps) {
  std::vector<oracle::Pt> out;
  for (std::size_t k = 0; k < ps.size(); ++k) out.emplace_back(ps[k].begin(), ps[k].end());
  return out;
}

PolyCurve random_walk(std::size_t n, unsigned seed, std::size_t dim = 2) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g;
  std::vector<double> c(dim, 0.0);
  for (std::size_t k = 1; k < n; ++k)
    for (std::size_t d = 0; d < dim; ++d) c.push_back(c[(k - 1) * dim + d] + g(gen));
  return PolyCurve::from_points(PointSet(dim, c));
}

// Densified U-polyline (0,0) -> (1,0) -> (1,1) -> (0,1).
PolyCurve dense_u(std::size_t n) {
  std::vector<std::array<double, 2>> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = 3.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    if (s <= 1.0)
      pts.push_back({s, 0.0});
    else if (s <= 2.0)
      pts.push_back({1.0, s - 1.0});
    else
      pts.push_back({3.0 - s, 1.0});
  }
  return curve2(pts);
}

}  // namespace

TEST_CASE("point set and curve validation") {
  CHECK_THROWS_AS(PointSet(0, {}), InvalidArgument);
  CHECK_THROWS_AS(PointSet(2, {1.0, 2.0, 3.0}), InvalidArgument);
  CHECK_THROWS_AS(PointSet(1, {NAN}), InvalidArgument);
  CHECK_THROWS_AS(PolyCurve(PointSet(1, {0.0}), {0.0}), InvalidArgument);
  CHECK_THROWS_AS(PolyCurve(PointSet(1, {0.0, 1.0}), {0.0, 0.0}), InvalidArgument);
  CHECK_THROWS_AS(PolyCurve(PointSet(1, {0.0, 1.0}), {0.0}), InvalidArgument);
}

TEST_CASE("curve diameter examples") {
  const auto sq = curve2({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(curve_diameter(sq, {2, 3}) == 0.0);
  CHECK(curve_diameter(sq, {0, 4}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(curve_diameter(sq, {2, 2}), InvalidArgument);
  CHECK_THROWS_AS(curve_diameter(sq, {0, 5}), InvalidArgument);

  std::vector<std::array<double, 2>> circle;
  for (int k = 0; k < 1000; ++k) {
    const double t = 2.0 * std::numbers::pi * k / 1000.0;
    circle.push_back({std::cos(t), std::sin(t)});
  }
  const auto c = curve2(circle);
  const double brute = oracle::diameter(rows(c.points()), 0, 1000);
  CHECK(curve_diameter(c, {0, 1000}) == doctest::Approx(brute).epsilon(1e-14));
  CHECK(std::fabs(brute - 2.0) <= 1e-4);
}

TEST_CASE("diameter matches brute force on random windows") {
  for (unsigned s = 0; s < 20; ++s) {
    const auto w = random_walk(300, s, 2 + s % 2);
    const auto pts = rows(w.points());
    std::mt19937 gen(s);
    for (int t = 0; t < 10; ++t) {
      std::size_t a = gen() % 300, b = gen() % 300;
      if (a > b) std::swap(a, b);
      ++b;
      CHECK(window_diameter(w.points(), a, b) == doctest::Approx(oracle::diameter(pts, a, b)).epsilon(1e-13));
      // Monotone under range inclusion.
      if (b - a > 2) CHECK(curve_diameter(w, {a, b}) >= curve_diameter(w, {a + 1, b - 1}));
    }
  }
}

TEST_CASE("turning constant examples") {
  const auto line = curve2({{0, 0}, {1, 0}, {2, 0}});
  const auto r = turning_constant(line);
  CHECK(r.constant == 1.0);

  const auto u = curve2({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  const auto ru = turning_constant(u);
  const auto ou = oracle::turning(rows(u.points()));
  CHECK(ou.constant == doctest::Approx(std::sqrt(2.0)));
  CHECK(ru.constant == doctest::Approx(ou.constant).epsilon(1e-15));
  CHECK(ru.i == 0);
  CHECK(ru.j == 3);

  std::vector<std::array<double, 2>> semi;
  for (int k = 0; k < 64; ++k) {
    const double t = std::numbers::pi * k / 63.0;
    semi.push_back({std::cos(t), std::sin(t)});
  }
  const auto sc = curve2(semi);
  const double os = oracle::turning(rows(sc.points())).constant;
  CHECK(os <= 1.1);
  CHECK(turning_constant(sc).constant == doctest::Approx(os).epsilon(1e-13));

  CHECK_THROWS_AS(turning_constant(curve2({{1, 1}, {1, 1}, {1, 1}})), DegenerateCurve);
}

TEST_CASE("turning constant agrees with the brute-force oracle") {
  for (unsigned s = 0; s < 30; ++s) {
    const auto w = random_walk(40 + s, s, 2 + s % 2);
    const auto o = oracle::turning(rows(w.points()));
    const auto r = turning_constant(w);
    CHECK(r.constant == doctest::Approx(o.constant).epsilon(1e-12));
    CHECK(r.constant >= 1.0);
    CHECK(witness_ratio(w, r.i, r.j) == doctest::Approx(r.constant).epsilon(1e-12));
  }
}

TEST_CASE("repeated points are reported as infinite turning") {
  const auto loop = curve2({{0, 0}, {1, 0}, {1, 1}, {0, 0}, {-1, 0}});
  const auto r = turning_constant(loop);
  CHECK(r.infinite());
  REQUIRE(r.infinite_count == 1);
  CHECK(r.infinite_witnesses[0] == std::pair<std::size_t, std::size_t>{0, 3});
}

TEST_CASE("turning is invariant under similarities") {
  for (unsigned s = 0; s < 10; ++s) {
    const auto w = random_walk(200, 100 + s);
    const double th = 0.3 + s, lam = 0.5 * (s + 1);
    std::vector<double> c;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double x = w.points()[k][0], y = w.points()[k][1];
      c.push_back(lam * (std::cos(th) * x - std::sin(th) * y) + 3.0);
      c.push_back(lam * (std::sin(th) * x + std::cos(th) * y) - 7.0);
    }
    const auto m = PolyCurve::from_points(PointSet(2, c));
    const auto a = turning_constant(w), b = turning_constant(m);
    CHECK(a.constant == doctest::Approx(b.constant).epsilon(1e-12));
    CHECK(a.i == b.i);
    CHECK(a.j == b.j);
  }
}

TEST_CASE("turning profile") {
  const auto line = curve2({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}, {6, 0}, {7, 0}, {8, 0}});
  for (const auto& r : turning_profile(line, 3)) CHECK(r.constant == 1.0);

  const auto u = dense_u(1024);
  const auto prof = turning_profile(u, 3);
  REQUIRE(prof.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t stride = std::size_t{1} << (2 - k);
    std::vector<oracle::Pt> sub;
    for (std::size_t i = 0; i < u.size(); i += stride) sub.push_back({u.points()[i][0], u.points()[i][1]});
    if (k) CHECK(prof[k].constant >= prof[k - 1].constant);
    CHECK(prof[k].stride == stride);
    CHECK(prof[k].constant == doctest::Approx(oracle::turning(sub).constant).epsilon(1e-12));
  }
  CHECK(prof[2].constant == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(turning_profile(line, 4), InvalidArgument);
}

TEST_CASE("turning profile is nondecreasing on random walks") {
  for (unsigned s = 0; s < 10; ++s) {
    const auto prof = turning_profile(random_walk(5000, 300 + s), 4);
    for (std::size_t k = 1; k < prof.size(); ++k) CHECK(prof[k].constant >= prof[k - 1].constant);
  }
}

TEST_CASE("closed turning agrees with the reference") {
  for (unsigned s = 0; s < 10; ++s) {
    auto w = random_walk(30, 500 + s);
    std::vector<double> c = w.points().coords();
    c.push_back(c[0]);
    c.push_back(c[1]);
    const auto closed = PolyCurve::from_points(PointSet(2, c));
    CHECK(turning_constant_closed(closed).constant ==
          doctest::Approx(reference::turning_constant_closed(closed).constant).epsilon(1e-12));
  }
  // Regular polygon: the shorter arc always has diameter equal to the chord.
  std::vector<std::array<double, 2>> poly;
  for (int k = 0; k <= 64; ++k) {
    const double t = 2.0 * std::numbers::pi * (k % 64) / 64.0;
    poly.push_back({std::cos(t), std::sin(t)});
  }
  CHECK(turning_constant_closed(curve2(poly)).constant == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("triple distortion") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(-1, 1);
  std::vector<double> c(20);
  for (auto& x : c) x = unif(gen);
  const PointSet dom(2, c);
  const auto id = qs_triple_distortion(dom, dom);
  CHECK(id.pairs.size() == 10u * 9u * 10u);
  for (const auto& p : id.pairs) CHECK(p.output_ratio == p.input_ratio);

  std::vector<double> sim(c);
  for (auto& x : sim) x = 2.0 * x + 1.0;
  for (const auto& p : qs_triple_distortion(dom, PointSet(2, sim)).pairs)
    CHECK(std::fabs(p.output_ratio - p.input_ratio) <= 1e-12 * std::max(1.0, p.input_ratio));

  std::vector<double> grid, stretched;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      grid.insert(grid.end(), {double(i), double(j)});
      stretched.insert(stretched.end(), {double(i), 2.0 * j});
    }
  const auto td = qs_triple_distortion(PointSet(2, grid), PointSet(2, stretched));
  for (const auto& p : td.pairs) CHECK(p.output_ratio <= 2.0 * p.input_ratio * (1 + 1e-12));
  const auto env = eta_envelope(td.pairs);
  for (const auto& b : env) CHECK(b.max_output <= 2.0 * b.upper * (1 + 1e-12));

  std::vector<double> squash(c);
  squash[2] = squash[0];
  squash[3] = squash[1];
  const auto bad = qs_triple_distortion(dom, PointSet(2, squash));
  CHECK(bad.infinite_distortion);
}

TEST_CASE("box counting") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> unif(0, 1);
  std::vector<double> seg;
  for (int k = 0; k < 10000; ++k) seg.push_back(unif(gen));
  std::vector<double> scales;
  for (int k = 1; k <= 7; ++k) scales.push_back(std::ldexp(1.0, -k));
  const auto f1 = box_counting_dimension(PointSet(1, seg), scales);
  CHECK(std::fabs(f1.slope - 1.0) <= 0.05);

  std::vector<double> sq;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) sq.insert(sq.end(), {(i + 0.5) / 100.0, (j + 0.5) / 100.0});
  std::vector<double> s2;
  for (int k = 1; k <= 5; ++k) s2.push_back(std::ldexp(1.0, -k));
  const auto f2 = box_counting_dimension(PointSet(2, sq), s2);
  CHECK(std::fabs(f2.slope - 2.0) <= 0.05);
  CHECK(f2.r_squared >= 0.0);
  CHECK(f2.r_squared <= 1.0);

  CHECK(box_counting_dimension(PointSet(2, {0.3, 0.3}), s2).slope == 0.0);
  CHECK_THROWS_AS(box_counting_dimension(PointSet(2, sq), std::vector<double>{0.5, 0.25}), InvalidArgument);

  // Slope stays within [0, d].
  for (unsigned s = 0; s < 5; ++s) {
    const auto w = random_walk(2000, 900 + s);
    const auto f = box_counting_dimension(w.points(), std::vector<double>{8, 4, 2, 1, 0.5, 0.25});
    CHECK(f.slope >= 0.0);
    CHECK(f.slope <= 2.0);
  }
}

TEST_CASE("doubling counts") {
  CHECK(doubling_count(PointSet(2, {0.1, 0.1}), std::vector<double>{0, 0}, 1.0) == 1);
  std::vector<double> grid;
  for (int i = 0; i < 100; ++i)
    for (int j = 0; j < 100; ++j) grid.insert(grid.end(), {i / 99.0, j / 99.0});
  CHECK(doubling_count(PointSet(2, grid), std::vector<double>{0.5, 0.5}, 0.4) <= 25);
  std::vector<double> line;
  for (int i = 0; i < 500; ++i) line.insert(line.end(), {i / 499.0, 0.0});
  for (double r : {0.05, 0.1, 0.3, 0.7})
    CHECK(doubling_count(PointSet(2, line), std::vector<double>{0.5, 0.0}, r) <= 5);
  CHECK_THROWS_AS(doubling_count(PointSet(2, {5.0, 5.0}), std::vector<double>{0, 0}, 1.0), InvalidArgument);
}
