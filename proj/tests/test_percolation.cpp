#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/percolation.hpp"
#include "fractal_lab/rng.hpp"
#include "fractal_lab/stats.hpp"
#include "oracles.hpp"

using namespace fractal_lab;

namespace {

PercTree first_surviving(int n, int l, double p, int depth, std::uint64_t key) {
  for (std::uint64_t s = 0;; ++s) {
    auto t = sample_percolation(n, l, p, depth, derive_stream(key, {s}));
    if (t.survived()) return t;
  }
}

std::set<std::vector<std::uint32_t>> cells(const PercTree& t, int level) {
  std::set<std::vector<std::uint32_t>> out;
  for (std::size_t i = 0; i < t.count(level); ++i) {
    const auto c = t.cell(level, i);
    out.insert({c.begin(), c.end()});
  }
  return out;
}

}  // namespace

TEST_CASE("p = 1 keeps the full grid") {
  for (int n : {1, 2, 3}) {
    const auto t = sample_percolation(n, 3, 1.0, 3, 1);
    for (int k = 0; k <= 3; ++k) CHECK(t.count(k) == static_cast<std::size_t>(std::pow(3.0, n * k)));
    const auto d = dimension_check(t);
    CHECK(d.reference == n);
    CHECK(d.fit.slope == doctest::Approx(n).epsilon(1e-12));
  }
  const auto t = sample_percolation(2, 2, 1.0, 4, 1);
  const auto s = disconnection_stats(t);
  CHECK(s.component_count == 1);
  CHECK(s.largest_component_cells == 256);
  CHECK(survival_probability(2, 3, 1.0, 5, 100, 1).estimate == 1.0);
}

TEST_CASE("tree invariants") {
  const auto t = first_surviving(2, 3, 0.6, 5, 3);
  CHECK(t.count(0) == 1);
  for (int k = 1; k <= 5; ++k) {
    const auto parents = cells(t, k - 1);
    const auto here = cells(t, k);
    for (const auto& c : here) {
      std::vector<std::uint32_t> up{c[0] / 3, c[1] / 3};
      CHECK(parents.count(up) == 1);
      CHECK(c[0] < std::pow(3.0, k));
    }
    // lexicographic order of rows
    for (std::size_t i = 1; i < t.count(k); ++i) {
      const auto a = t.cell(k, i - 1), b = t.cell(k, i);
      CHECK(std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end()));
    }
  }
  const auto idx = t.index(5, 0);
  CHECK(idx.level == 5);
  CHECK(idx.digits.size() == 5);
  std::uint32_t x = 0, y = 0;
  for (const auto& d : idx.digits) {
    x = 3 * x + d[0];
    y = 3 * y + d[1];
  }
  CHECK(x == t.cell(5, 0)[0]);
  CHECK(y == t.cell(5, 0)[1]);

  const auto a = sample_percolation(2, 3, 0.6, 5, 77), b = sample_percolation(2, 3, 0.6, 5, 77);
  CHECK(a.kept == b.kept);
}

TEST_CASE("trees at different p are nested for the same seed") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto lo = sample_percolation(2, 3, 0.4, 5, s), hi = sample_percolation(2, 3, 0.7, 5, s);
    for (int k = 0; k <= 5; ++k) {
      const auto big = cells(hi, k);
      for (const auto& c : cells(lo, k)) CHECK(big.count(c) == 1);
    }
  }
}

TEST_CASE("mean level counts follow the branching mean") {
  std::vector<double> counts;
  for (std::uint64_t s = 0; s < 1000; ++s)
    counts.push_back(static_cast<double>(sample_percolation(2, 3, 0.5, 6, derive_stream(7, {s})).count(6)));
  const double expected = std::pow(0.5 * 9.0, 6);
  CHECK(expected == doctest::Approx(8303.765625));
  CHECK(std::fabs(mean(counts) - expected) <= 3.0 * std::sqrt(sample_variance(counts) / 1000.0));
}

TEST_CASE("survival probabilities") {
  // Depth-limited Galton-Watson survival 1 - f^depth(0).
  const auto e = survival_probability(2, 3, 0.5, 8, 2000, 5);
  CHECK(std::fabs(e.estimate - (1.0 - oracle::extinct_by(0.5, 9, 8))) <= e.radius);
  CHECK(std::fabs(e.estimate - (1.0 - oracle::extinction(0.5, 9))) <= e.radius + 1e-3);

  // Critical case: exact depth-12 survival, far above 5%.
  const auto c = survival_probability(2, 3, 1.0 / 9.0, 12, 1000, 6);
  const double exact = 1.0 - oracle::extinct_by(1.0 / 9.0, 9, 12);
  CHECK(exact == doctest::Approx(0.149).epsilon(0.01));
  CHECK(std::fabs(c.estimate - exact) <= std::max(c.radius, 3.0 / 1000.0));

  double prev = 0.0;
  for (double p : {0.15, 0.3, 0.5, 0.8}) {
    const auto s = survival_probability(2, 3, p, 6, 300, 9);
    CHECK(s.estimate >= prev);
    prev = s.estimate;
  }
  for (std::uint64_t s = 0; s < 50; ++s)
    CHECK(survives(2, 3, 0.3, 6, s) == sample_percolation(2, 3, 0.3, 6, s).survived());
  CHECK_THROWS_AS(survival_probability(2, 3, 0.5, 4, 99, 1), InvalidArgument);
}

TEST_CASE("dimension estimates") {
  std::vector<double> slopes;
  for (std::uint64_t s = 0; s < 10; ++s) slopes.push_back(dimension_check(first_surviving(2, 3, 0.7, 7, 100 + s)).fit.slope);
  const double ref = 2.0 + std::log(0.7) / std::log(3.0);
  CHECK(std::fabs(median(slopes) - ref) <= 0.1);

  const auto one = dimension_check(first_surviving(1, 2, 0.9, 14, 200));
  CHECK(one.reference == doctest::Approx(1.0 + std::log(0.9) / std::log(2.0)));
  CHECK(std::fabs(one.fit.slope - one.reference) <= 0.1);

  PercTree dead = sample_percolation(2, 3, 0.05, 6, 1);
  for (std::uint64_t s = 2; dead.survived(); ++s) dead = sample_percolation(2, 3, 0.05, 6, s);
  CHECK_THROWS_AS(dimension_check(dead), InvalidArgument);
  CHECK_THROWS_AS(disconnection_stats(dead), InvalidArgument);
}

TEST_CASE("disconnection statistics") {
  // p = 0.3: components stay a vanishing fraction of the kept cells.
  int small = 0, surviving = 0;
  for (std::uint64_t s = 0; s < 2000 && surviving < 100; ++s) {
    const auto t = sample_percolation(2, 3, 0.3, 7, derive_stream(300, {s}));
    if (!t.survived()) continue;
    ++surviving;
    const auto st = disconnection_stats(t);
    small += st.largest_component_cells <= 0.05 * t.count(7);

    const auto labels = component_labels(t);
    CHECK(labels.size() == t.count(7));
    std::vector<std::size_t> sizes(st.component_count, 0);
    for (auto l : labels) ++sizes.at(l);
    CHECK(*std::max_element(sizes.begin(), sizes.end()) == st.largest_component_cells);
    for (auto z : sizes) CHECK(z > 0);
    if (surviving <= 10) {
      std::vector<oracle::Pt> pts;
      for (std::size_t i = 0; i < t.count(7); ++i) pts.push_back({double(t.cell(7, i)[0]), double(t.cell(7, i)[1])});
      const auto ref = oracle::grid_components(pts);
      CHECK(*std::max_element(ref.begin(), ref.end()) + 1 == st.component_count);
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j : {i + 1, i + 7, i + 31})
          if (j < pts.size()) CHECK((labels[i] == labels[j]) == (ref[i] == ref[j]));
    }
  }
  CHECK(surviving >= 50);
  CHECK(small >= 0.9 * surviving);

  // One deepest cell.
  for (std::uint64_t s = 0; s < 5000; ++s) {
    const auto t = sample_percolation(2, 3, 0.2, 3, s);
    if (t.count(3) != 1) continue;
    const auto st = disconnection_stats(t);
    CHECK(st.component_count == 1);
    CHECK(st.largest_component_cells == 1);
    CHECK(st.perfectness_min_gap == 0.0);
    break;
  }

  // Corner adjacency can only merge components.
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto t = first_surviving(2, 3, 0.6, 4, 400 + s);
    CHECK(disconnection_stats(t, Adjacency::Corner).component_count <= disconnection_stats(t).component_count);
  }
}

TEST_CASE("perfectness gap shrinks with depth") {
  std::vector<double> med;
  for (int depth : {4, 5, 6}) {
    std::vector<double> gaps;
    for (std::uint64_t s = 0; gaps.size() < 100; ++s) {
      const auto t = sample_percolation(2, 3, 0.5, depth, derive_stream(500, {std::uint64_t(depth), s}));
      if (t.survived() && t.count(depth) > 1) gaps.push_back(disconnection_stats(t).perfectness_min_gap);
    }
    med.push_back(median(gaps));
  }
  CHECK(med[1] < med[0]);
  CHECK(med[2] < med[1]);
}

TEST_CASE("exports") {
  const auto t = sample_percolation(2, 3, 1.0, 1, 1);
  const auto csv = percolation_csv(t);
  CHECK(csv.find("1,00\n") != std::string::npos);
  CHECK(csv.find("1,22\n") != std::string::npos);
  const auto img = percolation_raster(t);
  CHECK(img.width == 3);
  CHECK(img.height == 3);
  for (auto v : img.pixels) CHECK(v == 255);

  const auto u = first_surviving(2, 3, 0.5, 3, 600);
  const auto r = percolation_raster(u);
  CHECK(static_cast<std::size_t>(std::count(r.pixels.begin(), r.pixels.end(), 255)) == u.count(3));
  const auto line = percolation_raster(sample_percolation(1, 2, 1.0, 3, 1));
  CHECK(line.height == 1);
  CHECK(line.width == 8);
  CHECK_THROWS_AS(sample_percolation(3, 4, 1.0, 20, 1), CapacityError);
  CHECK_THROWS_AS(sample_percolation(2, 1, 0.5, 3, 1), InvalidArgument);
  CHECK_THROWS_AS(sample_percolation(2, 3, 0.0, 3, 1), InvalidArgument);
}
