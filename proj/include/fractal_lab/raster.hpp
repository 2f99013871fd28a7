#pragma once

// Planar raster and segment utilities shared by the loop-soup pipeline and
// the trace self-intersection check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fractal_lab/geom.hpp"

namespace fractal_lab {

/// Square cells of side `mesh`; cell (i, j) covers [x0 + i mesh, x0 + (i+1) mesh) x [y0 + j mesh, ...).
struct RasterGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double mesh = 1.0;
  std::size_t width = 0;
  std::size_t height = 0;

  std::size_t cells() const noexcept { return width * height; }
  double cx(std::size_t i) const noexcept { return x0 + (static_cast<double>(i) + 0.5) * mesh; }
  double cy(std::size_t j) const noexcept { return y0 + (static_cast<double>(j) + 0.5) * mesh; }
  /// Cell containing (x, y), clamped to the grid.
  std::size_t col(double x) const noexcept;
  std::size_t row(double y) const noexcept;
};

/// 8-bit image, row-major, row 0 at the top.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Euclidean distance between segments [a, b] and [c, d] (0 when they meet).
double segment_distance(std::array<double, 2> a, std::array<double, 2> b, std::array<double, 2> c,
                        std::array<double, 2> d) noexcept;

/// Number of pairs of non-adjacent segments of a planar polyline that cross or
/// touch. Segments are bucketed on a grid of side `bucket` to prune the search.
std::size_t polyline_self_crossings(const PointSet& points, double bucket);

/// Calls fn(cell index) for every cell met by the polyline (x/y interleaved),
/// sampling each segment at spacing <= mesh/4, so the marked set is 8-connected.
template <class Fn>
void rasterize_polyline(const RasterGrid& g, std::span<const double> xy, Fn&& fn);

/// 4-connected flood over cells with passable[cell] != 0 starting from every
/// passable cell on the grid border. Returns 1 for reached cells.
std::vector<std::uint8_t> flood_from_border(std::size_t width, std::size_t height,
                                            std::span<const std::uint8_t> passable);

/// Closed contours of the foreground (mask != 0) by marching squares through
/// midpoints between cell centres. Foreground cells touching diagonally are
/// joined. Contours are counter-clockwise around foreground, x/y interleaved,
/// first vertex repeated at the end.
std::vector<std::vector<double>> marching_squares(const RasterGrid& g, std::span<const std::uint8_t> mask);

/// Signed area of a closed polyline (x/y interleaved, closing vertex optional).
double polygon_area(std::span<const double> xy) noexcept;

/// Calls fn(cell index) for every cell whose centre lies inside the polygon
/// (even-odd rule).
template <class Fn>
void fill_polygon(const RasterGrid& g, std::span<const double> xy, Fn&& fn);

// ---------------------------------------------------------------- templates

template <class Fn>
void rasterize_polyline(const RasterGrid& g, std::span<const double> xy, Fn&& fn) {
  const std::size_t n = xy.size() / 2;
  if (n == 0) return;
  fn(g.row(xy[1]) * g.width + g.col(xy[0]));
  for (std::size_t k = 1; k < n; ++k) {
    const double ax = xy[2 * k - 2], ay = xy[2 * k - 1], bx = xy[2 * k], by = xy[2 * k + 1];
    const double len = std::max(std::abs(bx - ax), std::abs(by - ay));
    const auto pieces = static_cast<std::size_t>(std::ceil(len / (0.25 * g.mesh)));
    std::size_t last = static_cast<std::size_t>(-1);
    for (std::size_t s = 1; s <= std::max<std::size_t>(pieces, 1); ++s) {
      const double f = static_cast<double>(s) / static_cast<double>(std::max<std::size_t>(pieces, 1));
      const std::size_t c = g.row(ay + f * (by - ay)) * g.width + g.col(ax + f * (bx - ax));
      if (c != last) fn(c);
      last = c;
    }
  }
}

template <class Fn>
void fill_polygon(const RasterGrid& g, std::span<const double> xy, Fn&& fn) {
  std::size_t n = xy.size() / 2;
  if (n >= 2 && xy[0] == xy[2 * n - 2] && xy[1] == xy[2 * n - 1]) --n;
  if (n < 3) return;
  double ylo = xy[1], yhi = xy[1];
  for (std::size_t k = 0; k < n; ++k) {
    ylo = std::min(ylo, xy[2 * k + 1]);
    yhi = std::max(yhi, xy[2 * k + 1]);
  }
  const double jlo_d = std::ceil((ylo - g.y0) / g.mesh - 0.5);
  const double jhi_d = std::floor((yhi - g.y0) / g.mesh - 0.5);
  if (jhi_d < 0.0 || jlo_d > static_cast<double>(g.height) - 1.0) return;
  const auto jlo = static_cast<std::size_t>(std::max(0.0, jlo_d));
  const auto jhi = static_cast<std::size_t>(std::min(static_cast<double>(g.height) - 1.0, jhi_d));
  std::vector<std::vector<double>> crossings(jhi - jlo + 1);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m = (k + 1) % n;
    const double ax = xy[2 * k], ay = xy[2 * k + 1], bx = xy[2 * m], by = xy[2 * m + 1];
    if (ay == by) continue;
    const double lo = std::min(ay, by), hi = std::max(ay, by);
    // Half-open rule: a row at height y counts the edge when lo <= y < hi.
    const double a_d = std::max(static_cast<double>(jlo), std::ceil((lo - g.y0) / g.mesh - 0.5));
    for (double jd = a_d; jd <= static_cast<double>(jhi); jd += 1.0) {
      const auto j = static_cast<std::size_t>(jd);
      const double y = g.cy(j);
      if (y < lo) continue;
      if (!(y < hi)) break;
      crossings[j - jlo].push_back(ax + (y - ay) * (bx - ax) / (by - ay));
    }
  }
  for (std::size_t r = 0; r < crossings.size(); ++r) {
    auto& xs = crossings[r];
    std::sort(xs.begin(), xs.end());
    const std::size_t j = jlo + r;
    for (std::size_t p = 0; p + 1 < xs.size(); p += 2) {
      const double ilo_d = std::max(0.0, std::ceil((xs[p] - g.x0) / g.mesh - 0.5));
      const double ihi_d = std::min(static_cast<double>(g.width) - 1.0, std::floor((xs[p + 1] - g.x0) / g.mesh - 0.5));
      for (double id = ilo_d; id <= ihi_d; id += 1.0) {
        const auto i = static_cast<std::size_t>(id);
        // Centres exactly on the right crossing are outside.
        if (!(g.cx(i) < xs[p + 1])) break;
        fn(j * g.width + i);
      }
    }
  }
}

}  // namespace fractal_lab
