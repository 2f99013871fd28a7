#include "fractal_lab/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "fractal_lab/errors.hpp"

namespace fractal_lab {

std::size_t RasterGrid::col(double x) const noexcept {
  const double i = std::floor((x - x0) / mesh);
  if (!(i > 0.0)) return 0;
  return std::min(width - 1, static_cast<std::size_t>(i));
}

std::size_t RasterGrid::row(double y) const noexcept {
  const double j = std::floor((y - y0) / mesh);
  if (!(j > 0.0)) return 0;
  return std::min(height - 1, static_cast<std::size_t>(j));
}

namespace {

using P = std::array<double, 2>;

double cross(P o, P a, P b) noexcept { return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]); }

bool on_segment(P a, P b, P p) noexcept {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
         p[1] <= std::max(a[1], b[1]);
}

bool segments_meet(P a, P b, P c, P d) noexcept {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  if (d1 == 0 && on_segment(c, d, a)) return true;
  if (d2 == 0 && on_segment(c, d, b)) return true;
  if (d3 == 0 && on_segment(a, b, c)) return true;
  if (d4 == 0 && on_segment(a, b, d)) return true;
  return false;
}

double point_segment(P p, P a, P b) noexcept {
  const double vx = b[0] - a[0], vy = b[1] - a[1];
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - (a[0] + t * vx), p[1] - (a[1] + t * vy));
}

}  // namespace

double segment_distance(P a, P b, P c, P d) noexcept {
  if (segments_meet(a, b, c, d)) return 0.0;
  return std::min({point_segment(a, c, d), point_segment(b, c, d), point_segment(c, a, b), point_segment(d, a, b)});
}

std::size_t polyline_self_crossings(const PointSet& points, double bucket) {
  if (points.dim() != 2) throw InvalidArgument("polyline_self_crossings: points must be planar");
  if (!(bucket > 0.0)) throw InvalidArgument("polyline_self_crossings: bucket must be positive");
  const std::size_t n = points.size();
  if (n < 4) return 0;
  double xlo = points[0][0], ylo = points[0][1];
  for (std::size_t k = 0; k < n; ++k) {
    xlo = std::min(xlo, points[k][0]);
    ylo = std::min(ylo, points[k][1]);
  }
  std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
  for (std::size_t s = 0; s + 1 < n; ++s) {
    const auto a = points[s], b = points[s + 1];
    const auto i0 = static_cast<std::uint64_t>((std::min(a[0], b[0]) - xlo) / bucket);
    const auto i1 = static_cast<std::uint64_t>((std::max(a[0], b[0]) - xlo) / bucket);
    const auto j0 = static_cast<std::uint64_t>((std::min(a[1], b[1]) - ylo) / bucket);
    const auto j1 = static_cast<std::uint64_t>((std::max(a[1], b[1]) - ylo) / bucket);
    if ((i1 - i0 + 1) * (j1 - j0 + 1) > (std::uint64_t{1} << 24))
      throw CapacityError("polyline_self_crossings: a segment spans too many buckets; raise the bucket size");
    for (std::uint64_t i = i0; i <= i1; ++i)
      for (std::uint64_t j = j0; j <= j1; ++j) entries.push_back({(i << 32) | j, static_cast<std::uint32_t>(s)});
  }
  std::sort(entries.begin(), entries.end());
  std::vector<std::pair<std::uint32_t, std::uint32_t>> hits;
  for (std::size_t lo = 0; lo < entries.size();) {
    std::size_t hi = lo;
    while (hi < entries.size() && entries[hi].first == entries[lo].first) ++hi;
    for (std::size_t x = lo; x < hi; ++x)
      for (std::size_t y = x + 1; y < hi; ++y) {
        const std::uint32_t s = entries[x].second, t = entries[y].second;
        if (t < s + 2) continue;
        const auto a = points[s], b = points[s + 1], c = points[t], d = points[t + 1];
        if (segments_meet({a[0], a[1]}, {b[0], b[1]}, {c[0], c[1]}, {d[0], d[1]})) hits.push_back({s, t});
      }
    lo = hi;
  }
  std::sort(hits.begin(), hits.end());
  return static_cast<std::size_t>(std::unique(hits.begin(), hits.end()) - hits.begin());
}

std::vector<std::uint8_t> flood_from_border(std::size_t width, std::size_t height,
                                            std::span<const std::uint8_t> passable) {
  std::vector<std::uint8_t> seen(width * height, 0);
  std::vector<std::size_t> stack;
  auto push = [&](std::size_t c) {
    if (passable[c] && !seen[c]) {
      seen[c] = 1;
      stack.push_back(c);
    }
  };
  for (std::size_t i = 0; i < width; ++i) {
    push(i);
    push((height - 1) * width + i);
  }
  for (std::size_t j = 0; j < height; ++j) {
    push(j * width);
    push(j * width + width - 1);
  }
  while (!stack.empty()) {
    const std::size_t c = stack.back();
    stack.pop_back();
    const std::size_t i = c % width, j = c / width;
    if (i > 0) push(c - 1);
    if (i + 1 < width) push(c + 1);
    if (j > 0) push(c - width);
    if (j + 1 < height) push(c + width);
  }
  return seen;
}

double polygon_area(std::span<const double> xy) noexcept {
  const std::size_t n = xy.size() / 2;
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t m = (k + 1) % n;
    s += xy[2 * k] * xy[2 * m + 1] - xy[2 * m] * xy[2 * k + 1];
  }
  return 0.5 * s;
}

std::vector<std::vector<double>> marching_squares(const RasterGrid& g, std::span<const std::uint8_t> mask) {
  const auto W = static_cast<std::int64_t>(g.width), H = static_cast<std::int64_t>(g.height);
  auto at = [&](std::int64_t i, std::int64_t j) -> int {
    if (i < 0 || j < 0 || i >= W || j >= H) return 0;
    return mask[static_cast<std::size_t>(j * W + i)] ? 1 : 0;
  };
  // Edge midpoints: horizontal h(i, j) joins centres (i, j)-(i+1, j), i in [-1, W-1], j in [-1, H];
  // vertical v(i, j) joins (i, j)-(i, j+1), i in [-1, W], j in [-1, H-1].
  const std::int64_t hw = W + 1, hh = H + 2, vw = W + 2;
  const std::int64_t hcount = hw * hh;
  auto hid = [&](std::int64_t i, std::int64_t j) { return (j + 1) * hw + (i + 1); };
  auto vid = [&](std::int64_t i, std::int64_t j) { return hcount + (j + 1) * vw + (i + 1); };
  const std::int64_t total = hcount + vw * (H + 1);
  constexpr std::int64_t none = -1;
  std::vector<std::int64_t> next(static_cast<std::size_t>(total), none);
  // Directed edge pairs per case, edges numbered B=0, R=1, T=2, L=3; foreground on the left.
  static constexpr int table[16][4] = {{-1, -1, -1, -1}, {0, 3, -1, -1}, {1, 0, -1, -1}, {1, 3, -1, -1},
                                       {2, 1, -1, -1},   {0, 1, 2, 3},   {2, 0, -1, -1}, {2, 3, -1, -1},
                                       {3, 2, -1, -1},   {0, 2, -1, -1}, {3, 0, 1, 2},   {1, 2, -1, -1},
                                       {3, 1, -1, -1},   {0, 1, -1, -1}, {3, 0, -1, -1}, {-1, -1, -1, -1}};
  for (std::int64_t j = -1; j < H; ++j)
    for (std::int64_t i = -1; i < W; ++i) {
      const int c = at(i, j) | (at(i + 1, j) << 1) | (at(i + 1, j + 1) << 2) | (at(i, j + 1) << 3);
      if (c == 0 || c == 15) continue;
      const std::int64_t edge[4] = {hid(i, j), vid(i + 1, j), hid(i, j + 1), vid(i, j)};
      for (int s = 0; s < 4 && table[c][s] >= 0; s += 2)
        next[static_cast<std::size_t>(edge[table[c][s]])] = edge[table[c][s + 1]];
    }
  auto point = [&](std::int64_t id, std::vector<double>& out) {
    if (id < hcount) {
      const std::int64_t i = id % hw - 1, j = id / hw - 1;
      out.push_back(g.x0 + static_cast<double>(i + 1) * g.mesh);
      out.push_back(g.y0 + (static_cast<double>(j) + 0.5) * g.mesh);
    } else {
      const std::int64_t r = id - hcount, i = r % vw - 1, j = r / vw - 1;
      out.push_back(g.x0 + (static_cast<double>(i) + 0.5) * g.mesh);
      out.push_back(g.y0 + static_cast<double>(j + 1) * g.mesh);
    }
  };
  std::vector<std::vector<double>> contours;
  for (std::int64_t start = 0; start < total; ++start) {
    if (next[static_cast<std::size_t>(start)] == none) continue;
    std::vector<double> poly;
    std::int64_t id = start;
    while (next[static_cast<std::size_t>(id)] != none) {
      point(id, poly);
      const std::int64_t nx = next[static_cast<std::size_t>(id)];
      next[static_cast<std::size_t>(id)] = none;
      id = nx;
    }
    if (id != start) throw MeshAdvisory("marching_squares: open contour; refine the mesh");
    poly.push_back(poly[0]);
    poly.push_back(poly[1]);
    contours.push_back(std::move(poly));
  }
  return contours;
}

}  // namespace fractal_lab
