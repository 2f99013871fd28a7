// Serial brute-force references for the geometry kernels. These follow the
// definitions literally and are used as oracles in tests and benchmarks.

#include <algorithm>
#include <limits>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/geom.hpp"

namespace fractal_lab::reference {

double point_set_diameter(const PointSet& points, std::size_t first, std::size_t last) {
  if (first >= last || last > points.size()) throw InvalidArgument("diameter: empty or out-of-range index interval");
  double best = 0.0;
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t j = i + 1; j < last; ++j) best = std::max(best, distance(points[i], points[j]));
  return best;
}

namespace {

bool better(double r, double s, std::size_t a, std::size_t b, const TurningReport& cur, bool have) {
  if (!have) return true;
  if (r != cur.constant) return r > cur.constant;
  if (s != cur.scale) return s > cur.scale;
  if (a != cur.i) return a < cur.i;
  return b < cur.j;
}

// diam of the cyclic arc starting at `from` and walking forward to `to`.
double cyclic_arc_diameter(const PointSet& p, std::size_t from, std::size_t to) {
  const std::size_t n = p.size();
  std::vector<std::size_t> idx;
  for (std::size_t k = from;; k = (k + 1) % n) {
    idx.push_back(k);
    if (k == to) break;
  }
  double best = 0.0;
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = a + 1; b < idx.size(); ++b) best = std::max(best, distance(p[idx[a]], p[idx[b]]));
  return best;
}

}  // namespace

TurningReport turning_constant(const PolyCurve& curve) {
  const PointSet& p = curve.points();
  TurningReport rep;
  bool have = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double d = distance(p[i], p[j]);
      if (d == 0.0) {
        ++rep.infinite_count;
        continue;
      }
      const double r = point_set_diameter(p, i, j + 1) / d;
      if (better(r, d, i, j, rep, have)) {
        rep.constant = r;
        rep.scale = d;
        rep.i = i;
        rep.j = j;
        have = true;
      }
    }
  }
  if (!have) throw DegenerateCurve("turning: all points identical");
  return rep;
}

TurningReport turning_constant_closed(const PolyCurve& curve) {
  PointSet p = curve.points();
  if (p.size() >= 2 && distance(p[0], p[p.size() - 1]) == 0.0) {
    std::vector<double> c(p.coords().begin(), p.coords().end() - static_cast<std::ptrdiff_t>(p.dim()));
    p = PointSet(p.dim(), std::move(c));
  }
  TurningReport rep;
  bool have = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) {
      const double d = distance(p[i], p[j]);
      if (d == 0.0) {
        ++rep.infinite_count;
        continue;
      }
      const double r = std::min(cyclic_arc_diameter(p, i, j), cyclic_arc_diameter(p, j, i)) / d;
      if (better(r, d, i, j, rep, have)) {
        rep.constant = r;
        rep.scale = d;
        rep.i = i;
        rep.j = j;
        have = true;
      }
    }
  }
  if (!have) throw DegenerateCurve("turning: all points identical");
  return rep;
}

}  // namespace fractal_lab::reference
