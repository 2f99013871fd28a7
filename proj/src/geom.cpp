#include "fractal_lab/geom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"

namespace fractal_lab {

PointSet::PointSet(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
  if (dim_ == 0) throw InvalidArgument("PointSet: dimension must be positive");
  if (coords_.size() % dim_ != 0) throw InvalidArgument("PointSet: coordinate count is not a multiple of dim");
  for (double c : coords_)
    if (!std::isfinite(c)) throw InvalidArgument("PointSet: non-finite coordinate");
}

PointSet PointSet::strided(std::size_t stride) const {
  if (stride == 0) throw InvalidArgument("PointSet::strided: zero stride");
  std::vector<double> out;
  out.reserve((size() / stride + 1) * dim_);
  for (std::size_t i = 0; i < size(); i += stride) {
    auto p = (*this)[i];
    out.insert(out.end(), p.begin(), p.end());
  }
  PointSet s;
  s.dim_ = dim_;
  s.coords_ = std::move(out);
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

PolyCurve::PolyCurve(PointSet points, std::vector<double> times) : points_(std::move(points)), times_(std::move(times)) {
  if (points_.size() < 2) throw InvalidArgument("PolyCurve: needs at least 2 points");
  if (times_.size() != points_.size()) throw InvalidArgument("PolyCurve: times and points differ in length");
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (!std::isfinite(times_[k])) throw InvalidArgument("PolyCurve: non-finite time");
    if (k > 0 && !(times_[k] > times_[k - 1])) throw InvalidArgument("PolyCurve: times must be strictly increasing");
  }
}

PolyCurve PolyCurve::from_points(PointSet points) {
  std::vector<double> t(points.size());
  std::iota(t.begin(), t.end(), 0.0);
  return PolyCurve(std::move(points), std::move(t));
}

// ---------------------------------------------------------------- diameters

namespace {

double cross(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; returns hull vertices (no collinear points).
std::vector<std::array<double, 2>> convex_hull(std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<std::array<double, 2>> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  return h;
}

double brute_diameter(const PointSet& pts, std::size_t first, std::size_t last) {
  double best = 0.0;
  const auto lo = static_cast<std::int64_t>(first);
  const auto hi = static_cast<std::int64_t>(last);
#pragma omp parallel for schedule(dynamic, 64) reduction(max : best) num_threads(thread_count()) if (hi - lo > 2048)
  for (std::int64_t i = lo; i < hi; ++i)
    for (std::int64_t j = i + 1; j < hi; ++j)
      best = std::max(best, distance(pts[static_cast<std::size_t>(i)], pts[static_cast<std::size_t>(j)]));
  return best;
}

}  // namespace

double window_diameter(const PointSet& points, std::size_t first, std::size_t last) {
  if (first >= last || last > points.size()) throw InvalidArgument("diameter: empty or out-of-range index interval");
  if (points.dim() != 2 || last - first <= 32) return brute_diameter(points, first, last);
  std::vector<std::array<double, 2>> pts;
  pts.reserve(last - first);
  for (std::size_t k = first; k < last; ++k) pts.push_back({points[k][0], points[k][1]});
  const auto hull = convex_hull(std::move(pts));
  double best = 0.0;
  for (std::size_t a = 0; a < hull.size(); ++a)
    for (std::size_t b = a + 1; b < hull.size(); ++b)
      best = std::max(best, distance(hull[a], hull[b]));
  return best;
}

double curve_diameter(const PolyCurve& curve, IndexRange range) {
  return window_diameter(curve.points(), range.first, range.last);
}

double point_set_diameter(const PointSet& points) {
  if (points.empty()) throw InvalidArgument("diameter: empty point set");
  return window_diameter(points, 0, points.size());
}

double witness_ratio(const PolyCurve& curve, std::size_t i, std::size_t j) {
  if (i >= j || j >= curve.size()) throw InvalidArgument("witness_ratio: need i < j < size");
  const double d = distance(curve.points()[i], curve.points()[j]);
  const double diam = window_diameter(curve.points(), i, j + 1);
  return d > 0 ? diam / d : std::numeric_limits<double>::infinity();
}

// ------------------------------------------------------------------ turning

namespace {

struct Candidate {
  double ratio = -1.0;
  double scale = 0.0;
  std::size_t i = 0, j = 0;

  bool beaten_by(double r, double s, std::size_t a, std::size_t b) const {
    if (r != ratio) return r > ratio;
    if (s != scale) return s > scale;
    if (a != i) return a < i;
    return b < j;
  }
};

void check_turning_input(const PointSet& p) {
  const std::size_t n = p.size();
  bool all_same = true;
  for (std::size_t k = 1; k < n && all_same; ++k) all_same = distance(p[0], p[k]) == 0.0;
  if (all_same) throw DegenerateCurve("turning: all points identical");
  for (std::size_t k = 1; k < n; ++k)
    if (distance(p[k - 1], p[k]) == 0.0) throw InvalidArgument("turning: consecutive sample points coincide");
}

void note_infinite(TurningReport& rep, std::size_t i, std::size_t j) {
  ++rep.infinite_count;
  if (rep.infinite_witnesses.size() < kMaxInfiniteWitnesses) rep.infinite_witnesses.emplace_back(i, j);
}

TurningReport finish(const Candidate& best, TurningReport rep) {
  rep.constant = best.ratio;
  rep.i = best.i;
  rep.j = best.j;
  rep.scale = best.scale;
  return rep;
}

// O(n^2) time, O(n) memory. row[j] holds diam(points[i..j]) for the current i:
// diam(i..j) = max(diam(i+1..j), max_{i<=k<=j} |p_i - p_k|).
TurningReport open_turning_core(const PointSet& p) {
  const std::size_t n = p.size();
  std::vector<double> row(n, 0.0);
  Candidate best;
  TurningReport rep;
  for (std::size_t i = n; i-- > 0;) {
    double reach = 0.0;
    row[i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(p[i], p[j]);
      reach = std::max(reach, d);
      row[j] = std::max(row[j], reach);
      if (d == 0.0) {
        note_infinite(rep, i, j);
        continue;
      }
      const double r = row[j] / d;
      if (best.beaten_by(r, d, i, j)) best = {r, d, i, j};
    }
  }
  std::reverse(rep.infinite_witnesses.begin(), rep.infinite_witnesses.end());
  return finish(best, std::move(rep));
}

PointSet drop_closing_vertex(const PointSet& p) {
  if (p.size() >= 2 && distance(p[0], p[p.size() - 1]) == 0.0) {
    std::vector<double> c(p.coords().begin(), p.coords().end() - static_cast<std::ptrdiff_t>(p.dim()));
    return PointSet(p.dim(), std::move(c));
  }
  return p;
}

// Pair (i, j), i < j, splits a closed polygon into arcs {i..j} and
// {j..n-1} u {0..i}. The first is tabulated as in the open case; the second
// satisfies comp_i(j) = max(comp_{i-1}(j), max_{k<=i}|p_i-p_k|, max_{k>=j}|p_i-p_k|).
TurningReport closed_turning_core(const PointSet& p) {
  const std::size_t n = p.size();
  if (n < 3) throw InvalidArgument("closed turning: needs at least 3 distinct vertices");
  auto tri = [n](std::size_t i, std::size_t j) { return i * n - i * (i + 1) / 2 + (j - i - 1); };
  std::vector<double> arc(n * (n - 1) / 2);
  std::vector<double> row(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double reach = 0.0;
    row[i] = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      reach = std::max(reach, distance(p[i], p[j]));
      row[j] = std::max(row[j], reach);
      arc[tri(i, j)] = row[j];
    }
  }
  std::vector<double> comp(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) comp[j] = arc[tri(j, n - 1)];
  comp[n - 1] = 0.0;

  Candidate best;
  TurningReport rep;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    double prefix = 0.0;
    for (std::size_t k = 0; k < i; ++k) prefix = std::max(prefix, distance(p[i], p[k]));
    double suffix = 0.0;
    for (std::size_t j = n - 1; j > i; --j) {
      const double d = distance(p[i], p[j]);
      suffix = std::max(suffix, d);
      comp[j] = std::max({comp[j], prefix, suffix});
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (d == 0.0) {
        if (!adjacent) note_infinite(rep, i, j);
        continue;
      }
      const double r = std::min(arc[tri(i, j)], comp[j]) / d;
      if (best.beaten_by(r, d, i, j)) best = {r, d, i, j};
    }
  }
  return finish(best, std::move(rep));
}

TurningReport remap(TurningReport rep, std::size_t stride) {
  rep.i *= stride;
  rep.j *= stride;
  for (auto& w : rep.infinite_witnesses) {
    w.first *= stride;
    w.second *= stride;
  }
  rep.stride = stride;
  return rep;
}

std::size_t stride_count(std::size_t n, std::size_t stride) { return (n - 1) / stride + 1; }

}  // namespace

TurningReport turning_constant(const PolyCurve& curve) {
  const PointSet& p = curve.points();
  check_turning_input(p);
  std::size_t stride = 1;
  if (p.size() > kMaxTurningPoints) stride = (p.size() - 1 + kMaxTurningPoints - 2) / (kMaxTurningPoints - 1);
  if (stride == 1) return open_turning_core(p);
  return remap(open_turning_core(p.strided(stride)), stride);
}

TurningReport turning_constant_closed(const PolyCurve& curve) {
  const PointSet p = drop_closing_vertex(curve.points());
  check_turning_input(p);
  std::size_t stride = 1;
  if (p.size() > kMaxClosedTurningPoints) stride = (p.size() + kMaxClosedTurningPoints - 1) / kMaxClosedTurningPoints;
  if (stride == 1) return closed_turning_core(p);
  return remap(closed_turning_core(p.strided(stride)), stride);
}

std::vector<TurningReport> turning_profile(const PolyCurve& curve, int levels, CurveTopology topology) {
  if (levels < 1) throw InvalidArgument("turning_profile: levels must be positive");
  const bool closed = topology == CurveTopology::Closed;
  const PointSet p = closed ? drop_closing_vertex(curve.points()) : curve.points();
  if (levels >= 63 || p.size() < (std::size_t{1} << levels))
    throw InvalidArgument("turning_profile: curve has fewer than 2^levels points");
  check_turning_input(p);
  const std::size_t cap = closed ? kMaxClosedTurningPoints : kMaxTurningPoints;
  std::size_t base = 1;
  while (stride_count(p.size(), base) > cap) base *= 2;
  std::vector<TurningReport> out;
  out.reserve(static_cast<std::size_t>(levels));
  for (int k = 1; k <= levels; ++k) {
    const std::size_t stride = base << (levels - k);
    const PointSet sub = p.strided(stride);
    out.push_back(remap(closed ? closed_turning_core(sub) : open_turning_core(sub), stride));
  }
  return out;
}

// ------------------------------------------------------- quasisymmetry scan

TripleDistortion qs_triple_distortion(const PointSet& domain_pts, const PointSet& image_pts) {
  const std::size_t n = domain_pts.size();
  if (n < 3 || image_pts.size() != n) throw InvalidArgument("qs_triple_distortion: need equal lengths >= 3");
  if (n > 256) throw CapacityError("qs_triple_distortion: more than 256 points (2^24 triples)");
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (distance(domain_pts[a], domain_pts[b]) == 0.0)
        throw InvalidArgument("qs_triple_distortion: domain points must be pairwise distinct");
  TripleDistortion out;
  out.pairs.reserve(n * n * (n - 1));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t z = 0; z < n; ++z) {
      if (z == x) continue;
      const double dz = distance(domain_pts[x], domain_pts[z]);
      const double fz = distance(image_pts[x], image_pts[z]);
      if (fz == 0.0) {
        out.infinite_distortion = true;
        out.infinite_count += n;
        continue;
      }
      for (std::size_t y = 0; y < n; ++y) {
        const double in = distance(domain_pts[x], domain_pts[y]) / dz;
        const double o = distance(image_pts[x], image_pts[y]) / fz;
        out.pairs.push_back({in, o});
      }
    }
  }
  return out;
}

std::vector<EnvelopeBin> eta_envelope(std::span<const RatioPair> pairs, int bins_per_decade) {
  if (bins_per_decade <= 0) throw InvalidArgument("eta_envelope: bins_per_decade must be positive");
  std::map<long, EnvelopeBin> bins;
  const double bpd = bins_per_decade;
  for (const auto& rp : pairs) {
    if (!(rp.input_ratio > 0.0) || !std::isfinite(rp.input_ratio)) continue;
    const long k = static_cast<long>(std::floor(std::log10(rp.input_ratio) * bpd));
    auto [it, fresh] = bins.try_emplace(k, EnvelopeBin{std::pow(10.0, k / bpd), std::pow(10.0, (k + 1) / bpd), 0.0, 0});
    it->second.max_output = std::max(it->second.max_output, rp.output_ratio);
    ++it->second.count;
  }
  std::vector<EnvelopeBin> out;
  out.reserve(bins.size());
  for (auto& [k, b] : bins) out.push_back(b);
  return out;
}

// ------------------------------------------------------------ box counting

namespace {

std::uint64_t count_boxes(const PointSet& pts, double scale) {
  const std::size_t n = pts.size(), d = pts.dim();
  std::vector<std::int64_t> keys(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) keys[i * d + c] = static_cast<std::int64_t>(std::floor(pts[i][c] / scale));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto key_less = [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(keys.begin() + a * d, keys.begin() + (a + 1) * d, keys.begin() + b * d,
                                        keys.begin() + (b + 1) * d);
  };
  std::sort(order.begin(), order.end(), key_less);
  std::uint64_t count = n > 0 ? 1 : 0;
  for (std::size_t k = 1; k < n; ++k)
    if (key_less(order[k - 1], order[k])) ++count;
  return count;
}

}  // namespace

void fit_scaling(ScalingFit& fit) {
  double sx = 0, sy = 0, m = 0;
  for (std::size_t k = 0; k < fit.scales.size(); ++k) {
    if (!fit.used[k]) continue;
    sx += std::log(1.0 / fit.scales[k]);
    sy += std::log(static_cast<double>(fit.counts[k]));
    m += 1;
  }
  if (m < 2) throw InvalidArgument("scaling fit: fewer than 2 scales left after cutoffs");
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t k = 0; k < fit.scales.size(); ++k) {
    if (!fit.used[k]) continue;
    const double x = std::log(1.0 / fit.scales[k]) - mx;
    const double y = std::log(static_cast<double>(fit.counts[k])) - my;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  if (sxx == 0.0) throw InvalidArgument("scaling fit: scales are not distinct");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  const double ss_res = std::max(0.0, syy - fit.slope * sxy);
  fit.r_squared = syy == 0.0 ? 1.0 : std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
}

ScalingFit box_counting_dimension(const PointSet& points, std::span<const double> scales,
                                  const BoxCountOptions& options) {
  if (scales.size() < 3) throw InvalidArgument("box_counting_dimension: need at least 3 scales");
  if (points.empty()) throw InvalidArgument("box_counting_dimension: empty point set");
  for (std::size_t k = 0; k < scales.size(); ++k) {
    if (!(scales[k] > 0.0) || !std::isfinite(scales[k])) throw InvalidArgument("box_counting_dimension: bad scale");
    if (k > 0 && !(scales[k] < scales[k - 1]))
      throw InvalidArgument("box_counting_dimension: scales must be strictly decreasing");
  }
  ScalingFit fit;
  fit.scales.assign(scales.begin(), scales.end());
  fit.counts.assign(scales.size(), 0);
  fit.used.assign(scales.size(), true);
  const auto ns = static_cast<std::int64_t>(scales.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (std::int64_t k = 0; k < ns; ++k)
    fit.counts[static_cast<std::size_t>(k)] = count_boxes(points, scales[static_cast<std::size_t>(k)]);
  if (options.drop_largest) fit.used[0] = false;
  for (std::size_t k = 0; k < scales.size(); ++k)
    if (scales[k] < 4.0 * options.resolution) fit.used[k] = false;
  fit_scaling(fit);
  return fit;
}

// --------------------------------------------------------------- doubling

std::size_t doubling_count(const PointSet& points, std::span<const double> center, double r) {
  if (!(r > 0.0)) throw InvalidArgument("doubling_count: radius must be positive");
  if (center.size() != points.dim()) throw InvalidArgument("doubling_count: center dimension mismatch");
  std::vector<std::size_t> inside;
  for (std::size_t k = 0; k < points.size(); ++k)
    if (distance(points[k], center) <= r) inside.push_back(k);
  if (inside.empty()) throw InvalidArgument("doubling_count: no sample point within r of center");
  // First ball at the sample point nearest the centre, then farthest-point order.
  std::size_t first = 0;
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < inside.size(); ++a) {
    const double d = distance(points[inside[a]], center);
    if (d < nearest) {
      nearest = d;
      first = a;
    }
  }
  std::vector<double> gap(inside.size());
  for (std::size_t a = 0; a < inside.size(); ++a) gap[a] = distance(points[inside[a]], points[inside[first]]);
  std::size_t balls = 1;
  for (;;) {
    const auto far = static_cast<std::size_t>(std::max_element(gap.begin(), gap.end()) - gap.begin());
    if (gap[far] <= 0.5 * r) break;
    ++balls;
    const auto c = points[inside[far]];
    for (std::size_t a = 0; a < inside.size(); ++a) gap[a] = std::min(gap[a], distance(points[inside[a]], c));
  }
  return balls;
}

}  // namespace fractal_lab
