#include "fractal_lab/loopsoup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/rng.hpp"

namespace fractal_lab {

double intensity_for_kappa(double kappa) {
  if (!(kappa > 8.0 / 3.0) || !(kappa <= 4.0))
    throw UnsupportedParameter("intensity_for_kappa: kappa must lie in (8/3, 4]");
  return (3.0 * kappa - 8.0) * (6.0 - kappa) / (2.0 * kappa);
}

double soup_intensity(const SoupConfig& c) {
  if (!(c.t_min > 0.0) || !(c.t_max > c.t_min) || !std::isfinite(c.t_max))
    throw InvalidArgument("soup config: need 0 < t_min < t_max");
  if (!(c.diam_min > 0.0) || !std::isfinite(c.diam_min)) throw InvalidArgument("soup config: diam_min must be positive");
  if (!(c.mesh > 0.0)) throw InvalidArgument("soup config: mesh must be positive");
  if (!(c.mesh <= c.diam_min / 4.0)) throw InvalidArgument("soup config: mesh must be <= diam_min / 4");
  if (c.mesh < 1.0 / 8192.0) throw CapacityError("soup config: mesh below 1/8192 exceeds the raster budget");
  if (c.mc_mass_samples < 100) throw InvalidArgument("soup config: mc_mass_samples must be >= 100");
  if (c.intensity) {
    if (!(*c.intensity > 0.0) || !(*c.intensity <= 1.0))
      throw UnsupportedParameter("soup config: intensity must lie in (0, 1]");
    return *c.intensity;
  }
  return intensity_for_kappa(c.kappa);
}

bool DomainShape::contains(double x, double y) const noexcept {
  if (diameter == 2.0) return x * x + y * y <= 1.0;
  return x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0;
}

DomainShape domain_shape(SoupDomain domain) {
  if (domain == SoupDomain::UnitDisk) return {-1.0, -1.0, 2.0, std::numbers::pi, 2.0};
  return {0.0, 0.0, 1.0, 1.0, std::numbers::sqrt2};
}

std::size_t soup_mesh_points(double t, double mesh) {
  const double steps = std::ceil(t / (mesh * mesh));
  return static_cast<std::size_t>(std::clamp(steps, 7.0, static_cast<double>(std::size_t{1} << 21))) + 1;
}

namespace {

double proposal_mass(const SoupConfig& c, const DomainShape& d) {
  return d.area * (1.0 / c.t_min - 1.0 / c.t_max) / (2.0 * std::numbers::pi);
}

struct Candidate {
  bool accepted = false;
  double diameter = 0.0;
  BridgeLoop loop;
};

// Proposal: duration with density proportional to 1/t^2 on [t_min, t_max],
// root uniform in D, Brownian bridge shape.
Candidate propose(const SoupConfig& c, const DomainShape& d, std::uint64_t key, bool keep_loop) {
  Rng rng(key);
  const double inv = 1.0 / c.t_min - rng.uniform() * (1.0 / c.t_min - 1.0 / c.t_max);
  const double t = std::min(c.t_max, 1.0 / inv);
  std::array<double, 2> z{};
  do {
    z = {d.x0 + d.extent * rng.uniform(), d.y0 + d.extent * rng.uniform()};
  } while (!d.contains(z[0], z[1]));
  Candidate out;
  BridgeLoop loop = sample_bridge_loop(z, t, soup_mesh_points(t, c.mesh), derive_stream(key, {stream_tag::kBridge}));
  double xlo = z[0], xhi = z[0], ylo = z[1], yhi = z[1];
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const double x = loop.values[2 * k], y = loop.values[2 * k + 1];
    if (!d.contains(x, y)) return out;
    xlo = std::min(xlo, x);
    xhi = std::max(xhi, x);
    ylo = std::min(ylo, y);
    yhi = std::max(yhi, y);
  }
  if (std::hypot(xhi - xlo, yhi - ylo) < c.diam_min) return out;
  out.diameter = window_diameter(PointSet(2, loop.values), 0, loop.size());
  out.accepted = out.diameter >= c.diam_min;
  if (out.accepted && keep_loop) out.loop = std::move(loop);
  return out;
}

}  // namespace

ProbabilityEstimate truncated_loop_mass(const SoupConfig& config) {
  soup_intensity(config);
  const DomainShape d = domain_shape(config.domain);
  ProbabilityEstimate est;
  est.replicates = config.mc_mass_samples;
  if (config.diam_min > d.diameter) return est;
  const auto hits = parallel_map<unsigned char>(config.mc_mass_samples, [&](std::size_t i) -> unsigned char {
    return propose(config, d, derive_stream(config.seed, {stream_tag::kSoupMass, i}), false).accepted ? 1 : 0;
  });
  for (auto h : hits) est.successes += h;
  if (est.successes == 0)
    throw DegenerateCutoff("truncated_loop_mass: no sampled loop passed the cutoffs; lower diam_min or raise t_max");
  const double m = static_cast<double>(config.mc_mass_samples);
  const double frac = static_cast<double>(est.successes) / m;
  const double mass = proposal_mass(config, d);
  est.estimate = mass * frac;
  est.radius = 3.0 * mass * std::sqrt(frac * (1.0 - frac) / m);
  return est;
}

LoopSet sample_soup(const SoupConfig& config) {
  const double c = soup_intensity(config);
  const DomainShape d = domain_shape(config.domain);
  LoopSet out;
  out.domain = config.domain;
  const double mean = c * proposal_mass(config, d);
  if (mean > 5e6) throw CapacityError("sample_soup: expected proposal count too large; raise t_min");
  Rng count_rng(derive_stream(config.seed, {stream_tag::kSoupCount}));
  out.candidates = static_cast<std::size_t>(count_rng.poisson(mean));
  if (config.diam_min > d.diameter) return out;
  auto drawn = parallel_map<Candidate>(out.candidates, [&](std::size_t k) {
    return propose(config, d, derive_stream(config.seed, {stream_tag::kSoupCandidate, k}), true);
  });
  for (auto& cand : drawn)
    if (cand.accepted) {
      out.loops.push_back(std::move(cand.loop));
      out.diameters.push_back(cand.diameter);
    }
  return out;
}

// ------------------------------------------------------------- clustering

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t root(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = root(a);
    b = root(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Relabels clusters by first appearance in loop order.
void build_partition(ClusterSet& cs, UnionFind& uf, std::size_t loops) {
  cs.loop_cluster.assign(loops, 0);
  cs.clusters.clear();
  std::vector<std::size_t> id(loops, std::numeric_limits<std::size_t>::max());
  for (std::size_t i = 0; i < loops; ++i) {
    const std::size_t r = uf.root(i);
    if (id[r] == std::numeric_limits<std::size_t>::max()) {
      id[r] = cs.clusters.size();
      cs.clusters.emplace_back();
    }
    cs.loop_cluster[i] = id[r];
    cs.clusters[id[r]].push_back(i);
  }
}

struct SegmentRef {
  std::uint64_t bucket;
  std::uint32_t loop;
  std::uint32_t seg;
  bool operator<(const SegmentRef& o) const {
    return bucket != o.bucket ? bucket < o.bucket : (loop != o.loop ? loop < o.loop : seg < o.seg);
  }
};

}  // namespace

ClusterSet cluster_soup(const LoopSet& loops, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("cluster_soup: tol must be positive");
  const std::size_t n = loops.loops.size();
  ClusterSet cs;
  UnionFind uf(n);
  if (n > 1) {
    double total = 0.0;
    std::size_t segs = 0;
    double xlo = std::numeric_limits<double>::infinity(), ylo = xlo;
    for (const auto& l : loops.loops)
      for (std::size_t k = 0; k < l.size(); ++k) {
        xlo = std::min(xlo, l.values[2 * k]);
        ylo = std::min(ylo, l.values[2 * k + 1]);
        if (k > 0) {
          total += std::hypot(l.values[2 * k] - l.values[2 * k - 2], l.values[2 * k + 1] - l.values[2 * k - 1]);
          ++segs;
        }
      }
    const double bucket = std::max(tol, 2.0 * total / static_cast<double>(std::max<std::size_t>(segs, 1)));
    std::vector<SegmentRef> refs;
    refs.reserve(segs * 2);
    const double pad = 0.5 * tol;
    for (std::size_t li = 0; li < n; ++li) {
      const auto& v = loops.loops[li].values;
      for (std::size_t k = 1; k < v.size() / 2; ++k) {
        const auto i0 = static_cast<std::uint64_t>((std::min(v[2 * k - 2], v[2 * k]) - pad - xlo + tol) / bucket);
        const auto i1 = static_cast<std::uint64_t>((std::max(v[2 * k - 2], v[2 * k]) + pad - xlo + tol) / bucket);
        const auto j0 = static_cast<std::uint64_t>((std::min(v[2 * k - 1], v[2 * k + 1]) - pad - ylo + tol) / bucket);
        const auto j1 = static_cast<std::uint64_t>((std::max(v[2 * k - 1], v[2 * k + 1]) + pad - ylo + tol) / bucket);
        for (std::uint64_t i = i0; i <= i1; ++i)
          for (std::uint64_t j = j0; j <= j1; ++j)
            refs.push_back({(i << 32) | j, static_cast<std::uint32_t>(li), static_cast<std::uint32_t>(k - 1)});
      }
    }
    std::sort(refs.begin(), refs.end());
    auto pt = [&](std::uint32_t li, std::uint32_t s) {
      const auto& v = loops.loops[li].values;
      return std::array<double, 2>{v[2 * s], v[2 * s + 1]};
    };
    for (std::size_t lo = 0; lo < refs.size();) {
      std::size_t hi = lo;
      while (hi < refs.size() && refs[hi].bucket == refs[lo].bucket) ++hi;
      for (std::size_t x = lo; x < hi; ++x)
        for (std::size_t y = x + 1; y < hi; ++y) {
          const SegmentRef &a = refs[x], &b = refs[y];
          if (a.loop == b.loop || uf.root(a.loop) == uf.root(b.loop)) continue;
          if (segment_distance(pt(a.loop, a.seg), pt(a.loop, a.seg + 1), pt(b.loop, b.seg), pt(b.loop, b.seg + 1)) <= tol)
            uf.unite(a.loop, b.loop);
        }
      lo = hi;
    }
  }
  build_partition(cs, uf, n);
  return cs;
}

// ------------------------------------------------------ outer boundaries

namespace {

struct Box {
  std::size_t ilo = std::numeric_limits<std::size_t>::max(), ihi = 0;
  std::size_t jlo = std::numeric_limits<std::size_t>::max(), jhi = 0;
  void add(std::size_t i, std::size_t j) {
    ilo = std::min(ilo, i);
    ihi = std::max(ihi, i);
    jlo = std::min(jlo, j);
    jhi = std::max(jhi, j);
  }
  std::size_t area() const { return (ihi - ilo + 1) * (jhi - jlo + 1); }
};

RasterGrid domain_grid(SoupDomain domain, double mesh) {
  const DomainShape d = domain_shape(domain);
  const auto n = static_cast<std::size_t>(std::ceil(d.extent / mesh - 1e-9));
  return {d.x0, d.y0, mesh, n, n};
}

}  // namespace

ClusterSet outermost_boundaries(const ClusterSet& clusters, const LoopSet& loops, double mesh) {
  if (!(mesh > 0.0)) throw InvalidArgument("outermost_boundaries: mesh must be positive");
  if (clusters.loop_cluster.size() != loops.loops.size())
    throw InvalidArgument("outermost_boundaries: clusters do not match the loop set");
  const RasterGrid inner = domain_grid(loops.domain, mesh);
  if (inner.cells() > (std::size_t{1} << 26)) throw CapacityError("outermost_boundaries: raster too large");
  // One empty cell of margin around the domain so the exterior is connected.
  const RasterGrid g{inner.x0 - mesh, inner.y0 - mesh, mesh, inner.width + 2, inner.height + 2};
  const std::size_t nc = clusters.clusters.size();
  UnionFind merge(nc);
  std::vector<std::int32_t> label(g.cells(), -1);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t li : clusters.clusters[c])
      rasterize_polyline(g, loops.loops[li].values, [&](std::size_t cell) {
        if (label[cell] < 0)
          label[cell] = static_cast<std::int32_t>(c);
        else if (static_cast<std::size_t>(label[cell]) != c)
          merge.unite(static_cast<std::size_t>(label[cell]), c);
      });
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) {
      const std::int32_t a = label[j * g.width + i];
      if (a < 0) continue;
      if (i + 1 < g.width && label[j * g.width + i + 1] >= 0)
        merge.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(label[j * g.width + i + 1]));
      if (j + 1 < g.height && label[(j + 1) * g.width + i] >= 0)
        merge.unite(static_cast<std::size_t>(a), static_cast<std::size_t>(label[(j + 1) * g.width + i]));
    }
  // Merged partition of loops.
  ClusterSet out;
  out.mesh = mesh;
  {
    UnionFind loop_uf(loops.loops.size());
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t li : clusters.clusters[c]) loop_uf.unite(li, clusters.clusters[merge.root(c)].front());
    build_partition(out, loop_uf, loops.loops.size());
  }
  // Cell labels in the merged numbering.
  std::vector<std::int32_t> old_to_new(nc);
  for (std::size_t c = 0; c < nc; ++c)
    old_to_new[c] = static_cast<std::int32_t>(out.loop_cluster[clusters.clusters[c].front()]);
  const std::size_t m = out.clusters.size();
  std::vector<Box> box(m);
  std::vector<std::size_t> first_col(m, 0);  // column of the first cell in the lowest row
  for (std::size_t cell = 0; cell < g.cells(); ++cell)
    if (label[cell] >= 0) {
      label[cell] = old_to_new[static_cast<std::size_t>(label[cell])];
      auto& b = box[static_cast<std::size_t>(label[cell])];
      if (b.ilo > b.ihi) first_col[static_cast<std::size_t>(label[cell])] = cell % g.width;
      b.add(cell % g.width, cell / g.width);
    }
  std::vector<std::uint8_t> empty(g.cells());
  for (std::size_t cell = 0; cell < g.cells(); ++cell) empty[cell] = label[cell] < 0 ? 1 : 0;
  const auto exterior = flood_from_border(g.width, g.height, empty);
  std::vector<std::uint8_t> touches(m, 0);
  for (std::size_t j = 1; j + 1 < g.height; ++j)
    for (std::size_t i = 1; i + 1 < g.width; ++i) {
      const std::size_t cell = j * g.width + i;
      if (label[cell] < 0) continue;
      if (exterior[cell - 1] || exterior[cell + 1] || exterior[cell - g.width] || exterior[cell + g.width])
        touches[static_cast<std::size_t>(label[cell])] = 1;
    }
  std::vector<std::int32_t> owner(g.cells(), -1);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  // Exterior-touching clusters first; the rest by decreasing box so that an
  // enclosing cluster is always handled before the clusters it encloses.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (touches[a] != touches[b]) return touches[a] > touches[b];
    return box[a].area() > box[b].area();
  });
  struct Fill {
    std::size_t cluster;
    RasterGrid sub;
    std::vector<std::uint8_t> mask;
  };
  std::vector<Fill> fills;
  for (std::size_t c : order) {
    const Box& b = box[c];
    if (b.ilo > b.ihi) continue;  // no raster cells
    // Rasters of different clusters never touch, so one cell decides enclosure.
    if (!touches[c] && owner[b.jlo * g.width + first_col[c]] >= 0) continue;
    const std::size_t ilo = b.ilo - 1, jlo = b.jlo - 1, w = b.ihi - b.ilo + 3, h = b.jhi - b.jlo + 3;
    std::vector<std::uint8_t> pass(w * h);
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t i = 0; i < w; ++i)
        pass[j * w + i] = label[(jlo + j) * g.width + ilo + i] == static_cast<std::int32_t>(c) ? 0 : 1;
    const auto outside = flood_from_border(w, h, pass);
    Fill f{c, {g.x0 + static_cast<double>(ilo) * mesh, g.y0 + static_cast<double>(jlo) * mesh, mesh, w, h}, {}};
    f.mask.assign(w * h, 0);
    for (std::size_t j = 0; j < h; ++j)
      for (std::size_t i = 0; i < w; ++i)
        if (!outside[j * w + i]) {
          f.mask[j * w + i] = 1;
          auto& o = owner[(jlo + j) * g.width + ilo + i];
          if (o < 0) o = static_cast<std::int32_t>(c);
        }
    fills.push_back(std::move(f));
  }
  std::sort(fills.begin(), fills.end(), [](const Fill& a, const Fill& b) { return a.cluster < b.cluster; });
  for (const Fill& f : fills) {
    const auto contours = marching_squares(f.sub, f.mask);
    const std::vector<double>* best = nullptr;
    double best_area = 0.0;
    for (const auto& ct : contours) {
      const double a = polygon_area(ct);
      if (a > best_area) {
        best_area = a;
        best = &ct;
      }
    }
    if (!best || best->size() < 8)
      throw MeshAdvisory("outermost_boundaries: cluster " + std::to_string(f.cluster) +
                         " has no traceable outer contour; use a finer mesh");
    out.outermost.push_back(f.cluster);
    out.boundaries.push_back(*best);
  }
  return out;
}

// ------------------------------------------------------------------ carpet

double CarpetMask::area_fraction() const {
  std::size_t in = 0, kept = 0;
  for (std::size_t k = 0; k < domain.size(); ++k) {
    in += domain[k];
    kept += carpet[k];
  }
  return in == 0 ? 0.0 : static_cast<double>(kept) / static_cast<double>(in);
}

CarpetMask carpet_mask(const ClusterSet& boundaries, SoupDomain domain, double mesh) {
  if (!(mesh > 0.0)) throw InvalidArgument("carpet_mask: mesh must be positive");
  CarpetMask mask;
  mask.grid = domain_grid(domain, mesh);
  if (mask.grid.cells() > (std::size_t{1} << 26)) throw CapacityError("carpet_mask: raster too large");
  const DomainShape d = domain_shape(domain);
  const RasterGrid& g = mask.grid;
  mask.domain.assign(g.cells(), 0);
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) mask.domain[j * g.width + i] = d.contains(g.cx(i), g.cy(j)) ? 1 : 0;
  mask.owner.assign(g.cells(), -1);
  for (std::size_t b = 0; b < boundaries.boundaries.size(); ++b) {
    const auto& poly = boundaries.boundaries[b];
    fill_polygon(g, poly, [&](std::size_t cell) {
      if (mask.owner[cell] < 0) mask.owner[cell] = static_cast<std::int32_t>(b);
    });
    mask.boundary_diams.push_back(window_diameter(PointSet(2, poly), 0, poly.size() / 2));
  }
  std::sort(mask.boundary_diams.begin(), mask.boundary_diams.end(), std::greater<>());
  mask.carpet.assign(g.cells(), 0);
  for (std::size_t k = 0; k < g.cells(); ++k) mask.carpet[k] = (mask.domain[k] && mask.owner[k] < 0) ? 1 : 0;
  return mask;
}

WhyburnReport whyburn_check(const CarpetMask& mask, const ClusterSet& boundaries, double eps_density,
                            double eps_diam) {
  if (!(eps_density > 0.0) || !(eps_diam > 0.0)) throw InvalidArgument("whyburn_check: eps values must be positive");
  const RasterGrid& g = mask.grid;
  WhyburnReport rep;
  rep.boundary_count = boundaries.boundaries.size();
  for (double dm : mask.boundary_diams)
    if (dm > eps_diam) ++rep.large_count;

  // Density over eps-squares anchored at the domain corner.
  const auto per_side = static_cast<std::size_t>(std::ceil(g.mesh * static_cast<double>(g.width) / eps_density - 1e-9));
  std::vector<std::uint8_t> has_domain(per_side * per_side, 0), has_hole(per_side * per_side, 0);
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i) {
      const std::size_t cell = j * g.width + i;
      if (!mask.domain[cell]) continue;
      const auto si = std::min(per_side - 1, static_cast<std::size_t>((g.cx(i) - g.x0) / eps_density));
      const auto sj = std::min(per_side - 1, static_cast<std::size_t>((g.cy(j) - g.y0) / eps_density));
      has_domain[sj * per_side + si] = 1;
      if (mask.owner[cell] >= 0) has_hole[sj * per_side + si] = 1;
    }
  std::size_t squares = 0, hit = 0;
  for (std::size_t s = 0; s < has_domain.size(); ++s) {
    squares += has_domain[s];
    hit += has_domain[s] && has_hole[s];
  }
  rep.density_fraction = squares == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(squares);

  // Closest approach between different boundaries, searched up to 4 mesh.
  const double radius = 4.0 * g.mesh;
  rep.min_boundary_distance = radius;
  struct Ref {
    std::uint64_t bucket;
    std::uint32_t poly, seg;
    bool operator<(const Ref& o) const { return bucket != o.bucket ? bucket < o.bucket : poly < o.poly; }
  };
  std::vector<Ref> refs;
  const auto& bs = boundaries.boundaries;
  for (std::size_t b = 0; b < bs.size(); ++b)
    for (std::size_t k = 1; k < bs[b].size() / 2; ++k) {
      const double* v = bs[b].data() + 2 * (k - 1);
      auto idx = [&](double x, double o) { return static_cast<std::uint64_t>((x - o + 2.0 * radius) / radius); };
      const auto i0 = idx(std::min(v[0], v[2]) - 0.5 * radius, g.x0), i1 = idx(std::max(v[0], v[2]) + 0.5 * radius, g.x0);
      const auto j0 = idx(std::min(v[1], v[3]) - 0.5 * radius, g.y0), j1 = idx(std::max(v[1], v[3]) + 0.5 * radius, g.y0);
      for (auto i = i0; i <= i1; ++i)
        for (auto j = j0; j <= j1; ++j)
          refs.push_back({(i << 32) | j, static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(k - 1)});
    }
  std::sort(refs.begin(), refs.end());
  for (std::size_t lo = 0; lo < refs.size();) {
    std::size_t hi = lo;
    while (hi < refs.size() && refs[hi].bucket == refs[lo].bucket) ++hi;
    for (std::size_t x = lo; x < hi; ++x)
      for (std::size_t y = x + 1; y < hi; ++y) {
        if (refs[x].poly == refs[y].poly) continue;
        const double* a = bs[refs[x].poly].data() + 2 * refs[x].seg;
        const double* b = bs[refs[y].poly].data() + 2 * refs[y].seg;
        rep.min_boundary_distance =
            std::min(rep.min_boundary_distance, segment_distance({a[0], a[1]}, {a[2], a[3]}, {b[0], b[1]}, {b[2], b[3]}));
      }
    lo = hi;
  }
  rep.disjoint = rep.min_boundary_distance > 0.5 * g.mesh;
  return rep;
}

std::vector<BoundaryTurning> boundary_turning_stats(const ClusterSet& boundaries, int levels) {
  std::vector<BoundaryTurning> out;
  for (const auto& poly : boundaries.boundaries) {
    std::size_t n = poly.size() / 2;
    if (n >= 2 && poly[0] == poly[2 * n - 2] && poly[1] == poly[2 * n - 1]) --n;
    if (n < 64) continue;
    BoundaryTurning bt;
    bt.vertices = n;
    const auto curve = PolyCurve::from_points(PointSet(2, std::vector<double>(poly.begin(), poly.begin() + 2 * n)));
    for (const auto& r : turning_profile(curve, levels, CurveTopology::Closed)) bt.profile.push_back(r.constant);
    bt.max_constant = *std::max_element(bt.profile.begin(), bt.profile.end());
    std::vector<double> circle(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      circle[2 * k] = std::cos(a);
      circle[2 * k + 1] = std::sin(a);
    }
    const auto ring = turning_profile(PolyCurve::from_points(PointSet(2, std::move(circle))), levels, CurveTopology::Closed);
    for (const auto& r : ring) bt.circle_baseline = std::max(bt.circle_baseline, r.constant);
    out.push_back(std::move(bt));
  }
  if (out.empty()) throw InvalidArgument("boundary_turning_stats: no boundary with at least 64 vertices");
  return out;
}

ScalingFit carpet_dimension(const CarpetMask& mask) {
  const RasterGrid& g = mask.grid;
  std::vector<double> pts;
  for (std::size_t j = 0; j < g.height; ++j)
    for (std::size_t i = 0; i < g.width; ++i)
      if (mask.carpet[j * g.width + i]) {
        pts.push_back(g.cx(i));
        pts.push_back(g.cy(j));
      }
  if (pts.empty()) throw InvalidArgument("carpet_dimension: carpet is empty");
  std::vector<double> scales;
  const double extent = g.mesh * static_cast<double>(g.width);
  for (double s = extent / 2.0; s >= 4.0 * g.mesh * (1.0 - 1e-12); s /= 2.0) scales.push_back(s);
  if (scales.size() < 3) throw InvalidArgument("carpet_dimension: mesh too coarse for 3 scales");
  BoxCountOptions opt;
  opt.resolution = g.mesh;
  return box_counting_dimension(PointSet(2, std::move(pts)), scales, opt);
}

}  // namespace fractal_lab
