#include "fractal_lab/brownian.hpp"

#include <cmath>
#include <string>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/rng.hpp"

namespace fractal_lab {

BrownianPath sample_bm(int dims, int depth, double horizon, std::uint64_t seed) {
  if (dims < 1) throw InvalidArgument("sample_bm: dims must be >= 1");
  if (depth < 1) throw InvalidArgument("sample_bm: depth must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidArgument("sample_bm: horizon must be positive");
  if (depth > kMaxBrownianDepth)
    throw CapacityError("sample_bm: depth " + std::to_string(depth) + " exceeds the addressable maximum " +
                        std::to_string(kMaxBrownianDepth));
  const std::size_t steps = std::size_t{1} << depth;
  const auto d = static_cast<std::size_t>(dims);
  if ((steps + 1) * d * sizeof(double) > kPathByteBudget)
    throw CapacityError("sample_bm: path of depth " + std::to_string(depth) + " in " + std::to_string(dims) +
                        " dimensions exceeds the memory budget; lower depth or dims");

  BrownianPath path{dims, depth, horizon, seed, {}};
  path.values.assign((steps + 1) * d, 0.0);
  std::span<double> increments(path.values.data() + d, steps * d);
  fill_gaussian(increments, derive_stream(seed, {stream_tag::kBrownian}), std::sqrt(horizon / static_cast<double>(steps)));
  for (std::size_t k = 1; k <= steps; ++k)
    for (std::size_t c = 0; c < d; ++c) path.values[k * d + c] += path.values[(k - 1) * d + c];
  return path;
}

BrownianPath refine_bm(const BrownianPath& path, int target_depth) {
  if (target_depth <= path.depth) throw InvalidArgument("refine_bm: target depth must exceed the current depth");
  if (target_depth > kMaxBrownianDepth) throw CapacityError("refine_bm: target depth exceeds the addressable maximum");
  const auto d = static_cast<std::size_t>(path.dims);
  if (((std::size_t{1} << target_depth) + 1) * d * sizeof(double) > kPathByteBudget)
    throw CapacityError("refine_bm: refined path exceeds the memory budget");
  BrownianPath cur = path;
  for (int level = path.depth + 1; level <= target_depth; ++level) {
    const std::size_t coarse_steps = std::size_t{1} << (level - 1);
    const double coarse_dt = cur.horizon / static_cast<double>(coarse_steps);
    std::vector<double> noise(coarse_steps * d);
    fill_gaussian(noise, derive_stream(path.seed, {stream_tag::kRefine, static_cast<std::uint64_t>(level)}),
                  std::sqrt(coarse_dt / 4.0));
    std::vector<double> next((2 * coarse_steps + 1) * d);
    for (std::size_t k = 0; k <= coarse_steps; ++k)
      for (std::size_t c = 0; c < d; ++c) next[2 * k * d + c] = cur.values[k * d + c];
    for (std::size_t k = 0; k < coarse_steps; ++k)
      for (std::size_t c = 0; c < d; ++c)
        next[(2 * k + 1) * d + c] =
            0.5 * (cur.values[k * d + c] + cur.values[(k + 1) * d + c]) + noise[k * d + c];
    cur.values = std::move(next);
    cur.depth = level;
  }
  return cur;
}

BrownianPath restrict_bm(const BrownianPath& path, int depth) {
  if (depth < 1 || depth > path.depth) throw InvalidArgument("restrict_bm: depth out of range");
  const auto d = static_cast<std::size_t>(path.dims);
  const std::size_t stride = std::size_t{1} << (path.depth - depth);
  BrownianPath out{path.dims, depth, path.horizon, path.seed, {}};
  out.values.reserve(out.size() * d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    auto p = path.at(k * stride);
    out.values.insert(out.values.end(), p.begin(), p.end());
  }
  return out;
}

BridgeLoop sample_bridge_loop(std::array<double, 2> center, double duration, std::size_t mesh_points,
                              std::uint64_t seed) {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("sample_bridge_loop: duration must be positive");
  if (mesh_points < 8) throw InvalidArgument("sample_bridge_loop: mesh_points must be >= 8");
  const std::size_t steps = mesh_points - 1;
  std::vector<double> walk(mesh_points * 2, 0.0);
  fill_gaussian(std::span<double>(walk.data() + 2, steps * 2), derive_stream(seed, {stream_tag::kBridge}),
                std::sqrt(duration / static_cast<double>(steps)));
  for (std::size_t k = 1; k <= steps; ++k) {
    walk[2 * k] += walk[2 * k - 2];
    walk[2 * k + 1] += walk[2 * k - 1];
  }
  const double ex = walk[2 * steps], ey = walk[2 * steps + 1];
  BridgeLoop loop{center, duration, std::vector<double>(mesh_points * 2)};
  for (std::size_t k = 0; k <= steps; ++k) {
    const double frac = static_cast<double>(k) / static_cast<double>(steps);
    loop.values[2 * k] = center[0] + (walk[2 * k] - frac * ex);
    loop.values[2 * k + 1] = center[1] + (walk[2 * k + 1] - frac * ey);
  }
  loop.values[0] = loop.values[2 * steps] = center[0];
  loop.values[1] = loop.values[2 * steps + 1] = center[1];
  return loop;
}

namespace {

void check_scan(const BrownianPath& path, double a, int level) {
  if (path.horizon != 1.0) throw InvalidArgument("dyadic_event_scan: horizon must be 1; rescale the path first");
  if (level < 1 || level > path.depth) throw InvalidArgument("dyadic_event_scan: level must lie in [1, depth]");
  if (!(a >= 0.0)) throw InvalidArgument("dyadic_event_scan: a must be nonnegative");
}

// Returns true and fills `hit` when interval i at `level` satisfies both events.
bool scan_interval(const BrownianPath& path, double a, int level, std::size_t i, DyadicEventHit& hit) {
  const std::size_t stride = std::size_t{1} << (path.depth - level);
  const double unit = 1.0 / std::sqrt(static_cast<double>(std::size_t{1} << level));
  const auto start = path.at(i * stride);
  const double inc = distance(start, path.at((i + 1) * stride));
  if (!(inc <= 2.0 * unit)) return false;
  double excursion = 0.0;
  for (std::size_t k = i * stride + 1; k <= (i + 1) * stride; ++k) excursion = std::max(excursion, distance(path.at(k), start));
  if (!(excursion >= a * unit)) return false;
  hit = {level, i, inc, excursion};
  return true;
}

}  // namespace

std::vector<DyadicEventHit> dyadic_event_scan(const BrownianPath& path, double a, int level) {
  check_scan(path, a, level);
  const auto intervals = static_cast<std::int64_t>(std::size_t{1} << level);
  std::vector<unsigned char> flag(static_cast<std::size_t>(intervals), 0);
  std::vector<DyadicEventHit> slot(static_cast<std::size_t>(intervals));
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (std::int64_t i = 0; i < intervals; ++i) {
    const auto k = static_cast<std::size_t>(i);
    flag[k] = scan_interval(path, a, level, k, slot[k]) ? 1 : 0;
  }
  std::vector<DyadicEventHit> hits;
  for (std::size_t k = 0; k < flag.size(); ++k)
    if (flag[k]) hits.push_back(slot[k]);
  return hits;
}

namespace reference {

std::vector<DyadicEventHit> dyadic_event_scan(const BrownianPath& path, double a, int level) {
  check_scan(path, a, level);
  std::vector<DyadicEventHit> hits;
  DyadicEventHit h;
  for (std::size_t i = 0; i < (std::size_t{1} << level); ++i)
    if (scan_interval(path, a, level, i, h)) hits.push_back(h);
  return hits;
}

}  // namespace reference

ProbabilityEstimate joint_event_probability(int dims, double a, int grid_depth, std::size_t replicates,
                                            std::uint64_t seed) {
  if (replicates < 100) throw InvalidArgument("joint_event_probability: need at least 100 replicates");
  const auto hits = parallel_map<unsigned char>(replicates, [&](std::size_t r) -> unsigned char {
    const BrownianPath p = sample_bm(dims, grid_depth, 1.0, derive_stream(seed, {stream_tag::kReplicate, r}));
    const std::vector<double> origin(static_cast<std::size_t>(dims), 0.0);
    if (!(distance(p.at(p.size() - 1), origin) <= 2.0)) return 0;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (distance(p.at(k), origin) >= a) return 1;
    return 0;
  });
  ProbabilityEstimate est;
  est.replicates = replicates;
  for (auto h : hits) est.successes += h;
  est.estimate = static_cast<double>(est.successes) / static_cast<double>(replicates);
  est.radius = 3.0 * std::sqrt(est.estimate * (1.0 - est.estimate) / static_cast<double>(replicates));
  return est;
}

double levy_modulus_ratio(const BrownianPath& path, double h) {
  if (path.dims != 1) throw InvalidArgument("levy_modulus_ratio: path must be one-dimensional");
  const double dt = path.dt();
  if (!(h >= dt)) throw InvalidArgument("levy_modulus_ratio: h is below the grid spacing");
  if (!(h < 1.0) || h > path.horizon) throw InvalidArgument("levy_modulus_ratio: h must be below 1 and the horizon");
  const auto lag = static_cast<std::size_t>(std::llround(h / dt));
  const double hg = static_cast<double>(lag) * dt;
  const double norm = std::sqrt(2.0 * hg * std::log(1.0 / hg));
  double best = 0.0;
  for (std::size_t k = 0; k + lag < path.size(); ++k)
    best = std::max(best, std::fabs(path.values[k + lag] - path.values[k]));
  return best / norm;
}

PolyCurve graph_curve(const BrownianPath& path) {
  const auto d = static_cast<std::size_t>(path.dims);
  std::vector<double> coords;
  coords.reserve(path.size() * (d + 1));
  std::vector<double> times(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    times[k] = static_cast<double>(k) * path.dt();
    coords.push_back(times[k]);
    auto p = path.at(k);
    coords.insert(coords.end(), p.begin(), p.end());
  }
  return PolyCurve(PointSet(d + 1, std::move(coords)), std::move(times));
}

PolyCurve trace_curve(const BrownianPath& path) {
  std::vector<double> times(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) times[k] = static_cast<double>(k) * path.dt();
  return PolyCurve(PointSet(static_cast<std::size_t>(path.dims), path.values), std::move(times));
}

}  // namespace fractal_lab
