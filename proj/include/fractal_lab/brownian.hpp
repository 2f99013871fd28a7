#pragma once

// Exact-law Brownian sampling on dyadic grids, bridge loops, and the
// dyadic-interval event statistics behind the bounded-turning failure of
// Brownian traces and graphs.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fractal_lab/geom.hpp"

namespace fractal_lab {

/// Standard n-dimensional Brownian motion sampled at k * horizon / 2^depth.
struct BrownianPath {
  int dims = 1;
  int depth = 1;
  double horizon = 1.0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // (2^depth + 1) rows of `dims` coordinates

  std::size_t size() const noexcept { return (std::size_t{1} << depth) + 1; }
  double dt() const noexcept { return horizon / static_cast<double>(std::size_t{1} << depth); }
  std::span<const double> at(std::size_t k) const noexcept {
    return {values.data() + k * static_cast<std::size_t>(dims), static_cast<std::size_t>(dims)};
  }
};

inline constexpr int kMaxBrownianDepth = 26;
/// Memory budget for one path, in bytes.
inline constexpr std::size_t kPathByteBudget = std::size_t{2} << 30;

/// Throws InvalidArgument for dims < 1, depth < 1 or horizon <= 0;
/// CapacityError when depth > kMaxBrownianDepth or the path exceeds the budget.
BrownianPath sample_bm(int dims, int depth, double horizon, std::uint64_t seed);

/// Brownian-bridge midpoint refinement. Existing grid values are kept
/// bit-for-bit; the midpoints of level L come from the stream (seed, L), so
/// refining j -> j+2 in one call or two calls gives the same path.
BrownianPath refine_bm(const BrownianPath& path, int target_depth);

/// Restriction to the coarser dyadic grid of the given depth.
BrownianPath restrict_bm(const BrownianPath& path, int depth);

struct BridgeLoop {
  std::array<double, 2> center{};
  double duration = 0.0;
  std::vector<double> values;  // closed polyline, x/y interleaved; front == back == center

  std::size_t size() const noexcept { return values.size() / 2; }
};

/// z + (B_s - (s/t) B_t) on mesh_points uniform s-grid points (endpoints included).
BridgeLoop sample_bridge_loop(std::array<double, 2> center, double duration, std::size_t mesh_points,
                              std::uint64_t seed);

struct DyadicEventHit {
  int level = 0;
  std::size_t index = 0;
  double increment_norm = 0.0;
  double max_excursion = 0.0;
};

/// Intervals [i/2^j, (i+1)/2^j] with |B((i+1)/2^j) - B(i/2^j)| <= 2/sqrt(2^j)
/// and grid max |B(t) - B(i/2^j)| >= a/sqrt(2^j). Requires horizon == 1.
std::vector<DyadicEventHit> dyadic_event_scan(const BrownianPath& path, double a, int level);

struct ProbabilityEstimate {
  double estimate = 0.0;
  double radius = 0.0;  // 3 binomial standard errors
  std::size_t successes = 0;
  std::size_t replicates = 0;
};

/// P(|B(1)| <= 2 and max_[0,1] |B| >= a), grid maxima at grid_depth.
ProbabilityEstimate joint_event_probability(int dims, double a, int grid_depth, std::size_t replicates,
                                            std::uint64_t seed);

/// sup over grid times t <= horizon - h of |B(t+h) - B(t)| / sqrt(2 h log(1/h)).
double levy_modulus_ratio(const BrownianPath& path, double h);

/// The graph t -> (t, B(t)) in R^(1+dims).
PolyCurve graph_curve(const BrownianPath& path);
/// The trace t -> B(t) in R^dims (times attached).
PolyCurve trace_curve(const BrownianPath& path);

namespace reference {
std::vector<DyadicEventHit> dyadic_event_scan(const BrownianPath& path, double a, int level);
}  // namespace reference

}  // namespace fractal_lab
