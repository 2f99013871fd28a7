#pragma once

// Mandelbrot fractal percolation: the cube is cut into l^n subcubes, each kept
// with probability p, recursively inside kept cubes.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fractal_lab/brownian.hpp"
#include "fractal_lab/geom.hpp"
#include "fractal_lab/raster.hpp"

namespace fractal_lab {

/// Cell at `level`: digits[k] is the child offset (in {0..l-1}^n) chosen at level k+1.
struct CellIndex {
  int level = 0;
  std::vector<std::vector<int>> digits;
};

class PercTree {
 public:
  int dim = 2;
  int branching = 3;
  double retain_prob = 1.0;
  int depth = 1;
  std::uint64_t seed = 0;
  /// Kept cells per level as integer coordinates in [0, l^level)^n, row-major,
  /// sorted lexicographically. kept[0] holds the unit cube.
  std::vector<std::vector<std::uint32_t>> kept;

  std::size_t count(int level) const { return kept.at(static_cast<std::size_t>(level)).size() / static_cast<std::size_t>(dim); }
  bool survived() const { return count(depth) > 0; }
  std::span<const std::uint32_t> cell(int level, std::size_t i) const {
    return {kept.at(static_cast<std::size_t>(level)).data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  CellIndex index(int level, std::size_t i) const;
};

/// Cells allowed in a single tree (summed over levels).
inline constexpr std::size_t kMaxPercolationCells = std::size_t{1} << 26;

/// Retention of each child is decided by a hash of (seed, level, child
/// coordinates), so trees for different p with the same seed are nested.
/// Throws InvalidArgument on bad parameters and CapacityError when the
/// expected cell count exceeds kMaxPercolationCells.
PercTree sample_percolation(int n, int l, double p, int depth, std::uint64_t seed);

/// Fraction of replicates (seeds derived from `seed`) with a kept cell at `depth`.
ProbabilityEstimate survival_probability(int n, int l, double p, int depth, std::size_t replicates, std::uint64_t seed);

/// Same decision for one tree without storing it (depth-first, stops at the first surviving branch).
bool survives(int n, int l, double p, int depth, std::uint64_t seed);

struct DimensionCheck {
  ScalingFit fit;
  double reference = 0.0;  // n + log p / log l
};

/// Kept-cell counts per level against scale l^-k. `levels` selects the levels
/// to fit (empty = 2..depth, or 1..depth when depth < 3).
DimensionCheck dimension_check(const PercTree& tree, std::span<const int> levels = {});

struct DisconnectionStats {
  std::size_t largest_component_cells = 0;
  std::size_t component_count = 0;
  /// min over deepest-level cells of cell side / distance to the nearest
  /// other kept cell (centers); 0 for a single cell. Small values mean a
  /// cell is isolated relative to its own size.
  double perfectness_min_gap = 0.0;
  /// max over components of diameter / distance to the rest; 0 with one component.
  double disconnectedness_modulus = 0.0;
};

enum class Adjacency { Face, Corner };

DisconnectionStats disconnection_stats(const PercTree& tree, Adjacency adjacency = Adjacency::Face);

/// Component label per deepest-level cell (labels 0..count-1 by first appearance).
std::vector<std::size_t> component_labels(const PercTree& tree, Adjacency adjacency = Adjacency::Face);

/// Rows "level,digits" for every kept cell; digits per level are n base-l
/// characters, levels separated by '.'. Requires l <= 36.
std::string percolation_csv(const PercTree& tree);

/// Deepest level as an 8-bit raster (255 kept, 0 removed). n = 1 gives one
/// row, n = 3 stacks the z-slices vertically.
GrayImage percolation_raster(const PercTree& tree);

}  // namespace fractal_lab
