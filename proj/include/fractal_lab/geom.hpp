#pragma once

// Metric-geometry measurements on sampled point sets and curves: diameters,
// bounded-turning constants, quasisymmetric triple distortion, box-counting
// dimension and doubling counts.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace fractal_lab {

/// Row-major points in R^d.
class PointSet {
 public:
  PointSet() = default;
  /// Throws InvalidArgument when dim == 0, coords.size() is not a multiple of
  /// dim, or any coordinate is non-finite.
  PointSet(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return dim_ == 0 ? 0 : coords_.size() / dim_; }
  bool empty() const noexcept { return size() == 0; }
  std::span<const double> operator[](std::size_t i) const noexcept { return {coords_.data() + i * dim_, dim_}; }
  const std::vector<double>& coords() const noexcept { return coords_; }

  /// Points i0, i0+stride, ... (i < size()).
  PointSet strided(std::size_t stride) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> coords_;
};

double distance(std::span<const double> a, std::span<const double> b) noexcept;

/// Time-ordered sample of a curve.
class PolyCurve {
 public:
  PolyCurve() = default;
  /// Throws InvalidArgument unless: >= 2 points, times.size() == points.size(),
  /// times strictly increasing and finite.
  PolyCurve(PointSet points, std::vector<double> times);
  /// Uniform times 0, 1, 2, ...
  static PolyCurve from_points(PointSet points);

  const PointSet& points() const noexcept { return points_; }
  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dim() const noexcept { return points_.dim(); }

 private:
  PointSet points_;
  std::vector<double> times_;
};

/// Half-open index interval [first, last).
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct TurningReport {
  double constant = 1.0;
  std::size_t i = 0;  // witness pair, i < j, indices into the measured curve
  std::size_t j = 1;
  double scale = 0.0;  // |p_i - p_j|
  /// Pairs with p_i == p_j (i != j, non-adjacent): infinite turning.
  std::vector<std::pair<std::size_t, std::size_t>> infinite_witnesses;  // first kMaxInfiniteWitnesses
  std::size_t infinite_count = 0;
  /// Stride used when the curve had to be subsampled (1 = every point).
  std::size_t stride = 1;

  bool infinite() const noexcept { return infinite_count > 0; }
};

inline constexpr std::size_t kMaxInfiniteWitnesses = 16;
/// Largest sample on which turning is searched exhaustively.
inline constexpr std::size_t kMaxTurningPoints = 4096;
inline constexpr std::size_t kMaxClosedTurningPoints = 2048;

struct ScalingFit {
  std::vector<double> scales;           // decreasing
  std::vector<std::uint64_t> counts;    // occupied boxes per scale
  std::vector<bool> used;               // scales entering the regression
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 1.0;
};

/// Max pairwise distance over points[range]. Throws InvalidArgument on an
/// empty or out-of-bounds range.
double curve_diameter(const PolyCurve& curve, IndexRange range);
double point_set_diameter(const PointSet& points);
/// Same over an index window of a point set; 2-d windows go through the convex hull.
double window_diameter(const PointSet& points, std::size_t first, std::size_t last);

/// diam(points[i..j]) / |p_i - p_j|.
double witness_ratio(const PolyCurve& curve, std::size_t i, std::size_t j);

/// Largest diam(subcurve i..j) / |p_i - p_j| over sampled pairs. Curves over
/// kMaxTurningPoints are searched on a uniform stride subsample; witness
/// indices always refer to the input curve.
TurningReport turning_constant(const PolyCurve& curve);

/// Closed-curve variant: each pair is charged the smaller-diameter of the two
/// arcs joining it. A repeated closing vertex is ignored.
TurningReport turning_constant_closed(const PolyCurve& curve);

enum class CurveTopology { Open, Closed };

/// Report k (k = 1..levels) measures the subsample at stride base * 2^(levels-k),
/// where base is the smallest power of two keeping the finest level within the
/// exhaustive-search cap. Constants are nondecreasing in k.
std::vector<TurningReport> turning_profile(const PolyCurve& curve, int levels,
                                           CurveTopology topology = CurveTopology::Open);

struct RatioPair {
  double input_ratio;
  double output_ratio;
};

struct TripleDistortion {
  std::vector<RatioPair> pairs;
  bool infinite_distortion = false;
  std::size_t infinite_count = 0;
};

/// All ordered triples (x, y, z), x != z: (|x-y|/|x-z|, |f(x)-f(y)|/|f(x)-f(z)|).
TripleDistortion qs_triple_distortion(const PointSet& domain_pts, const PointSet& image_pts);

struct EnvelopeBin {
  double lower;  // input-ratio bin edges
  double upper;
  double max_output;
  std::size_t count;
};

/// Upper envelope of output ratio over logarithmic input-ratio bins. Pairs with
/// zero input ratio are skipped.
std::vector<EnvelopeBin> eta_envelope(std::span<const RatioPair> pairs, int bins_per_decade = 32);

struct BoxCountOptions {
  /// Point resolution; scales below 4x this are left out of the fit (0 = none).
  double resolution = 0.0;
  bool drop_largest = true;
};

/// Occupied axis-aligned boxes (grid anchored at the origin) per scale and the
/// least-squares slope of log(count) against log(1/scale).
ScalingFit box_counting_dimension(const PointSet& points, std::span<const double> scales,
                                  const BoxCountOptions& options = {});

/// Fits the slope over the flagged scales. Used by box counting and by
/// percolation level counts. Throws InvalidArgument with fewer than 2 used scales.
void fit_scaling(ScalingFit& fit);

/// Greedy farthest-point covering of points within B(center, r) by balls of
/// radius r/2 centred at sample points. Returns the number of balls.
std::size_t doubling_count(const PointSet& points, std::span<const double> center, double r);

namespace reference {
/// Brute-force O(n^2) diameter.
double point_set_diameter(const PointSet& points, std::size_t first, std::size_t last);
/// Direct definition: every pair, sub-diameter recomputed from scratch. O(n^4);
/// only for small oracle checks.
TurningReport turning_constant(const PolyCurve& curve);
TurningReport turning_constant_closed(const PolyCurve& curve);
}  // namespace reference

}  // namespace fractal_lab
