#pragma once

// Brownian loop soup in a planar domain, loop clusters, outermost cluster
// boundaries (the CLE_kappa loops), the carpet left after removing their
// interiors, and finite-scale diagnostics of the Whyburn conditions.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fractal_lab/brownian.hpp"
#include "fractal_lab/geom.hpp"
#include "fractal_lab/raster.hpp"

namespace fractal_lab {

enum class SoupDomain { UnitSquare, UnitDisk };

struct SoupConfig {
  SoupDomain domain = SoupDomain::UnitSquare;
  /// Intensity comes from kappa unless `intensity` is set.
  double kappa = 4.0;
  std::optional<double> intensity;
  double t_min = 1e-4;
  double t_max = 0.25;
  double diam_min = 0.02;
  double mesh = 1.0 / 1024.0;
  std::size_t mc_mass_samples = 20000;
  std::uint64_t seed = 1;
};

/// (3 kappa - 8)(6 - kappa) / (2 kappa); UnsupportedParameter outside (8/3, 4].
double intensity_for_kappa(double kappa);

/// Validates the config (InvalidArgument / UnsupportedParameter) and returns c.
double soup_intensity(const SoupConfig& config);

/// The domain's bounding box [x0, x0 + extent]^2 and area.
struct DomainShape {
  double x0, y0, extent, area, diameter;
  bool contains(double x, double y) const noexcept;
};
DomainShape domain_shape(SoupDomain domain);

struct LoopSet {
  SoupDomain domain = SoupDomain::UnitSquare;
  std::vector<BridgeLoop> loops;
  std::vector<double> diameters;
  std::size_t candidates = 0;  // proposals drawn before thinning
};

/// Points per loop of duration t: one step per mesh^2 of time, so the rms step
/// stays near the raster resolution (capped at 2^21).
std::size_t soup_mesh_points(double t, double mesh);

/// Monte Carlo estimate of the truncated loop mass (importance sampling t ~ 1/t^2,
/// root uniform in D); radius is 3 standard errors. Throws DegenerateCutoff when
/// no sample is accepted. Returns exactly 0 when diam_min exceeds the domain diameter.
ProbabilityEstimate truncated_loop_mass(const SoupConfig& config);

/// Soup with intensity c: a Poisson(c * M) number of proposals from the
/// importance law (M = |D| (1/t_min - 1/t_max) / 2 pi), thinned by the
/// acceptance event (inside D, diameter >= diam_min). The kept loops form a
/// Poisson process of intensity c times the truncated loop measure. Proposal k
/// uses its own stream, so soups with different diam_min are nested.
LoopSet sample_soup(const SoupConfig& config);

struct ClusterSet {
  std::vector<std::size_t> loop_cluster;         // cluster id of each loop
  std::vector<std::vector<std::size_t>> clusters;  // loop indices, ordered by smallest member
  std::vector<std::size_t> outermost;            // cluster ids
  std::vector<std::vector<double>> boundaries;   // closed polylines (x/y), one per outermost cluster
  double mesh = 0.0;
};

/// Loops are linked when their polylines cross or come within tol.
ClusterSet cluster_soup(const LoopSet& loops, double tol);

/// Rasterizes clusters at `mesh` (clusters whose rasters share or 4-touch a
/// cell are merged), flood-fills the exterior and traces the outer contour of
/// each cluster not enclosed by another. Throws MeshAdvisory when a contour
/// cannot be traced.
ClusterSet outermost_boundaries(const ClusterSet& clusters, const LoopSet& loops, double mesh);

struct CarpetMask {
  RasterGrid grid;
  std::vector<std::uint8_t> domain;  // 1 = cell centre inside D
  std::vector<std::uint8_t> carpet;  // 1 = in carpet, 0 = hole or outside D
  std::vector<std::int32_t> owner;   // boundary index whose interior holds the cell, -1 otherwise
  std::vector<double> boundary_diams;  // nonincreasing

  double area_fraction() const;
};

CarpetMask carpet_mask(const ClusterSet& boundaries, SoupDomain domain, double mesh);

struct WhyburnReport {
  bool disjoint = true;
  double min_boundary_distance = 0.0;  // capped at the search radius
  std::size_t large_count = 0;         // boundaries with diameter > eps_diam
  double density_fraction = 0.0;
  std::size_t boundary_count = 0;
};

/// Disjointness means every pair of boundaries is farther apart than mesh / 2.
WhyburnReport whyburn_check(const CarpetMask& mask, const ClusterSet& boundaries, double eps_density,
                            double eps_diam);

struct BoundaryTurning {
  std::size_t vertices = 0;
  std::vector<double> profile;   // closed-curve turning constants per level
  double max_constant = 0.0;
  double circle_baseline = 0.0;  // regular polygon, same vertex count
};

/// Turning profiles of every boundary with >= 64 vertices; InvalidArgument if none.
std::vector<BoundaryTurning> boundary_turning_stats(const ClusterSet& boundaries, int levels = 3);

/// Box-counting fit on the carpet cells (scales 2^-1 .. down to 4 mesh).
ScalingFit carpet_dimension(const CarpetMask& mask);

}  // namespace fractal_lab
