#pragma once

// Driving functions and Loewner-equation engines for chordal, radial and
// whole-plane SLE_kappa and SLE_kappa(rho).
//
// Drivers are piecewise constant: on the step (t_{k-1}, t_k] the driving value
// is W[k]. Traces are built by the zipper method, composing closed-form
// inverses of the elementary slit maps; forward_map integrates the Loewner ODE
// for the same piecewise-constant driver.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "fractal_lab/geom.hpp"

namespace fractal_lab {

enum class DriverKind { ChordalBM, ChordalRho, RadialBM, RadialRho };
enum class Geometry { Chordal, Radial };

struct Driver {
  DriverKind kind = DriverKind::ChordalBM;
  double kappa = 0.0;
  double rho = 0.0;
  double dt = 0.0;
  std::vector<double> W;              // W[0..steps]; radial kinds store the angle of xi
  std::vector<double> V;              // force-point track (rho kinds only)
  std::vector<std::size_t> flagged;   // steps where the gap was reflected at the floor
  std::uint64_t seed = 0;

  std::size_t steps() const noexcept { return W.empty() ? 0 : W.size() - 1; }
  double horizon() const noexcept { return dt * static_cast<double>(steps()); }
  double time(std::size_t k) const noexcept { return dt * static_cast<double>(k); }
  bool radial() const noexcept { return kind == DriverKind::RadialBM || kind == DriverKind::RadialRho; }

  /// Deterministic driver from explicit values (W.size() >= 2).
  static Driver from_values(Geometry geometry, double dt, std::vector<double> W);
};

struct SolverConfig {
  /// Minimal |W - V| for rho drivers, and the swallowing radius of forward_map.
  double singularity_floor = 1e-9;
  /// Height of the evaluation point above the driving value for the newest
  /// slit (radial: distance inside the circle). 0 selects the exact slit tip,
  /// which sits at height 2 sqrt(dt) (chordal).
  double offset = 0.0;
  /// Relative local error target of forward_map.
  double forward_tolerance = 1e-12;
  /// Cap on Euler-Heun substeps per driver step.
  std::size_t max_substeps = 1024;
};

struct TraceCurve {
  PolyCurve curve;                // points in R^2 = C
  double max_displacement = 0.0;  // largest distance between consecutive tips
  std::size_t swallowed = 0;      // tips lost to overflow or swallowing (0 on success)
};

/// W = w0 + sqrt(kappa) * B on the grid k * dt, k = 0..round(horizon/dt).
Driver drive_brownian(double kappa, double horizon, double dt, std::uint64_t seed, Geometry geometry);

/// dW = sqrt(kappa) dB + rho/(W - V) dt, dV = 2/(V - W) dt.
/// Throws UnsupportedParameter for rho <= -2 and InvalidArgument for w0 == v0.
Driver drive_sle_rho_chordal(double kappa, double rho, double w0, double v0, double horizon, double dt,
                             std::uint64_t seed, const SolverConfig& config = {});

/// dW = sqrt(kappa) dB + (rho/2) cot((W - V)/2) dt, dV = -cot((W - V)/2) dt,
/// gap kept in (0, 2 pi).
Driver drive_sle_rho_radial(double kappa, double rho, double w0, double v0, double horizon, double dt,
                            std::uint64_t seed, const SolverConfig& config = {});

TraceCurve chordal_trace(const Driver& driver, const SolverConfig& config = {});
TraceCurve radial_trace(const Driver& driver, const SolverConfig& config = {});

/// Tip at a single step, O(step) work.
std::complex<double> trace_tip(const Driver& driver, std::size_t step, const SolverConfig& config = {});

/// Radial SLE in the disk of radius cutoff_a from cutoff_a to 0, inverted by
/// z -> cutoff_a^2 / z. The image starts on the circle of radius cutoff_a and
/// runs to infinity; its hull has logarithmic capacity cutoff_a * e^t, so the
/// curve times are shifted to t - log(1/cutoff_a) (capacity 1 at time 0).
TraceCurve whole_plane_trace(double kappa, std::optional<double> rho, double cutoff_a, double horizon, double dt,
                             std::uint64_t seed, const SolverConfig& config = {});

/// Driver of whole_plane_trace (radial BM, or radial rho with force point at angle pi).
Driver whole_plane_driver(double kappa, std::optional<double> rho, double horizon, double dt, std::uint64_t seed,
                          const SolverConfig& config = {});

/// Maps a radial-disk point to whole-plane coordinates: z -> cutoff_a / z.
std::complex<double> whole_plane_image(std::complex<double> disk_point, double cutoff_a);

enum class ForwardStatus { Ok, Swallowed };

struct ForwardResult {
  std::complex<double> value;
  ForwardStatus status = ForwardStatus::Ok;
  double time = 0.0;  // time reached (the swallowing time when swallowed)
};

/// g_t(z) by adaptive Dormand-Prince integration across the driver steps.
/// Halts with Swallowed when |g - xi| < config.singularity_floor.
ForwardResult forward_map(const Driver& driver, std::complex<double> z, double t, const SolverConfig& config = {});

namespace reference {
/// Tip-by-tip composition (one point at a time, no vectorization or threading).
TraceCurve chordal_trace(const Driver& driver, const SolverConfig& config = {});
TraceCurve radial_trace(const Driver& driver, const SolverConfig& config = {});
}  // namespace reference

}  // namespace fractal_lab
