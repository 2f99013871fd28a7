#include "fractal_lab/loewner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fractal_lab/errors.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/rng.hpp"

namespace fractal_lab {

namespace {

using cplx = std::complex<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_step(double dt, const char* who) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument(std::string(who) + ": dt must be positive");
}

std::size_t step_count(double horizon, double dt, const char* who) {
  check_step(dt, who);
  if (!(horizon >= dt) || !std::isfinite(horizon)) throw InvalidArgument(std::string(who) + ": need dt <= horizon");
  const double n = std::round(horizon / dt);
  if (n > 1e9) throw CapacityError(std::string(who) + ": too many steps");
  return static_cast<std::size_t>(n);
}

std::vector<double> brownian_increments(std::size_t steps, double dt, std::uint64_t seed) {
  std::vector<double> dB(steps);
  fill_gaussian(dB, derive_stream(seed, {stream_tag::kDriver}), std::sqrt(dt));
  return dB;
}

// Inverse of the vertical-slit map z -> w + sqrt((z - w)^2 + 4 dt), branch
// with Im >= 0. Written without complex types or branches so the tiled
// kernel vectorizes and rounds exactly like the scalar reference.
inline void chordal_inverse(double& x, double& y, double w, double four_dt) {
  const double a0 = x - w;
  const double re = a0 * a0 - y * y - four_dt;
  const double im = 2.0 * a0 * y;
  const double m = std::sqrt(re * re + im * im);
  const double t = std::sqrt(0.5 * (m + std::fabs(re)));
  const double s = t > 0.0 ? std::fabs(im) / (2.0 * t) : 0.0;
  const double r = re >= 0.0 ? t : s;
  const double i = re >= 0.0 ? s : t;
  x = w + std::copysign(r, a0);
  y = i;
}

// K(z) = z / (1 + z)^2 maps the disk onto C minus [1/4, inf).
inline cplx koebe(cplx z) {
  const cplx d = 1.0 + z;
  return z / (d * d);
}

// Branch of K^{-1} landing in the unit disk.
inline cplx koebe_inverse(cplx u) {
  const cplx q = 1.0 - 2.0 * u;
  const cplx s = std::sqrt(1.0 - 4.0 * u);
  const cplx d1 = q + s, d2 = q - s;
  return 2.0 * u / (std::norm(d1) >= std::norm(d2) ? d1 : d2);
}

// Inverse radial slit map for one step at boundary point xi.
inline cplx radial_inverse(cplx w, cplx xi, double shrink) {
  return xi * koebe_inverse(shrink * koebe(w * std::conj(xi)));
}

double chordal_start_height(const Driver& d, const SolverConfig& c) {
  return c.offset > 0.0 ? c.offset : 2.0 * std::sqrt(d.dt);
}

double radial_start_radius(const Driver& d, const SolverConfig& c) {
  if (c.offset > 0.0) return 1.0 - c.offset;
  return koebe_inverse(cplx(std::exp(-d.dt) / 4.0, 0.0)).real();
}

void check_driver(const Driver& d, bool radial, const char* who) {
  check_step(d.dt, who);
  if (d.W.size() < 2) throw InvalidArgument(std::string(who) + ": driver needs at least one step");
  if (d.radial() != radial)
    throw InvalidArgument(std::string(who) + (radial ? ": driver is not radial" : ": driver is not chordal"));
  for (double w : d.W)
    if (!std::isfinite(w)) throw InvalidArgument(std::string(who) + ": driver has non-finite values");
}

void check_config(const SolverConfig& c) {
  if (!(c.singularity_floor > 0.0)) throw InvalidArgument("SolverConfig: singularity_floor must be positive");
  if (!(c.offset >= 0.0)) throw InvalidArgument("SolverConfig: offset must be nonnegative");
  if (!(c.forward_tolerance > 0.0)) throw InvalidArgument("SolverConfig: forward_tolerance must be positive");
  if (c.max_substeps < 1) throw InvalidArgument("SolverConfig: max_substeps must be >= 1");
}

TraceCurve assemble(const Driver& d, std::vector<double> xs, std::vector<double> ys) {
  const std::size_t n = xs.size();
  std::vector<double> coords(2 * n);
  std::vector<double> times(n);
  TraceCurve out;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(xs[k]) || !std::isfinite(ys[k])) throw SolverFailure("zipper composition overflowed", k);
    coords[2 * k] = xs[k];
    coords[2 * k + 1] = ys[k];
    times[k] = d.time(k);
    if (k > 0) out.max_displacement = std::max(out.max_displacement, std::hypot(xs[k] - xs[k - 1], ys[k] - ys[k - 1]));
  }
  out.curve = PolyCurve(PointSet(2, std::move(coords)), std::move(times));
  return out;
}

constexpr std::size_t kTile = 512;

}  // namespace

Driver Driver::from_values(Geometry geometry, double dt, std::vector<double> W) {
  check_step(dt, "Driver::from_values");
  if (W.size() < 2) throw InvalidArgument("Driver::from_values: need at least two values");
  for (double w : W)
    if (!std::isfinite(w)) throw InvalidArgument("Driver::from_values: values must be finite");
  Driver d;
  d.kind = geometry == Geometry::Chordal ? DriverKind::ChordalBM : DriverKind::RadialBM;
  d.dt = dt;
  d.W = std::move(W);
  return d;
}

Driver drive_brownian(double kappa, double horizon, double dt, std::uint64_t seed, Geometry geometry) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument("drive_brownian: kappa must be >= 0");
  const std::size_t steps = step_count(horizon, dt, "drive_brownian");
  Driver d;
  d.kind = geometry == Geometry::Chordal ? DriverKind::ChordalBM : DriverKind::RadialBM;
  d.kappa = kappa;
  d.dt = dt;
  d.seed = seed;
  const auto dB = brownian_increments(steps, dt, seed);
  const double sk = std::sqrt(kappa);
  d.W.assign(steps + 1, 0.0);
  double b = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    b += dB[k];
    d.W[k + 1] = sk * b;
  }
  return d;
}

namespace {

// Stochastic Heun on (W, V) with additive noise. `drift` returns the W and V
// drifts for a given gap W - V; `repair` enforces the gap constraint and
// reports whether it had to intervene.
template <class Drift, class Distance, class Repair>
Driver integrate_rho(DriverKind kind, double kappa, double rho, double w0, double v0, std::size_t steps, double dt,
                     std::uint64_t seed, const SolverConfig& config, Drift drift, Distance distance, Repair repair) {
  Driver d;
  d.kind = kind;
  d.kappa = kappa;
  d.rho = rho;
  d.dt = dt;
  d.seed = seed;
  d.W.resize(steps + 1);
  d.V.resize(steps + 1);
  d.W[0] = w0;
  d.V[0] = v0;
  const auto dB = brownian_increments(steps, dt, seed);
  const double sk = std::sqrt(kappa);
  double w = w0, v = v0;
  for (std::size_t k = 0; k < steps; ++k) {
    const auto [fw0, fv0] = drift(w - v);
    const double rate = std::fabs(fw0 - fv0);
    const double dist = distance(w - v);
    std::size_t m = 1;
    if (rate * dt > 0.1 * dist) {
      const double want = std::ceil(rate * dt / (0.1 * dist));
      m = want >= static_cast<double>(config.max_substeps) ? config.max_substeps : static_cast<std::size_t>(want);
    }
    const double h = dt / static_cast<double>(m);
    const double noise = sk * dB[k] / static_cast<double>(m);
    bool flagged = false;
    for (std::size_t s = 0; s < m; ++s) {
      const auto [aw, av] = drift(w - v);
      double pw = w + aw * h + noise, pv = v + av * h;
      flagged |= repair(pw, pv);
      const auto [bw, bv] = drift(pw - pv);
      w = w + 0.5 * (aw + bw) * h + noise;
      v = v + 0.5 * (av + bv) * h;
      flagged |= repair(w, v);
    }
    if (!std::isfinite(w) || !std::isfinite(v)) throw SolverFailure("SLE(rho) driver diverged", k + 1);
    d.W[k + 1] = w;
    d.V[k + 1] = v;
    if (flagged) d.flagged.push_back(k + 1);
  }
  return d;
}

void check_rho(double kappa, double rho, const SolverConfig& config, const char* who) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw InvalidArgument(std::string(who) + ": kappa must be >= 0");
  if (!std::isfinite(rho)) throw InvalidArgument(std::string(who) + ": rho must be finite");
  if (rho <= -2.0)
    throw UnsupportedParameter(std::string(who) +
                               ": rho <= -2 hits the force point; this discretization supports rho > -2 only");
  check_config(config);
}

}  // namespace

Driver drive_sle_rho_chordal(double kappa, double rho, double w0, double v0, double horizon, double dt,
                             std::uint64_t seed, const SolverConfig& config) {
  check_rho(kappa, rho, config, "drive_sle_rho_chordal");
  if (!std::isfinite(w0) || !std::isfinite(v0)) throw InvalidArgument("drive_sle_rho_chordal: w0, v0 must be finite");
  if (w0 == v0) throw InvalidArgument("drive_sle_rho_chordal: w0 must differ from v0");
  const std::size_t steps = step_count(horizon, dt, "drive_sle_rho_chordal");
  const double eps = config.singularity_floor;
  const double side = w0 > v0 ? 1.0 : -1.0;
  auto drift = [rho](double g) { return std::pair<double, double>{rho / g, -2.0 / g}; };
  auto distance = [](double g) { return std::fabs(g); };
  auto repair = [eps, side](double& w, double& v) {
    if (side * (w - v) >= eps) return false;
    v = w - side * eps;
    return true;
  };
  return integrate_rho(DriverKind::ChordalRho, kappa, rho, w0, v0, steps, dt, seed, config, drift, distance, repair);
}

Driver drive_sle_rho_radial(double kappa, double rho, double w0, double v0, double horizon, double dt,
                            std::uint64_t seed, const SolverConfig& config) {
  check_rho(kappa, rho, config, "drive_sle_rho_radial");
  if (!std::isfinite(w0) || !std::isfinite(v0)) throw InvalidArgument("drive_sle_rho_radial: w0, v0 must be finite");
  double gap0 = std::fmod(w0 - v0, kTwoPi);
  if (gap0 < 0.0) gap0 += kTwoPi;
  if (gap0 == 0.0) throw InvalidArgument("drive_sle_rho_radial: w0 and v0 must be distinct points of the circle");
  const std::size_t steps = step_count(horizon, dt, "drive_sle_rho_radial");
  const double eps = config.singularity_floor;
  auto drift = [rho](double g) {
    const double c = 1.0 / std::tan(0.5 * g);
    return std::pair<double, double>{0.5 * rho * c, -c};
  };
  auto distance = [](double g) { return std::min(g, kTwoPi - g); };
  auto repair = [eps](double& w, double& v) {
    const double g = w - v;
    if (g < eps) {
      v = w - eps;
      return true;
    }
    if (g > kTwoPi - eps) {
      v = w - (kTwoPi - eps);
      return true;
    }
    return false;
  };
  return integrate_rho(DriverKind::RadialRho, kappa, rho, w0, w0 - gap0, steps, dt, seed, config, drift, distance,
                       repair);
}

// Tiled zipper: tips [a, b) are started at their driving values and pushed
// through the slit maps m = b-1, ..., 1; map m only acts on tips n > m. Each
// tip sees exactly the sequence of operations of the scalar reference.
TraceCurve chordal_trace(const Driver& driver, const SolverConfig& config) {
  check_driver(driver, false, "chordal_trace");
  check_config(config);
  const std::size_t n = driver.W.size();
  const double four_dt = 4.0 * driver.dt;
  const double h0 = chordal_start_height(driver, config);
  std::vector<double> xs(n), ys(n);
  xs[0] = driver.W[0];
  ys[0] = 0.0;
  const auto tiles = static_cast<std::int64_t>((n - 1 + kTile - 1) / kTile);
  const double* W = driver.W.data();
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (std::int64_t t = 0; t < tiles; ++t) {
    const std::size_t a = 1 + static_cast<std::size_t>(t) * kTile;
    const std::size_t b = std::min(n, a + kTile);
    double* X = xs.data();
    double* Y = ys.data();
    for (std::size_t k = a; k < b; ++k) {
      X[k] = W[k];
      Y[k] = h0;
    }
    for (std::size_t m = b - 1; m >= 1; --m) {
      const double w = W[m];
      const std::size_t lo = std::max(a, m + 1);
#pragma omp simd
      for (std::size_t k = lo; k < b; ++k) chordal_inverse(X[k], Y[k], w, four_dt);
    }
  }
  return assemble(driver, std::move(xs), std::move(ys));
}

TraceCurve radial_trace(const Driver& driver, const SolverConfig& config) {
  check_driver(driver, true, "radial_trace");
  check_config(config);
  const std::size_t n = driver.W.size();
  const double shrink = std::exp(-driver.dt);
  const double r0 = radial_start_radius(driver, config);
  std::vector<cplx> xi(n);
  for (std::size_t k = 0; k < n; ++k) xi[k] = std::polar(1.0, driver.W[k]);
  std::vector<double> xs(n), ys(n);
  xs[0] = xi[0].real();
  ys[0] = xi[0].imag();
  const auto tiles = static_cast<std::int64_t>((n - 1 + kTile - 1) / kTile);
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count())
  for (std::int64_t t = 0; t < tiles; ++t) {
    const std::size_t a = 1 + static_cast<std::size_t>(t) * kTile;
    const std::size_t b = std::min(n, a + kTile);
    std::vector<cplx> z(b - a);
    for (std::size_t k = a; k < b; ++k) z[k - a] = r0 * xi[k];
    for (std::size_t m = b - 1; m >= 1; --m)
      for (std::size_t k = std::max(a, m + 1); k < b; ++k) z[k - a] = radial_inverse(z[k - a], xi[m], shrink);
    for (std::size_t k = a; k < b; ++k) {
      xs[k] = z[k - a].real();
      ys[k] = z[k - a].imag();
    }
  }
  return assemble(driver, std::move(xs), std::move(ys));
}

namespace reference {

TraceCurve chordal_trace(const Driver& driver, const SolverConfig& config) {
  check_driver(driver, false, "chordal_trace");
  check_config(config);
  const std::size_t n = driver.W.size();
  const double four_dt = 4.0 * driver.dt;
  const double h0 = chordal_start_height(driver, config);
  std::vector<double> xs(n), ys(n);
  xs[0] = driver.W[0];
  for (std::size_t k = 1; k < n; ++k) {
    double x = driver.W[k], y = h0;
    for (std::size_t m = k - 1; m >= 1; --m) chordal_inverse(x, y, driver.W[m], four_dt);
    xs[k] = x;
    ys[k] = y;
  }
  return assemble(driver, std::move(xs), std::move(ys));
}

TraceCurve radial_trace(const Driver& driver, const SolverConfig& config) {
  check_driver(driver, true, "radial_trace");
  check_config(config);
  const std::size_t n = driver.W.size();
  const double shrink = std::exp(-driver.dt);
  const double r0 = radial_start_radius(driver, config);
  std::vector<double> xs(n), ys(n);
  const cplx xi0 = std::polar(1.0, driver.W[0]);
  xs[0] = xi0.real();
  ys[0] = xi0.imag();
  for (std::size_t k = 1; k < n; ++k) {
    cplx z = r0 * std::polar(1.0, driver.W[k]);
    for (std::size_t m = k - 1; m >= 1; --m) z = radial_inverse(z, std::polar(1.0, driver.W[m]), shrink);
    xs[k] = z.real();
    ys[k] = z.imag();
  }
  return assemble(driver, std::move(xs), std::move(ys));
}

}  // namespace reference

std::complex<double> trace_tip(const Driver& driver, std::size_t step, const SolverConfig& config) {
  check_config(config);
  if (step >= driver.W.size()) throw InvalidArgument("trace_tip: step beyond the driver");
  check_driver(driver, driver.radial(), "trace_tip");
  if (driver.radial()) {
    if (step == 0) return std::polar(1.0, driver.W[0]);
    const double shrink = std::exp(-driver.dt);
    cplx z = radial_start_radius(driver, config) * std::polar(1.0, driver.W[step]);
    for (std::size_t m = step - 1; m >= 1; --m) z = radial_inverse(z, std::polar(1.0, driver.W[m]), shrink);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw SolverFailure("zipper composition overflowed", step);
    return z;
  }
  if (step == 0) return {driver.W[0], 0.0};
  double x = driver.W[step], y = chordal_start_height(driver, config);
  for (std::size_t m = step - 1; m >= 1; --m) chordal_inverse(x, y, driver.W[m], 4.0 * driver.dt);
  if (!std::isfinite(x) || !std::isfinite(y)) throw SolverFailure("zipper composition overflowed", step);
  return {x, y};
}

Driver whole_plane_driver(double kappa, std::optional<double> rho, double horizon, double dt, std::uint64_t seed,
                          const SolverConfig& config) {
  if (rho) return drive_sle_rho_radial(kappa, *rho, 0.0, std::numbers::pi, horizon, dt, seed, config);
  return drive_brownian(kappa, horizon, dt, seed, Geometry::Radial);
}

std::complex<double> whole_plane_image(std::complex<double> disk_point, double cutoff_a) {
  return cutoff_a / disk_point;
}

TraceCurve whole_plane_trace(double kappa, std::optional<double> rho, double cutoff_a, double horizon, double dt,
                             std::uint64_t seed, const SolverConfig& config) {
  if (!(cutoff_a > 0.0) || !(cutoff_a <= 0.25)) throw InvalidArgument("whole_plane_trace: need 0 < cutoff_a <= 1/4");
  const Driver d = whole_plane_driver(kappa, rho, horizon, dt, seed, config);
  TraceCurve disk = radial_trace(d, config);
  const auto& pts = disk.curve.points();
  const double shift = std::log(1.0 / cutoff_a);
  std::vector<double> coords(2 * pts.size());
  std::vector<double> times(pts.size());
  TraceCurve out;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const cplx w = whole_plane_image({pts[k][0], pts[k][1]}, cutoff_a);
    coords[2 * k] = w.real();
    coords[2 * k + 1] = w.imag();
    times[k] = d.time(k) - shift;
    if (k > 0)
      out.max_displacement = std::max(out.max_displacement, std::hypot(w.real() - coords[2 * k - 2], w.imag() - coords[2 * k - 1]));
  }
  out.curve = PolyCurve(PointSet(2, std::move(coords)), std::move(times));
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

struct Field {
  bool radial;
  cplx xi;  // chordal: (W, 0); radial: e^{iW}
  cplx operator()(cplx g) const {
    if (radial) return g * (xi + g) / (xi - g);
    return 2.0 / (g - xi);
  }
};

}  // namespace

ForwardResult forward_map(const Driver& driver, std::complex<double> z, double t, const SolverConfig& config) {
  check_driver(driver, driver.radial(), "forward_map");
  check_config(config);
  if (!(t >= 0.0) || t > driver.horizon() * (1.0 + 1e-12))
    throw InvalidArgument("forward_map: t must lie in [0, horizon]");
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw InvalidArgument("forward_map: z must be finite");
  if (driver.radial() ? !(std::abs(z) < 1.0) : !(z.imag() > 0.0))
    throw InvalidArgument("forward_map: z must lie in the domain");
  ForwardResult res{z, ForwardStatus::Ok, 0.0};
  if (t == 0.0) return res;
  const double tol = config.forward_tolerance;
  const double eps = config.singularity_floor;
  cplx g = z;
  double now = 0.0;
  double h = std::min(driver.dt, t) * 0.1;
  std::size_t evaluations = 0;
  const std::size_t steps = driver.steps();
  for (std::size_t k = 1; k <= steps && now < t; ++k) {
    const double end = std::min(t, driver.time(k));
    if (end <= now) continue;
    const Field f{driver.radial(), driver.radial() ? std::polar(1.0, driver.W[k]) : cplx(driver.W[k], 0.0)};
    cplx k1 = f(g);
    // The field is constant in time within a driver step, so the remaining
    // time is tracked directly; it can shrink far below ulp(end) when the
    // point runs into the tip at the end of the step.
    double left = end - now;
    while (left > 0.0) {
      if (h <= std::numeric_limits<double>::epsilon() * left) {
        // Step size collapsed before the interval end: the point is being swallowed.
        res.value = g;
        res.time = end - left;
        res.status = ForwardStatus::Swallowed;
        return res;
      }
      const double step = std::min(h, left);
      const cplx k2 = f(g + step * (a21 * k1));
      const cplx k3 = f(g + step * (a31 * k1 + a32 * k2));
      const cplx k4 = f(g + step * (a41 * k1 + a42 * k2 + a43 * k3));
      const cplx k5 = f(g + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const cplx k6 = f(g + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      const cplx next = g + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const cplx k7 = f(next);
      evaluations += 6;
      if (evaluations > 50'000'000) throw SolverFailure("forward_map: step budget exhausted", k);
      const cplx err = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double scale = tol * std::max({1.0, std::abs(g), std::abs(next)});
      const double ratio = std::abs(err) / scale;
      const bool ok = std::isfinite(ratio) && ratio <= 1.0 && std::isfinite(next.real()) && std::isfinite(next.imag());
      if (ok) {
        left = (step == left) ? 0.0 : left - step;
        g = next;
        k1 = k7;
        if (std::abs(g - f.xi) < eps) {
          res.value = g;
          res.time = end - left;
          res.status = ForwardStatus::Swallowed;
          return res;
        }
      }
      const double factor = std::isfinite(ratio) ? 0.9 * std::pow(std::max(ratio, 1e-10), -0.2) : 0.1;
      h = step * std::clamp(factor, 0.1, 5.0);
    }
    now = end;
  }
  res.value = g;
  res.time = t;
  return res;
}

}  // namespace fractal_lab
