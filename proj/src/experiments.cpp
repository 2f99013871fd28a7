// Registered experiments. Each body derives every random stream from the
// master seed and a replicate index, so artifacts do not depend on the
// number of threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "fractal_lab/brownian.hpp"
#include "fractal_lab/errors.hpp"
#include "fractal_lab/harness.hpp"
#include "fractal_lab/io.hpp"
#include "fractal_lab/loewner.hpp"
#include "fractal_lab/loopsoup.hpp"
#include "fractal_lab/parallel.hpp"
#include "fractal_lab/percolation.hpp"
#include "fractal_lab/rng.hpp"
#include "fractal_lab/stats.hpp"

namespace fractal_lab {

namespace {

using cplx = std::complex<double>;

// Experiment stream tags.
constexpr std::uint64_t kLemma31 = 0x101, kBmTurning = 0x102, kSleTurning = 0x103, kSleTrace = 0x104,
                        kSleSimple = 0x105, kSleValidate = 0x106, kPercDim = 0x107, kPercCounts = 0x108,
                        kPercPerfect = 0x109, kPercSurvival = 0x10a, kCle = 0x10b, kCleDispersion = 0x10c;

std::string f(double v) { return format_double(v); }
std::string u(std::size_t v) { return std::to_string(v); }

std::string join(std::initializer_list<std::string> cells) {
  std::string out;
  for (const auto& c : cells) out += (out.empty() ? "" : ",") + c;
  return out + '\n';
}

ConfigField integer(std::string key, long long def, long long lo, long long hi, std::string help) {
  return {std::move(key), FieldKind::Int, std::to_string(def), std::move(help), static_cast<double>(lo), static_cast<double>(hi), {}};
}

ConfigField real(std::string key, std::string def, double lo, double hi, std::string help) {
  return {std::move(key), FieldKind::Real, std::move(def), std::move(help), lo, hi, {}};
}

bool strictly_increasing(const std::vector<double>& xs) {
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (!(xs[k] > xs[k - 1])) return false;
  return true;
}

std::vector<double> scale_ladder(int finest) {
  std::vector<double> s;
  for (int k = 1; k <= finest; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

// ---------------------------------------------------------------- Brownian

void run_lemma31(const Config& cfg, RunContext& ctx) {
  const auto dims = cfg.integers("dims");
  const double a = cfg.real("a");
  const int level = static_cast<int>(cfg.integer("level"));
  const int depth = static_cast<int>(cfg.integer("depth"));
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  if (level >= depth) throw ConfigError("field 'level': must be below depth");
  struct Row {
    std::size_t index;
    double increment, excursion, trace_ratio, graph_ratio;
  };
  std::string csv = "dims,replicate,level,index,increment_norm,max_excursion,trace_ratio,graph_ratio\n";
  bool fraction_ok = true, trace_ok = true, graph_ok = true;
  for (long long d : dims) {
    const auto rows = parallel_map<std::vector<Row>>(seeds, [&](std::size_t r) {
      const auto path = sample_bm(static_cast<int>(d), depth, 1.0,
                                  derive_stream(ctx.master_seed(), {kLemma31, static_cast<std::uint64_t>(d), r}));
      const auto hits = dyadic_event_scan(path, a, level);
      std::vector<Row> out;
      if (hits.empty()) return out;
      const PolyCurve trace = trace_curve(path);
      const PolyCurve graph = graph_curve(path);
      const std::size_t stride = std::size_t{1} << (depth - level);
      for (const auto& h : hits) {
        const std::size_t i0 = h.index * stride, i1 = i0 + stride;
        out.push_back({h.index, h.increment_norm, h.max_excursion, witness_ratio(trace, i0, i1), witness_ratio(graph, i0, i1)});
      }
      return out;
    });
    std::size_t with_hit = 0, hits = 0;
    double min_trace = INFINITY, min_graph = INFINITY;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      with_hit += !rows[r].empty();
      for (const auto& h : rows[r]) {
        ++hits;
        min_trace = std::min(min_trace, h.trace_ratio);
        min_graph = std::min(min_graph, h.graph_ratio);
        csv += join({std::to_string(d), u(r), std::to_string(level), u(h.index), f(h.increment), f(h.excursion),
                     f(h.trace_ratio), f(h.graph_ratio)});
      }
    }
    const double frac = static_cast<double>(with_hit) / static_cast<double>(seeds);
    const std::string sfx = "_dim" + std::to_string(d);
    ctx.metric("hit_fraction" + sfx, frac);
    ctx.metric("hits" + sfx, static_cast<double>(hits));
    if (hits) {
      ctx.metric("min_trace_ratio" + sfx, min_trace);
      ctx.metric("min_graph_ratio" + sfx, min_graph);
    }
    fraction_ok &= frac >= cfg.real("min_hit_fraction");
    trace_ok &= !hits || min_trace >= a / 2.0;
    graph_ok &= !hits || min_graph >= a / 3.0;
  }
  ctx.artifact("lemma31_hits.csv", csv);
  ctx.verdict("hit_fraction", fraction_ok);
  ctx.verdict("trace_ratio_bound", trace_ok);
  ctx.verdict("graph_ratio_bound", graph_ok);
}

// Median turning profile over replicates; rows go to `csv`.
std::vector<double> median_profile(std::size_t seeds, int levels, const std::string& label, std::string& csv,
                                   const std::function<PolyCurve(std::size_t)>& make) {
  const auto profiles = parallel_map<std::vector<TurningReport>>(
      seeds, [&](std::size_t r) { return turning_profile(make(r), levels); });
  std::vector<double> med;
  for (int k = 0; k < levels; ++k) {
    std::vector<double> col;
    for (std::size_t r = 0; r < seeds; ++r) {
      const auto& rep = profiles[r][static_cast<std::size_t>(k)];
      const double c = rep.infinite() ? INFINITY : rep.constant;
      col.push_back(c);
      csv += join({label, u(r), std::to_string(k + 1), u(rep.stride), f(c)});
    }
    med.push_back(median(col));
  }
  return med;
}

void run_bm_turning(const Config& cfg, RunContext& ctx) {
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  const int depth = static_cast<int>(cfg.integer("depth"));
  const int levels = static_cast<int>(cfg.integer("levels"));
  const int trace_dims = static_cast<int>(cfg.integer("trace_dims"));
  const int graph_dims = static_cast<int>(cfg.integer("graph_dims"));
  std::string csv = "curve,replicate,level,stride,constant\n";
  const auto trace = median_profile(seeds, levels, "trace", csv, [&](std::size_t r) {
    return trace_curve(sample_bm(trace_dims, depth, 1.0, derive_stream(ctx.master_seed(), {kBmTurning, 0, r})));
  });
  const auto graph = median_profile(seeds, levels, "graph", csv, [&](std::size_t r) {
    return graph_curve(sample_bm(graph_dims, depth, 1.0, derive_stream(ctx.master_seed(), {kBmTurning, 1, r})));
  });
  for (int k = 0; k < levels; ++k) {
    ctx.metric("trace_median_level" + std::to_string(k + 1), trace[static_cast<std::size_t>(k)]);
    ctx.metric("graph_median_level" + std::to_string(k + 1), graph[static_cast<std::size_t>(k)]);
  }
  ctx.artifact("turning_profile.csv", csv);
  ctx.verdict("trace_profile_increasing", strictly_increasing(trace));
  ctx.verdict("graph_profile_increasing", strictly_increasing(graph));
}

// -------------------------------------------------------------------- SLE

void run_sle_turning(const Config& cfg, RunContext& ctx) {
  const double kappa = cfg.real("kappa"), dt = cfg.real("dt"), horizon = cfg.real("horizon");
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  const int levels = static_cast<int>(cfg.integer("levels"));
  std::string csv = "curve,replicate,level,stride,constant\n";
  const auto med = median_profile(seeds, levels, "sle", csv, [&](std::size_t r) {
    return chordal_trace(drive_brownian(kappa, horizon, dt, derive_stream(ctx.master_seed(), {kSleTurning, r}),
                                        Geometry::Chordal))
        .curve;
  });
  for (int k = 0; k < levels; ++k) ctx.metric("median_level" + std::to_string(k + 1), med[static_cast<std::size_t>(k)]);
  const Driver d0 = drive_brownian(kappa, horizon, dt, derive_stream(ctx.master_seed(), {kSleTurning, 0}), Geometry::Chordal);
  ctx.artifact("driver_0.csv", driver_csv(d0));
  ctx.artifact("trace_0.csv", curve_csv(chordal_trace(d0).curve));
  ctx.artifact("turning_profile.csv", csv);
  ctx.verdict("profile_increasing", strictly_increasing(med));
}

void run_sle_trace(const Config& cfg, RunContext& ctx) {
  const double kappa = cfg.real("kappa"), dt = cfg.real("dt"), horizon = cfg.real("horizon");
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  const auto scales = scale_ladder(static_cast<int>(cfg.integer("finest_scale_exp")));
  struct Fit {
    ScalingFit fit;
    double resolution;
  };
  const auto fits = parallel_map<Fit>(seeds, [&](std::size_t r) {
    const auto tr = chordal_trace(
        drive_brownian(kappa, horizon, dt, derive_stream(ctx.master_seed(), {kSleTrace, r}), Geometry::Chordal));
    const auto& p = tr.curve.points();
    // Resolution: 99th percentile of the step lengths.
    std::vector<double> steps(p.size() - 1);
    for (std::size_t k = 1; k < p.size(); ++k) steps[k - 1] = distance(p[k], p[k - 1]);
    const auto q = steps.begin() + static_cast<std::ptrdiff_t>(steps.size() * 99 / 100);
    std::nth_element(steps.begin(), q, steps.end());
    BoxCountOptions opt;
    opt.resolution = *q;
    return Fit{box_counting_dimension(p, scales, opt), *q};
  });
  std::string csv = "replicate,slope,r_squared,resolution\n";
  std::vector<double> slopes;
  for (std::size_t r = 0; r < seeds; ++r) {
    slopes.push_back(fits[r].fit.slope);
    csv += join({u(r), f(fits[r].fit.slope), f(fits[r].fit.r_squared), f(fits[r].resolution)});
  }
  std::string counts = "scale,count,used\n";
  for (std::size_t k = 0; k < fits[0].fit.scales.size(); ++k)
    counts += join({f(fits[0].fit.scales[k]), std::to_string(fits[0].fit.counts[k]), fits[0].fit.used[k] ? "1" : "0"});
  const double avg = mean(slopes);
  const double reference = 1.0 + kappa / 8.0;
  ctx.metric("dimension_mean", avg);
  ctx.metric("dimension_reference", reference);

  // Simplicity at desk scale.
  const auto simple_seeds = static_cast<std::size_t>(cfg.integer("simple_seeds"));
  const double simple_dt = cfg.real("simple_dt"), resolution = cfg.real("simple_resolution");
  const auto crossings = parallel_map<std::size_t>(simple_seeds, [&](std::size_t r) {
    const auto tr = chordal_trace(drive_brownian(kappa, horizon, simple_dt,
                                                 derive_stream(ctx.master_seed(), {kSleSimple, r}), Geometry::Chordal));
    return polyline_self_crossings(tr.curve.points(), resolution);
  });
  std::string scsv = "replicate,self_crossings\n";
  std::size_t simple = 0;
  for (std::size_t r = 0; r < simple_seeds; ++r) {
    simple += crossings[r] == 0;
    scsv += join({u(r), u(crossings[r])});
  }
  const double simple_frac = static_cast<double>(simple) / static_cast<double>(simple_seeds);
  ctx.metric("simple_fraction", simple_frac);

  ctx.artifact("dimension.csv", csv);
  ctx.artifact("boxcount_0.csv", counts);
  ctx.artifact("self_crossings.csv", scsv);
  ctx.verdict("dimension", std::fabs(avg - reference) <= cfg.real("dimension_tolerance"));
  ctx.verdict("simple_fraction", simple_frac >= cfg.real("min_simple_fraction"));
}

// Classical RK4 with many substeps per driver step; independent of the
// Heun driver integrator.
template <class Rhs>
std::vector<double> refined_gap(double g0, double horizon, double dt, int refine, Rhs rhs) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<double> out{g0};
  const double h = dt / refine;
  double g = g0;
  for (std::size_t k = 0; k < steps; ++k) {
    for (int s = 0; s < refine; ++s) {
      const double k1 = rhs(g), k2 = rhs(g + 0.5 * h * k1), k3 = rhs(g + 0.5 * h * k2), k4 = rhs(g + h * k3);
      g += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(g);
  }
  return out;
}

void run_sle_validate(const Config& cfg, RunContext& ctx) {
  const double tol_zero = cfg.real("zero_tolerance"), tol_fwd = cfg.real("forward_tolerance");
  std::string csv = "check,value,bound\n";

  // Zero driver: tip 2i sqrt(t).
  const double dt0 = cfg.real("zero_dt");
  const auto n0 = static_cast<std::size_t>(std::llround(1.0 / dt0));
  const Driver zero = Driver::from_values(Geometry::Chordal, dt0, std::vector<double>(n0 + 1, 0.0));
  const auto zt = chordal_trace(zero);
  double zero_err = 0.0;
  for (std::size_t k = 0; k < zt.curve.size(); ++k) {
    const auto p = zt.curve.points()[k];
    zero_err = std::max(zero_err, std::hypot(p[0], p[1] - 2.0 * std::sqrt(zero.time(k))));
  }
  csv += join({"zero_driver_trace", f(zero_err), f(tol_zero)});
  ctx.metric("zero_driver_error", zero_err);

  // Forward map against sqrt(z^2 + 4t) at z = 2i, t = 1.
  const cplx z(0.0, 2.0);
  const auto fw = forward_map(zero, z, 1.0);
  const cplx exact = std::sqrt(z * z + 4.0);
  const double fwd_abs = std::abs(fw.value - exact);
  const double fwd_rel = fwd_abs / std::abs(exact);
  csv += join({"forward_relative_error", f(fwd_rel), f(tol_fwd)});
  ctx.metric("forward_abs_error", fwd_abs);
  ctx.metric("forward_relative_error", std::isfinite(fwd_rel) ? fwd_rel : 1e308);
  ctx.metric("forward_exact_modulus", std::abs(exact));

  // Hydrodynamic normalization at |z| = 1e3 under a Brownian driver.
  const Driver bm = drive_brownian(cfg.real("hydro_kappa"), 1.0, cfg.real("driver_dt"),
                                   derive_stream(ctx.master_seed(), {kSleValidate, 0}), Geometry::Chordal);
  double hydro = 0.0;
  const double big = 1e3;
  for (int k = 0; k < 8; ++k) {
    const cplx zb = std::polar(big, (k + 0.5) * std::numbers::pi / 8.0);
    const auto g = forward_map(bm, zb, 1.0);
    hydro = std::max(hydro, std::abs(g.value - zb - 2.0 / zb) * big * big);
  }
  csv += join({"hydrodynamic_residual_scaled", f(hydro), "10"});
  ctx.metric("hydrodynamic_residual_scaled", hydro);

  // rho = 0 against plain drivers, independent seeds.
  const auto ks_seeds = static_cast<std::size_t>(cfg.integer("ks_seeds"));
  const double kappa = cfg.real("kappa"), ddt = cfg.real("driver_dt");
  auto terminal = [&](std::uint64_t branch, auto make) {
    return parallel_map<double>(ks_seeds, [&](std::size_t r) {
      const Driver d = make(derive_stream(ctx.master_seed(), {kSleValidate, branch, r}));
      return d.W.back();
    });
  };
  const auto chordal_rho = terminal(1, [&](std::uint64_t s) { return drive_sle_rho_chordal(kappa, 0.0, 0.0, -1.0, 1.0, ddt, s); });
  const auto chordal_bm = terminal(2, [&](std::uint64_t s) { return drive_brownian(kappa, 1.0, ddt, s, Geometry::Chordal); });
  const auto radial_rho = terminal(3, [&](std::uint64_t s) { return drive_sle_rho_radial(kappa, 0.0, 0.0, std::numbers::pi, 1.0, ddt, s); });
  const auto radial_bm = terminal(4, [&](std::uint64_t s) { return drive_brownian(kappa, 1.0, ddt, s, Geometry::Radial); });
  const auto ks_c = ks_two_sample(chordal_rho, chordal_bm, 0.01);
  const auto ks_r = ks_two_sample(radial_rho, radial_bm, 0.01);
  csv += join({"ks_chordal", f(ks_c.statistic), f(ks_c.critical)});
  csv += join({"ks_radial", f(ks_r.statistic), f(ks_r.critical)});
  ctx.metric("ks_chordal", ks_c.statistic);
  ctx.metric("ks_radial", ks_r.statistic);
  ctx.metric("ks_critical", ks_c.critical);

  // kappa = 0: the gap W - V follows a deterministic ODE.
  const double rho = cfg.real("rho"), gdt = cfg.real("gap_dt"), tol_gap = cfg.real("gap_tolerance");
  const Driver dc = drive_sle_rho_chordal(0.0, rho, 1.0, 0.0, 1.0, gdt, 1);
  const auto rc = refined_gap(1.0, 1.0, gdt, 64, [rho](double g) { return (rho + 2.0) / g; });
  const Driver dr = drive_sle_rho_radial(0.0, rho, 1.0, 0.0, 1.0, gdt, 1);
  const auto rr = refined_gap(1.0, 1.0, gdt, 64, [rho](double g) { return (0.5 * rho + 1.0) / std::tan(0.5 * g); });
  double gap_c = 0.0, gap_r = 0.0;
  for (std::size_t k = 0; k < dc.W.size(); ++k) gap_c = std::max(gap_c, std::fabs(dc.W[k] - dc.V[k] - rc[k]));
  for (std::size_t k = 0; k < dr.W.size(); ++k) gap_r = std::max(gap_r, std::fabs(dr.W[k] - dr.V[k] - rr[k]));
  csv += join({"gap_chordal", f(gap_c), f(tol_gap)});
  csv += join({"gap_radial", f(gap_r), f(tol_gap)});
  ctx.metric("gap_error_chordal", gap_c);
  ctx.metric("gap_error_radial", gap_r);

  ctx.artifact("checks.csv", csv);
  ctx.verdict("zero_driver", zero_err <= tol_zero);
  ctx.verdict("forward_closed_form", fwd_rel <= tol_fwd);
  ctx.verdict("hydrodynamic", hydro <= 10.0);
  ctx.verdict("rho0_chordal_ks", !ks_c.reject);
  ctx.verdict("rho0_radial_ks", !ks_r.reject);
  ctx.verdict("kappa0_chordal_gap", gap_c <= tol_gap);
  ctx.verdict("kappa0_radial_gap", gap_r <= tol_gap);
}

// ------------------------------------------------------------ percolation

void run_perc_dim(const Config& cfg, RunContext& ctx) {
  const int n = static_cast<int>(cfg.integer("n")), l = static_cast<int>(cfg.integer("l"));
  const int depth = static_cast<int>(cfg.integer("depth"));
  const double p = cfg.real("p");

  // First surviving replicate.
  PercTree tree;
  std::size_t replicate = 0;
  for (;; ++replicate) {
    if (replicate == 1000) throw DegenerateCutoff("perc-dim: no surviving tree in 1000 replicates");
    tree = sample_percolation(n, l, p, depth, derive_stream(ctx.master_seed(), {kPercDim, replicate}));
    if (tree.survived()) break;
  }
  const auto check = dimension_check(tree);
  ctx.metric("dim_estimate", check.fit.slope);
  ctx.metric("dim_reference", check.reference);
  ctx.metric("dim_replicate", static_cast<double>(replicate));
  std::string counts = "level,count,scale,used\n";
  for (std::size_t k = 0; k < check.fit.scales.size(); ++k)
    counts += join({u(k), std::to_string(check.fit.counts[k]), f(check.fit.scales[k]), check.fit.used[k] ? "1" : "0"});
  ctx.artifact("level_counts.csv", counts);
  ctx.artifact("deepest_level.pgm", pgm_bytes(percolation_raster(tree), PgmFormat::Binary));

  // Mean level counts against (p l^n)^k.
  const auto seeds = static_cast<std::size_t>(cfg.integer("count_seeds"));
  const int cdepth = static_cast<int>(cfg.integer("count_depth"));
  const auto per_seed = parallel_map<std::vector<double>>(seeds, [&](std::size_t r) {
    const auto t = sample_percolation(n, l, p, cdepth, derive_stream(ctx.master_seed(), {kPercCounts, r}));
    std::vector<double> c;
    for (int k = 0; k <= cdepth; ++k) c.push_back(static_cast<double>(t.count(k)));
    return c;
  });
  bool counts_ok = true;
  std::string mc = "level,mean,expected,standard_error\n";
  for (int k = 1; k <= cdepth; ++k) {
    std::vector<double> col;
    for (const auto& c : per_seed) col.push_back(c[static_cast<std::size_t>(k)]);
    const double m = mean(col), se = std::sqrt(sample_variance(col) / static_cast<double>(seeds));
    const double expected = std::pow(p * std::pow(l, n), k);
    counts_ok &= std::fabs(m - expected) <= 3.0 * se;
    mc += join({std::to_string(k), f(m), f(expected), f(se)});
  }
  ctx.artifact("mean_counts.csv", mc);

  // Perfectness trend (reported only).
  const auto perf_seeds = static_cast<std::size_t>(cfg.integer("perf_seeds"));
  const double perf_p = cfg.real("perf_p");
  std::string pc = "depth,median_perfectness_min_gap,median_disconnectedness_modulus,surviving\n";
  for (long long pd : cfg.integers("perf_depths")) {
    const auto stats = parallel_map<std::vector<double>>(perf_seeds, [&](std::size_t r) {
      const auto t = sample_percolation(n, l, perf_p, static_cast<int>(pd),
                                        derive_stream(ctx.master_seed(), {kPercPerfect, r}));
      if (!t.survived()) return std::vector<double>{};
      const auto s = disconnection_stats(t);
      return std::vector<double>{s.perfectness_min_gap, s.disconnectedness_modulus};
    });
    std::vector<double> gaps, mods;
    for (const auto& s : stats)
      if (!s.empty()) {
        gaps.push_back(s[0]);
        mods.push_back(s[1]);
      }
    if (gaps.empty()) continue;
    ctx.metric("perfectness_median_depth" + std::to_string(pd), median(gaps));
    ctx.metric("disconnectedness_median_depth" + std::to_string(pd), median(mods));
    pc += join({std::to_string(pd), f(median(gaps)), f(median(mods)), u(gaps.size())});
  }
  ctx.artifact("perfectness.csv", pc);

  ctx.verdict("dimension", std::fabs(check.fit.slope - check.reference) <= cfg.real("dimension_tolerance"));
  ctx.verdict("mean_counts", counts_ok);
}

// P(survive to depth) for Binomial(l^n, p) offspring, by iterating the
// generating function.
double branching_survival(int n, int l, double p, int depth) {
  const double m = std::pow(l, n);
  double q = 0.0;
  for (int k = 0; k < depth; ++k) q = std::pow(1.0 - p + p * q, m);
  return 1.0 - q;
}

void run_perc_survival(const Config& cfg, RunContext& ctx) {
  const int n = static_cast<int>(cfg.integer("n")), l = static_cast<int>(cfg.integer("l"));
  const int depth = static_cast<int>(cfg.integer("depth"));
  const auto reps = static_cast<std::size_t>(cfg.integer("replicates"));
  const double pc = std::pow(static_cast<double>(l), -n);
  const std::uint64_t key = derive_stream(ctx.master_seed(), {kPercSurvival});
  const auto crit = survival_probability(n, l, pc, depth, reps, key);
  ctx.metric("critical_p", pc);
  ctx.metric("critical_survival", crit.estimate);
  ctx.metric("critical_survival_radius", crit.radius);
  ctx.metric("critical_survival_exact", branching_survival(n, l, pc, depth));

  std::string csv = "p,estimate,radius,exact_at_depth,infinite_limit\n";
  csv += join({f(pc), f(crit.estimate), f(crit.radius), f(branching_survival(n, l, pc, depth)), "0"});
  bool fixed_ok = true, monotone = true;
  double prev = -1.0;
  for (double p : cfg.reals("p_scan")) {
    // Same key for every p: the trees are nested, so the estimates are ordered.
    const auto est = survival_probability(n, l, p, depth, reps, key);
    const double at_depth = branching_survival(n, l, p, depth);
    const double limit = branching_survival(n, l, p, 4096);
    fixed_ok &= std::fabs(est.estimate - at_depth) <= std::max(est.radius, 3.0 / static_cast<double>(reps));
    monotone &= est.estimate >= prev;
    prev = est.estimate;
    csv += join({f(p), f(est.estimate), f(est.radius), f(at_depth), f(limit)});
  }
  ctx.artifact("survival.csv", csv);
  ctx.verdict("critical_survival", crit.estimate <= cfg.real("max_critical_survival"));
  ctx.verdict("branching_match", fixed_ok);
  ctx.verdict("monotone_in_p", monotone);
}

// ------------------------------------------------------------------- CLE

SoupConfig soup_config(const Config& cfg) {
  SoupConfig c;
  c.domain = cfg.text("domain") == "disk" ? SoupDomain::UnitDisk : SoupDomain::UnitSquare;
  c.kappa = cfg.real("kappa");
  c.t_min = cfg.real("t_min");
  c.t_max = cfg.real("t_max");
  c.diam_min = cfg.real("diam_min");
  c.mesh = 1.0 / static_cast<double>(cfg.integer("mesh_inverse"));
  if (!(c.t_min < c.t_max)) throw ConfigError("field 't_min': must be below t_max");
  soup_intensity(c);
  return c;
}

std::vector<ConfigField> soup_fields() {
  return {
      {"domain", FieldKind::Choice, "square", "soup domain", 0, 0, {"square", "disk"}},
      real("kappa", "4", 8.0 / 3.0 + 1e-9, 4.0, "CLE parameter in (8/3, 4]"),
      real("t_min", "1e-4", 1e-7, 1.0, "shortest loop duration"),
      real("t_max", "0.25", 1e-6, 16.0, "longest loop duration"),
      real("diam_min", "0.02", 0.0, 4.0, "smallest loop diameter kept"),
      integer("mesh_inverse", 1024, 16, 8192, "raster cells per unit length"),
  };
}

struct SoupRun {
  LoopSet loops;
  ClusterSet boundaries;
};

SoupRun soup_pipeline(const SoupConfig& c) {
  SoupRun run;
  run.loops = sample_soup(c);
  run.boundaries = outermost_boundaries(cluster_soup(run.loops, c.mesh), run.loops, c.mesh);
  return run;
}

void run_cle_carpet(const Config& cfg, RunContext& ctx) {
  const SoupConfig base = soup_config(cfg);
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  const double eps = cfg.real("eps_density"), eps_diam = cfg.real("eps_diam");
  struct Stat {
    WhyburnReport why;
    double area = 0.0, dim = 0.0;
    std::size_t loops = 0;
  };
  const auto stats = parallel_map<Stat>(seeds, [&](std::size_t r) {
    SoupConfig c = base;
    c.seed = derive_stream(ctx.master_seed(), {kCle, r});
    const auto run = soup_pipeline(c);
    const auto mask = carpet_mask(run.boundaries, c.domain, c.mesh);
    Stat s;
    s.why = whyburn_check(mask, run.boundaries, eps, eps_diam);
    s.area = mask.area_fraction();
    s.dim = carpet_dimension(mask).slope;
    s.loops = run.loops.loops.size();
    if (r == 0) {
      ctx.artifact("boundaries_0.csv", polylines_csv(run.boundaries.boundaries));
      ctx.artifact("carpet_0.pgm", pgm_bytes(GrayImage{mask.grid.width, mask.grid.height, [&] {
                                                 std::vector<std::uint8_t> px(mask.carpet.size());
                                                 for (std::size_t j = 0; j < mask.grid.height; ++j)
                                                   for (std::size_t i = 0; i < mask.grid.width; ++i)
                                                     px[(mask.grid.height - 1 - j) * mask.grid.width + i] =
                                                         mask.carpet[j * mask.grid.width + i] ? 255 : 0;
                                                 return px;
                                               }()},
                                               PgmFormat::Binary));
      if (cfg.flag("export_loops")) {
        std::vector<std::vector<double>> polys;
        for (const auto& l : run.loops.loops) polys.push_back(l.values);
        ctx.artifact("loops_0.csv", polylines_csv(polys));
      }
    }
    return s;
  });
  std::size_t disjoint = 0, dense = 0;
  std::vector<double> dims;
  Json why = Json::array();
  for (std::size_t r = 0; r < seeds; ++r) {
    const auto& s = stats[r];
    disjoint += s.why.disjoint;
    dense += s.why.density_fraction >= cfg.real("min_density");
    dims.push_back(s.dim);
    why.push_back({{"replicate", r},
                   {"loops", s.loops},
                   {"boundaries", s.why.boundary_count},
                   {"disjoint", s.why.disjoint},
                   {"min_boundary_distance", s.why.min_boundary_distance},
                   {"large_boundaries", s.why.large_count},
                   {"density_fraction", s.why.density_fraction},
                   {"carpet_area_fraction", s.area},
                   {"carpet_dimension", s.dim}});
  }
  ctx.artifact("whyburn.json", why.dump(2) + "\n");
  const double disjoint_frac = static_cast<double>(disjoint) / static_cast<double>(seeds);
  const double dense_frac = static_cast<double>(dense) / static_cast<double>(seeds);
  const double dim = mean(dims);
  ctx.metric("disjoint_fraction", disjoint_frac);
  ctx.metric("dense_fraction", dense_frac);
  ctx.metric("carpet_dimension_mean", dim);
  ctx.metric("carpet_dimension_reference", 2.0 - (3.0 * base.kappa - 8.0) * (8.0 - base.kappa) / (32.0 * base.kappa));

  // Loop counts: Poisson dispersion.
  const auto dseeds = static_cast<std::size_t>(cfg.integer("dispersion_seeds"));
  const auto counts = parallel_map<double>(dseeds, [&](std::size_t r) {
    SoupConfig c = base;
    c.seed = derive_stream(ctx.master_seed(), {kCleDispersion, r});
    return static_cast<double>(sample_soup(c).loops.size());
  });
  const double dispersion = sample_variance(counts) / mean(counts);
  ctx.metric("count_mean", mean(counts));
  ctx.metric("count_dispersion", dispersion);

  // Intensity relation.
  const double c4 = intensity_for_kappa(4.0);
  bool monotone = true;
  double prev = -INFINITY;
  std::string ic = "kappa,c\n";
  for (int k = 1; k <= 64; ++k) {
    const double kappa = 8.0 / 3.0 + (4.0 - 8.0 / 3.0) * k / 64.0;
    const double c = intensity_for_kappa(kappa);
    monotone &= c > prev;
    prev = c;
    ic += join({f(kappa), f(c)});
  }
  ctx.artifact("intensity.csv", ic);
  ctx.metric("c_at_4", c4);

  ctx.verdict("disjoint_all", disjoint == seeds);
  ctx.verdict("density", dense_frac >= cfg.real("min_dense_fraction"));
  ctx.verdict("dimension_band", dim >= cfg.real("dimension_low") && dim <= cfg.real("dimension_high"));
  ctx.verdict("dispersion", dispersion >= 0.8 && dispersion <= 1.2);
  ctx.verdict("c_at_4", c4 == 1.0);
  ctx.verdict("c_monotone", monotone);
}

void run_cle_turning(const Config& cfg, RunContext& ctx) {
  const SoupConfig base = soup_config(cfg);
  const auto seeds = static_cast<std::size_t>(cfg.integer("seeds"));
  const int levels = static_cast<int>(cfg.integer("levels"));
  struct Top {
    std::vector<BoundaryTurning> all;
    std::size_t best = 0;
  };
  const auto tops = parallel_map<Top>(seeds, [&](std::size_t r) {
    SoupConfig c = base;
    c.seed = derive_stream(ctx.master_seed(), {kCle, r});
    Top t;
    t.all = boundary_turning_stats(soup_pipeline(c).boundaries, levels);
    for (std::size_t k = 1; k < t.all.size(); ++k)
      if (t.all[k].max_constant > t.all[t.best].max_constant) t.best = k;
    return t;
  });
  std::string csv = "replicate,boundary,vertices,level,constant,circle_baseline\n";
  std::vector<double> maxima, baselines;
  for (std::size_t r = 0; r < seeds; ++r) {
    const auto& t = tops[r];
    for (std::size_t b = 0; b < t.all.size(); ++b)
      for (std::size_t k = 0; k < t.all[b].profile.size(); ++k)
        csv += join({u(r), u(b), u(t.all[b].vertices), u(k + 1), f(t.all[b].profile[k]), f(t.all[b].circle_baseline)});
    maxima.push_back(t.all[t.best].max_constant);
    baselines.push_back(t.all[t.best].circle_baseline);
  }
  ctx.artifact("boundary_turning.csv", csv);
  const double med = median(maxima), base_med = median(baselines);
  ctx.metric("median_max_constant", med);
  ctx.metric("median_circle_baseline", base_med);
  ctx.metric("ratio", med / base_med);
  ctx.verdict("exceeds_circle", med >= cfg.real("min_ratio") * base_med);
}

ConfigField seeds_field(long long def) { return integer("seeds", def, 1, 100000, "replicates"); }

}  // namespace

std::vector<Experiment> builtin_experiments() {
  std::vector<Experiment> v;
  v.push_back({"bm-lemma31",
               "dyadic intervals with small increment and large excursion; turning ratios at the witnesses",
               120,
               {{"dims", FieldKind::IntList, "1,2", "ambient dimensions", 1, 3, {}},
                real("a", "3", 0.5, 50, "excursion threshold"),
                integer("level", 12, 1, 24, "dyadic level scanned"),
                integer("depth", 20, 2, 24, "path depth"),
                seeds_field(200),
                real("min_hit_fraction", "0.95", 0, 1, "required fraction of paths with a hit")},
               {"hit_fraction", "trace_ratio_bound", "graph_ratio_bound"},
               run_lemma31});
  v.push_back({"bm-turning",
               "median turning profile of Brownian traces and graphs",
               600,
               {seeds_field(50), integer("depth", 16, 4, 24, "path depth"), integer("levels", 3, 1, 8, "refinement levels"),
                integer("trace_dims", 2, 1, 3, "dimension of the trace"),
                integer("graph_dims", 1, 1, 3, "dimension of the graph's path")},
               {"trace_profile_increasing", "graph_profile_increasing"},
               run_bm_turning});
  v.push_back({"cle-carpet",
               "loop-soup carpet: Whyburn diagnostics, carpet dimension, loop-count dispersion",
               600,
               [] {
                 auto s = soup_fields();
                 s.push_back(seeds_field(50));
                 s.push_back(real("eps_density", "0.125", 1e-3, 1, "side of the density squares"));
                 s.push_back(real("eps_diam", "0.125", 1e-4, 4, "diameter threshold for counting large boundaries"));
                 s.push_back(real("min_density", "0.95", 0, 1, "density fraction a run must reach"));
                 s.push_back(real("min_dense_fraction", "0.9", 0, 1, "fraction of runs that must be dense"));
                 s.push_back(real("dimension_low", "1.6", 0, 2, "sanity band for the carpet dimension"));
                 s.push_back(real("dimension_high", "2.0", 0, 2, "sanity band for the carpet dimension"));
                 s.push_back(integer("dispersion_seeds", 200, 2, 100000, "soups for the count dispersion"));
                 s.push_back({"export_loops", FieldKind::Bool, "false", "write loops of replicate 0", 0, 0, {}});
                 return s;
               }(),
               {"disjoint_all", "density", "dimension_band", "dispersion", "c_at_4", "c_monotone"},
               run_cle_carpet});
  v.push_back({"cle-turning",
               "turning constants of outermost cluster boundaries against a circle",
               300,
               [] {
                 auto s = soup_fields();
                 s.push_back(seeds_field(50));
                 s.push_back(integer("levels", 3, 1, 6, "refinement levels"));
                 s.push_back(real("min_ratio", "2", 0, 1e6, "required ratio over the circle baseline"));
                 return s;
               }(),
               {"exceeds_circle"},
               run_cle_turning});
  v.push_back({"perc-dim",
               "fractal percolation: level-count dimension, mean counts, perfectness trend",
               300,
               {integer("n", 2, 1, 3, "ambient dimension"), integer("l", 3, 2, 36, "branching"),
                real("p", "0.7", 1e-6, 1, "retention probability"), integer("depth", 7, 2, 12, "tree depth"),
                real("dimension_tolerance", "0.1", 0, 10, "allowed |slope - reference|"),
                integer("count_seeds", 1000, 2, 100000, "trees for the mean counts"),
                integer("count_depth", 5, 1, 10, "depth of the mean-count trees"),
                integer("perf_seeds", 100, 1, 100000, "trees per perfectness depth"),
                real("perf_p", "0.5", 1e-6, 1, "retention probability for the perfectness trend"),
                {"perf_depths", FieldKind::IntList, "4,6,8", "depths of the perfectness trend", 1, 10, {}}},
               {"dimension", "mean_counts"},
               run_perc_dim});
  v.push_back({"perc-survival",
               "survival to a fixed depth at the critical value and above",
               300,
               {integer("n", 2, 1, 3, "ambient dimension"), integer("l", 3, 2, 36, "branching"),
                integer("depth", 12, 1, 30, "target depth"), integer("replicates", 1000, 100, 1000000, "trees per estimate"),
                real("max_critical_survival", "0.05", 0, 1, "bound on survival at p = l^-n"),
                {"p_scan", FieldKind::RealList, "0.2,0.3,0.5,0.7", "supercritical retention probabilities", 1e-6, 1, {}}},
               {"critical_survival", "branching_match", "monotone_in_p"},
               run_perc_survival});
  v.push_back({"sle-trace",
               "chordal SLE traces: box-counting dimension and simplicity",
               600,
               {real("kappa", "2", 0, 8, "SLE parameter"), real("horizon", "1", 1e-6, 100, "capacity time"),
                real("dt", "1e-5", 1e-8, 1, "driver step"), seeds_field(20),
                integer("finest_scale_exp", 14, 2, 30, "finest box side 2^-k"),
                real("dimension_tolerance", "0.15", 0, 10, "allowed |mean slope - (1 + kappa/8)|"),
                integer("simple_seeds", 100, 1, 100000, "traces checked for self-crossings"),
                real("simple_dt", "1e-4", 1e-8, 1, "driver step of the simplicity traces"),
                real("simple_resolution", "1e-3", 1e-9, 1, "bucket size of the crossing search"),
                real("min_simple_fraction", "0.95", 0, 1, "required fraction without crossings")},
               {"dimension", "simple_fraction"},
               run_sle_trace});
  v.push_back({"sle-turning",
               "median turning profile of chordal SLE traces",
               600,
               {real("kappa", "3", 0, 8, "SLE parameter"), real("horizon", "1", 1e-6, 100, "capacity time"),
                real("dt", "1e-4", 1e-8, 1, "driver step"), seeds_field(50),
                integer("levels", 3, 1, 8, "refinement levels")},
               {"profile_increasing"},
               run_sle_turning});
  v.push_back({"sle-validate",
               "Loewner engine checks against closed forms and SLE(rho) reductions",
               120,
               {real("zero_dt", "1e-4", 1e-7, 0.1, "step of the zero driver"),
                real("zero_tolerance", "1e-9", 0, 1, "bound on |tip - 2i sqrt(t)|"),
                real("forward_tolerance", "1e-8", 0, 1, "bound on the forward-map relative error at z = 2i"),
                real("hydro_kappa", "2", 0, 8, "kappa of the driver for the normalization check"),
                real("kappa", "2", 0, 8, "kappa for the rho = 0 comparison"),
                real("driver_dt", "1e-3", 1e-7, 0.1, "driver step"),
                integer("ks_seeds", 1000, 10, 1000000, "drivers per KS sample"),
                real("rho", "1", -1.999, 100, "rho for the kappa = 0 gap check"),
                real("gap_dt", "1e-4", 1e-7, 0.1, "driver step for the gap check"),
                real("gap_tolerance", "1e-6", 0, 1, "bound on the gap error")},
               {"zero_driver", "forward_closed_form", "hydrodynamic", "rho0_chordal_ks", "rho0_radial_ks",
                "kappa0_chordal_gap", "kappa0_radial_gap"},
               run_sle_validate});
  return v;
}

}  // namespace fractal_lab
