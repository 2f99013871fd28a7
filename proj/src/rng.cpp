#include "fractal_lab/rng.hpp"

#include <algorithm>
#include <cmath>

#include "fractal_lab/parallel.hpp"

namespace fractal_lab {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t key) noexcept {
  std::uint64_t x = key;
  for (auto& s : s_) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    s = z ^ (z >> 31);
  }
}

std::uint64_t Rng::next_u64() noexcept {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

double Rng::normal() noexcept { return inverse_normal_cdf(uniform_open()); }

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) return 0;
  // exp(-mean) underflows past ~700; a Poisson(mean) is a sum of Poisson pieces.
  constexpr double kPiece = 500.0;
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double lambda = remaining > kPiece ? kPiece : remaining;
    remaining -= lambda;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    std::uint64_t k = 0;
    while (u >= cdf && k < 100000) {
      ++k;
      p *= lambda / static_cast<double>(k);
      cdf += p;
      if (p == 0.0 && static_cast<double>(k) > lambda) break;
    }
    total += k;
  }
  return total;
}

double inverse_normal_cdf(double p) noexcept {
  constexpr double split1 = 0.425, split2 = 5.0, const1 = 0.180625, const2 = 1.6;
  const double q = p - 0.5;
  if (std::fabs(q) <= split1) {
    const double r = const1 - q * q;
    const double num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                             6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                           1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                         1.3314166789178437745e+2) * r + 3.3871328727963666080e0);
    const double den = (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                             3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                           5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                         4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0 ? p : 1.0 - p;
  if (r <= 0.0) return q < 0 ? -INFINITY : INFINITY;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= split2) {
    r -= const2;
    const double num = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                             2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                           3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                         4.63033784615654529590e0) * r + 1.42343711074968357734e0);
    const double den = (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                             1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                           6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                         2.05319162663775882187e0) * r + 1.0);
    val = num / den;
  } else {
    r -= split2;
    const double num = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                             1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                           2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                         5.46378491116411436990e0) * r + 6.65790464350110377720e0);
    const double den = (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                             1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                           1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                         5.99832206555887937690e-1) * r + 1.0);
    val = num / den;
  }
  return q < 0 ? -val : val;
}

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

void fill_block(std::span<double> out, std::uint64_t key, double sd, std::size_t block) {
  const std::size_t begin = block * kGaussBlock;
  const std::size_t end = std::min(out.size(), begin + kGaussBlock);
  Rng rng(derive_stream(key, {stream_tag::kGaussBlock, block}));
  for (std::size_t k = begin; k < end; ++k) out[k] = sd * rng.normal();
}

}  // namespace

void fill_gaussian(std::span<double> out, std::uint64_t key, double sd) {
  const auto blocks = static_cast<std::int64_t>((out.size() + kGaussBlock - 1) / kGaussBlock);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (blocks > 1)
  for (std::int64_t b = 0; b < blocks; ++b) fill_block(out, key, sd, static_cast<std::size_t>(b));
}

namespace reference {

void fill_gaussian(std::span<double> out, std::uint64_t key, double sd) {
  const std::size_t blocks = (out.size() + kGaussBlock - 1) / kGaussBlock;
  for (std::size_t b = 0; b < blocks; ++b) fill_block(out, key, sd, b);
}

}  // namespace reference

}  // namespace fractal_lab
