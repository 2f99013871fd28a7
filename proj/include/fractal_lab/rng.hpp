#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace fractal_lab {

/// Stateless 64-bit finalizer (splitmix64 output function).
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream key from a parent key and a list of tags.
/// Every replicate/block/level in the library gets its randomness from a key
/// built this way, so results never depend on scheduling order.
constexpr std::uint64_t derive_stream(std::uint64_t key, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(key ^ 0x243f6a8885a308d3ULL);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t + 0x13198a2e03707344ULL));
  return h;
}

// Stream tags used across modules.
namespace stream_tag {
inline constexpr std::uint64_t kBrownian = 0xB0;
inline constexpr std::uint64_t kRefine = 0xB1;
inline constexpr std::uint64_t kBridge = 0xB2;
inline constexpr std::uint64_t kReplicate = 0xB3;
inline constexpr std::uint64_t kDriver = 0xD0;
inline constexpr std::uint64_t kPercolation = 0xE0;
inline constexpr std::uint64_t kSoupMass = 0xF0;
inline constexpr std::uint64_t kSoupCandidate = 0xF1;
inline constexpr std::uint64_t kSoupCount = 0xF2;
inline constexpr std::uint64_t kGaussBlock = 0xA0;
}  // namespace stream_tag

/// xoshiro256** seeded from a single 64-bit key via splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t key) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform in the open interval (0, 1).
  double uniform_open() noexcept;
  /// Standard normal by inverse CDF of uniform_open().
  double normal() noexcept;
  /// Exact Poisson variate (inversion, split into pieces for large means).
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t s_[4];
};

/// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative).
double inverse_normal_cdf(double p) noexcept;

/// Standard normal CDF via erfc.
double normal_cdf(double x) noexcept;

/// Block size for the block-keyed Gaussian generator.
inline constexpr std::size_t kGaussBlock = 4096;

/// Fills `out` with i.i.d. N(0, sd^2); element k comes from block k / kGaussBlock
/// whose stream is derive_stream(key, {kGaussBlock, block}). OpenMP-parallel
/// over blocks; output is independent of thread count.
void fill_gaussian(std::span<double> out, std::uint64_t key, double sd);

namespace reference {
/// Serial version of fill_gaussian, kept for equivalence tests and benchmarks.
void fill_gaussian(std::span<double> out, std::uint64_t key, double sd);
}  // namespace reference

}  // namespace fractal_lab
