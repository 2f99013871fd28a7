#include "fractal_lab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "fractal_lab/errors.hpp"

namespace fractal_lab {

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidArgument("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidArgument("median: empty sample");
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level) {
  if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
  double c = 0.0;
  if (level == 0.01)
    c = 1.628;
  else if (level == 0.05)
    c = 1.358;
  else if (level == 0.10)
    c = 1.224;
  else
    throw InvalidArgument("ks_two_sample: level must be 0.01, 0.05 or 0.10");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  KsResult r;
  r.statistic = d;
  r.critical = c * std::sqrt((na + nb) / (na * nb));
  r.reject = d > r.critical;
  return r;
}

}  // namespace fractal_lab
