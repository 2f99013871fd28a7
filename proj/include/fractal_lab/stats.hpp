#pragma once

// Small sample statistics shared by the experiments.

#include <span>
#include <vector>

namespace fractal_lab {

double mean(std::span<const double> xs);
/// Unbiased sample variance; 0 for fewer than two values.
double sample_variance(std::span<const double> xs);
/// Average of the two middle values for even sizes. InvalidArgument when empty.
double median(std::vector<double> xs);

struct KsResult {
  double statistic = 0.0;  // sup |F_a - F_b|
  double critical = 0.0;   // asymptotic critical value at the requested level
  bool reject = false;
};

/// Two-sample Kolmogorov-Smirnov test; `level` is 0.01, 0.05 or 0.10.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double level);

}  // namespace fractal_lab
