#pragma once

#include <cstdint>
#include <span>

namespace contagion {

/// Discrete power-law fit of a sample tail.
struct PowerLawFit {
  double exponent = 0.0;
  std::int64_t x_min = 1;
  double ks_distance = 0.0;
  std::size_t n_tail = 0;
  double log_likelihood = 0.0;
};

/// Hurwitz zeta sum_{k>=0} (q + k)^-s for s > 1, q > 0. Direct summation of the
/// leading terms followed by an Euler-Maclaurin tail; relative truncation error
/// below 1e-12.
double hurwitz_zeta(double s, double q);

/// Log-likelihood of samples >= x_min under p(x) = x^-exponent / zeta(exponent, x_min).
/// Samples below x_min are ignored.
double discrete_log_likelihood(std::span<const std::int64_t> samples, std::int64_t x_min,
                               double exponent);

/// Maximum-likelihood fit with the lower cutoff chosen to minimize the
/// Kolmogorov-Smirnov distance. Cutoff candidates are the distinct sample
/// values up to the 90th percentile. Exponent searched by golden section on
/// [1.01, 6.0] to 1e-6.
///
/// Throws std::invalid_argument for fewer than 10 samples, non-positive
/// samples, or a degenerate (single-valued) sequence.
PowerLawFit fit_discrete(std::span<const std::int64_t> samples);

/// Same estimator with the cutoff fixed by the caller.
PowerLawFit fit_discrete_fixed_xmin(std::span<const std::int64_t> samples, std::int64_t x_min);

/// KS distance between the empirical tail (samples >= x_min) and the fitted
/// discrete power law, taken over every integer in [x_min, max sample].
double ks_distance(std::span<const std::int64_t> samples, std::int64_t x_min, double exponent);

}  // namespace contagion
