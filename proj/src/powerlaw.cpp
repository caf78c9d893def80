#include "contagion/powerlaw.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <fmt/format.h>

namespace contagion {

namespace {

constexpr double kExponentLow = 1.01;
constexpr double kExponentHigh = 6.0;
constexpr double kGoldenTolerance = 1e-6;
constexpr double kZetaTolerance = 1e-12;
constexpr double kZetaShift = 15.0;

// B_2j / (2j)! for j = 1..8.
constexpr std::array<double, 8> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
};

// Sorted view of a sample with distinct values and suffix statistics, shared
// by every cutoff candidate.
struct SortedSample {
  std::vector<std::int64_t> values;     // distinct, ascending
  std::vector<std::size_t> count_from;  // samples >= values[k]
  std::vector<double> log_sum_from;     // sum of ln x over samples >= values[k]
  std::size_t total = 0;

  explicit SortedSample(std::span<const std::int64_t> samples) {
    std::vector<std::int64_t> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    total = sorted.size();
    std::vector<std::size_t> counts;
    for (std::int64_t x : sorted) {
      if (values.empty() || values.back() != x) {
        values.push_back(x);
        counts.push_back(0);
      }
      ++counts.back();
    }
    count_from.assign(values.size() + 1, 0);
    log_sum_from.assign(values.size() + 1, 0.0);
    for (std::size_t k = values.size(); k-- > 0;) {
      count_from[k] = count_from[k + 1] + counts[k];
      log_sum_from[k] =
          log_sum_from[k + 1] + static_cast<double>(counts[k]) * std::log(static_cast<double>(values[k]));
    }
  }

  // First distinct index with value >= x_min.
  std::size_t first_at_least(std::int64_t x_min) const {
    return static_cast<std::size_t>(
        std::lower_bound(values.begin(), values.end(), x_min) - values.begin());
  }
};

void check_samples(std::span<const std::int64_t> samples) {
  if (samples.size() < 10) {
    throw std::invalid_argument(
        fmt::format("power-law fit needs at least 10 samples, got {}", samples.size()));
  }
  if (std::any_of(samples.begin(), samples.end(), [](std::int64_t x) { return x <= 0; })) {
    throw std::invalid_argument("power-law fit needs positive integer samples");
  }
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  if (*lo == *hi) throw std::invalid_argument("degenerate sequence: all samples are equal");
}

double log_likelihood(std::size_t n_tail, double log_sum, std::int64_t x_min, double exponent) {
  return -static_cast<double>(n_tail) * std::log(hurwitz_zeta(exponent, static_cast<double>(x_min))) -
         exponent * log_sum;
}

double golden_section_max(std::size_t n_tail, double log_sum, std::int64_t x_min) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = kExponentLow;
  double b = kExponentHigh;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = log_likelihood(n_tail, log_sum, x_min, c);
  double fd = log_likelihood(n_tail, log_sum, x_min, d);
  while (b - a > kGoldenTolerance) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = log_likelihood(n_tail, log_sum, x_min, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = log_likelihood(n_tail, log_sum, x_min, d);
    }
  }
  return 0.5 * (a + b);
}

double ks_on_sorted(const SortedSample& s, std::size_t first, std::int64_t x_min, double exponent) {
  const double norm = hurwitz_zeta(exponent, static_cast<double>(x_min));
  const double n_tail = static_cast<double>(s.count_from[first]);
  // Model CDF P(X <= x) for x >= x_min.
  const auto model_cdf = [&](std::int64_t x) {
    return 1.0 - hurwitz_zeta(exponent, static_cast<double>(x + 1)) / norm;
  };
  double worst = 0.0;
  double empirical = 0.0;
  std::int64_t gap_start = x_min;
  for (std::size_t k = first; k < s.values.size(); ++k) {
    const std::int64_t v = s.values[k];
    // Integers in [gap_start, v - 1] share the running empirical CDF; the model
    // CDF is monotone there, so the extremes sit at the gap ends.
    if (gap_start <= v - 1) {
      worst = std::max(worst, std::abs(empirical - model_cdf(gap_start)));
      worst = std::max(worst, std::abs(empirical - model_cdf(v - 1)));
    }
    empirical = 1.0 - static_cast<double>(s.count_from[k + 1]) / n_tail;
    worst = std::max(worst, std::abs(empirical - model_cdf(v)));
    gap_start = v + 1;
  }
  return worst;
}

PowerLawFit fit_at(const SortedSample& s, std::int64_t x_min) {
  const std::size_t first = s.first_at_least(x_min);
  const std::size_t n_tail = s.count_from[first];
  if (n_tail < 2) {
    throw std::invalid_argument(fmt::format("fewer than 2 samples at or above x_min={}", x_min));
  }
  PowerLawFit fit;
  fit.x_min = x_min;
  fit.n_tail = n_tail;
  fit.exponent = golden_section_max(n_tail, s.log_sum_from[first], x_min);
  fit.log_likelihood = log_likelihood(n_tail, s.log_sum_from[first], x_min, fit.exponent);
  fit.ks_distance = ks_on_sorted(s, first, x_min, fit.exponent);
  return fit;
}

}  // namespace

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) {
    throw std::invalid_argument(fmt::format("hurwitz_zeta needs s > 1 and q > 0 (s={}, q={})", s, q));
  }
  double sum = 0.0;
  double a = q;
  while (a < kZetaShift) {
    sum += std::pow(a, -s);
    a += 1.0;
  }
  // Euler-Maclaurin remainder for sum_{k>=0} (a + k)^-s.
  const double a_pow = std::pow(a, -s);
  sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
  double rising = s;          // s (s+1) ... (s + 2j - 2)
  double power = a_pow / a;   // a^(-s - 2j + 1)
  for (std::size_t j = 0; j < kBernoulliOverFactorial.size(); ++j) {
    const double term = kBernoulliOverFactorial[j] * rising * power;
    sum += term;
    if (std::abs(term) < kZetaTolerance * 1e-3 * sum) break;
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    power /= a * a;
  }
  return sum;
}

double discrete_log_likelihood(std::span<const std::int64_t> samples, std::int64_t x_min,
                               double exponent) {
  std::size_t n_tail = 0;
  double log_sum = 0.0;
  for (std::int64_t x : samples) {
    if (x >= x_min) {
      ++n_tail;
      log_sum += std::log(static_cast<double>(x));
    }
  }
  return log_likelihood(n_tail, log_sum, x_min, exponent);
}

PowerLawFit fit_discrete(std::span<const std::int64_t> samples) {
  check_samples(samples);
  const SortedSample sorted(samples);

  std::vector<std::int64_t> ordered(samples.begin(), samples.end());
  std::sort(ordered.begin(), ordered.end());
  const std::int64_t cap = ordered[static_cast<std::size_t>(0.9 * static_cast<double>(ordered.size() - 1))];

  PowerLawFit best;
  bool have = false;
  for (std::int64_t x_min : sorted.values) {
    if (x_min > cap) break;
    if (sorted.count_from[sorted.first_at_least(x_min)] < 2) break;
    const PowerLawFit candidate = fit_at(sorted, x_min);
    if (!have || candidate.ks_distance < best.ks_distance) {
      best = candidate;
      have = true;
    }
  }
  return best;
}

PowerLawFit fit_discrete_fixed_xmin(std::span<const std::int64_t> samples, std::int64_t x_min) {
  if (x_min < 1) throw std::invalid_argument("x_min must be positive");
  if (std::any_of(samples.begin(), samples.end(), [](std::int64_t x) { return x <= 0; })) {
    throw std::invalid_argument("power-law fit needs positive integer samples");
  }
  return fit_at(SortedSample(samples), x_min);
}

double ks_distance(std::span<const std::int64_t> samples, std::int64_t x_min, double exponent) {
  const SortedSample sorted(samples);
  const std::size_t first = sorted.first_at_least(x_min);
  if (sorted.count_from[first] == 0) throw std::invalid_argument("no samples at or above x_min");
  return ks_on_sorted(sorted, first, x_min, exponent);
}

}  // namespace contagion
