#pragma once

// Goodness-of-fit helpers used to compare simulated samples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "tfqkd/core.hpp"

namespace tfqkd {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^(k-1) exp(-2 k^2 x^2).
inline double kolmogorov_survival(double x) {
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// Two-sample Kolmogorov-Smirnov test with Stephens' effective-size correction.
inline TestResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

/// Pearson chi-squared test of homogeneity for two count vectors over the
/// same categories; categories empty in both are dropped.
inline TestResult chi_squared_homogeneity(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  if (a.size() != b.size()) throw DomainError("chi_squared_homogeneity: size mismatch");
  double ta = 0, tb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ta += static_cast<double>(a[k]);
    tb += static_cast<double>(b[k]);
  }
  if (ta == 0 || tb == 0) throw DomainError("chi_squared_homogeneity: empty sample");
  double stat = 0.0;
  int categories = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double col = static_cast<double>(a[k] + b[k]);
    if (col == 0) continue;
    ++categories;
    const double ea = col * ta / (ta + tb);
    const double eb = col * tb / (ta + tb);
    stat += (a[k] - ea) * (a[k] - ea) / ea + (b[k] - eb) * (b[k] - eb) / eb;
  }
  if (categories < 2) return {0.0, 1.0};
  boost::math::chi_squared dist(categories - 1);
  return {stat, boost::math::cdf(boost::math::complement(dist, stat))};
}

}  // namespace tfqkd
