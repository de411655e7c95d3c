#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "comprank/error.hpp"

namespace comprank {

inline constexpr double kSqrt2 = 1.4142135623730950488016887242097;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

/// softplus(x) = ln(1 + e^x), stable in both tails.
inline double softplus(double x) {
  const double m = x > 0.0 ? x : 0.0;
  return m + std::log1p(std::exp(-std::fabs(x)));
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// ln sigmoid(x) = -softplus(-x); no overflow for |x| > 30.
inline double log_sigmoid(double x) { return -softplus(-x); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

/// Standard normal CDF.
inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

/// ln Phi(x). log1p form on the right (avoids log(1 - tiny) cancellation),
/// direct evaluation on the left until erfc loses precision, then the
/// asymptotic tail Phi(x) ~ phi(x)/(-x) * (1 - 1/x^2 + 3/x^4 - 15/x^6).
inline double log_norm_cdf(double x) {
  if (x >= 0.0) {
    return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  }
  if (x > -36.0) {
    return std::log(0.5 * std::erfc(-x / kSqrt2));
  }
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 - 15.0 * inv2));
  return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log(series);
}

/// Inverse Mills ratio phi(x)/Phi(x), stable for x << 0.
inline double norm_pdf_cdf_ratio(double x) {
  if (x > -36.0) {
    return norm_pdf(x) / norm_cdf(x);
  }
  const double inv2 = 1.0 / (x * x);
  const double series = 1.0 + inv2 * (-1.0 + inv2 * (3.0 - 15.0 * inv2));
  return -x / series;
}

inline double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

/// Population standard deviation (divide by N).
inline double population_stddev(std::span<const double> values) {
  const double mu = mean_of(values);
  double ss = 0.0;
  for (double v : values) {
    const double d = v - mu;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(values.size()));
}

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::Input, std::string(what) + " contains a non-finite value");
    }
  }
}

}  // namespace comprank
