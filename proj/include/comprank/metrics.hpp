#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "comprank/calibrate.hpp"
#include "comprank/error.hpp"
#include "comprank/model.hpp"
#include "comprank/numeric.hpp"

namespace comprank {

/// Evaluation summary: Spearman rho, Pearson r, and rmse after linear
/// scaling of the predictions onto the gold scores (in gold-score units).
struct MetricReport {
  double spearman = 0.0;
  double pearson = 0.0;
  double rmse_scaled = 0.0;
  double calib_a = 1.0;
  double calib_b = 0.0;
  std::size_t n = 0;
  std::vector<std::string> warnings;
};

/// Product-moment correlation. Constant input is rejected.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::Validation, "pearson needs two vectors of equal length >= 2");
  }
  require_finite(x, "x");
  require_finite(y, "y");
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw Error(ErrorKind::UndefinedCorrelation, "correlation undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Average (fractional) ranks, 1-based; ties share the mean of their ranks.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && values[order[stop]] == values[order[start]]) ++stop;
    const double shared = 0.5 * static_cast<double>(start + 1 + stop);  // mean of ranks start+1..stop
    for (std::size_t k = start; k < stop; ++k) ranks[order[k]] = shared;
    start = stop;
  }
  return ranks;
}

/// Spearman rho: Pearson correlation of average ranks.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::Validation, "spearman needs two vectors of equal length >= 2");
  }
  require_finite(x, "x");
  require_finite(y, "y");
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

struct ScaledRmse {
  double rmse = 0.0;
  double a = 1.0;
  double b = 0.0;
};

/// Rmse after least-squares affine mapping of pred onto gold.
inline ScaledRmse rmse_after_scaling(std::span<const double> pred, std::span<const double> gold) {
  const LinearFit fit = linear_calibrate(pred, gold);
  double ss = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double r = fit.a * pred[k] + fit.b - gold[k];
    ss += r * r;
  }
  return {std::sqrt(ss / static_cast<double>(pred.size())), fit.a, fit.b};
}

inline MetricReport evaluate(std::span<const double> pred, std::span<const double> gold) {
  MetricReport report;
  report.n = pred.size();
  report.spearman = spearman(pred, gold);
  report.pearson = pearson(pred, gold);
  const ScaledRmse scaled = rmse_after_scaling(pred, gold);
  report.rmse_scaled = scaled.rmse;
  report.calib_a = scaled.a;
  report.calib_b = scaled.b;
  if (report.n < 3) {
    report.warnings.push_back("small sample: n = " + std::to_string(report.n));
  }
  return report;
}

/// Evaluate predicted scores against the universe's gold scores.
inline MetricReport evaluate(const ScoreVector& pred, const ItemSet& universe) {
  return evaluate(pred.values(), universe.gold_scores());
}

}  // namespace comprank
