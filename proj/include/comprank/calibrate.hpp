#pragma once

#include <cmath>
#include <span>

#include "comprank/error.hpp"
#include "comprank/numeric.hpp"

namespace comprank {

/// Least-squares line gold ~ a * pred + b.
struct LinearFit {
  double a = 1.0;
  double b = 0.0;
};

/// Closed-form OLS of gold on pred. Throws when fewer than two points or
/// when pred is constant (slope undefined).
inline LinearFit linear_calibrate(std::span<const double> pred, std::span<const double> gold) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorKind::Validation, "prediction/gold length mismatch");
  }
  if (pred.size() < 2) {
    throw Error(ErrorKind::Validation, "linear calibration needs at least 2 points");
  }
  require_finite(pred, "predictions");
  require_finite(gold, "gold scores");

  const double mp = mean_of(pred);
  const double mg = mean_of(gold);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const double dx = pred[k] - mp;
    sxx += dx * dx;
    sxy += dx * (gold[k] - mg);
  }
  if (sxx == 0.0) {
    throw Error(ErrorKind::DegenerateFit, "constant predictions: calibration slope undefined");
  }
  LinearFit fit;
  fit.a = sxy / sxx;
  fit.b = mg - fit.a * mp;
  return fit;
}

}  // namespace comprank
