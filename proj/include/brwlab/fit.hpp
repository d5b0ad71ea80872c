#pragma once

#include <span>
#include <utility>

namespace brwlab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of log y against log n. Needs at least three points
/// with distinct n and positive y.
FitResult fit_loglog(std::span<const std::pair<double, double>> points);

}  // namespace brwlab
