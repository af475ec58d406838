#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gcph {

/// Least-squares line through (log n, log error).
struct RateFit {
  std::vector<double> log_n;
  std::vector<double> log_error;
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};

/// Requires at least three points and strictly positive errors.
RateFit rate_fit(std::span<const std::pair<double, double>> n_and_error);

}  // namespace gcph
