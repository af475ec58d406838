#include "gcph/rate_fit.hpp"

#include <cmath>
#include <stdexcept>

namespace gcph {

RateFit rate_fit(std::span<const std::pair<double, double>> n_and_error) {
  const std::size_t m = n_and_error.size();
  if (m < 3) throw std::invalid_argument("rate_fit: at least 3 points are required");
  RateFit fit;
  for (const auto& [n, e] : n_and_error) {
    if (!(n > 0.0)) throw std::invalid_argument("rate_fit: n must be positive");
    if (!(e > 0.0) || !std::isfinite(e)) throw std::invalid_argument("rate_fit: errors must be positive and finite");
    fit.log_n.push_back(std::log(n));
    fit.log_error.push_back(std::log(e));
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += fit.log_n[i];
    my += fit.log_error[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (fit.log_n[i] - mx) * (fit.log_n[i] - mx);
    sxy += (fit.log_n[i] - mx) * (fit.log_error[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate_fit: all n are equal");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = fit.log_error[i] - (fit.intercept + fit.slope * fit.log_n[i]);
    ssr += r * r;
  }
  fit.slope_se = std::sqrt(ssr / static_cast<double>(m - 2) / sxx);
  return fit;
}

}  // namespace gcph
