#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gcph/fields.hpp"
#include "gcph/hydro.hpp"
#include "gcph/rate_fit.hpp"

namespace gcph {

/// gamma for one site as a row-major (k+1) x (k+1) matrix, from u_x, I_x = (J^n * u^k)_x and a.
///   gamma^{kk} = a u^k + I u^{k-1},  gamma^{00} = a u^k + I u^0,  gamma^{ii} = I (u^{i-1} + u^i),
///   gamma^{k0} = -a u^k,  gamma^{i,i+1} = -I u^i (i != k), symmetric.
/// For k = 1 both off-diagonal contributions land on the same entry and add up.
std::vector<double> gamma_matrix(std::span<const double> ux, double intensity, double recovery_rate);

/// Per-site noise covariance matrices.
class GammaField {
 public:
  GammaField(TorusLattice lattice, int threshold);

  const TorusLattice& lattice() const { return lattice_; }
  int threshold() const { return threshold_; }
  int states() const { return threshold_ + 1; }
  std::size_t sites() const { return lattice_.size(); }

  double operator()(std::size_t x, int i, int j) const { return values_[offset(x) + index(i, j)]; }
  std::span<double> site(std::size_t x) { return {values_.data() + offset(x), block()}; }
  std::span<const double> site(std::size_t x) const { return {values_.data() + offset(x), block()}; }
  /// <gamma_x v, v>.
  double quadratic_form(std::size_t x, std::span<const double> v) const;

 private:
  std::size_t block() const { return static_cast<std::size_t>(states() * states()); }
  std::size_t offset(std::size_t x) const { return x * block(); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * states() + j); }

  TorusLattice lattice_;
  int threshold_;
  std::vector<double> values_;
};

GammaField gamma_field(const DensityField& u, const ModelParams& p);

/// -n^{-d} sum_x f g u^i u^j for i != j, n^{-d} sum_x f g u^i (1 - u^i) for i = j.
double predicted_initial_cov(const DensityField& u0, std::span<const double> f, std::span<const double> g, int i,
                             int j);
double predicted_initial_cov(const DensityField& u0, const TestFunction& f, const TestFunction& g, int i, int j);

/// Variance of n^{-d/2} sum_x (phi_x(sigma_x) - E phi_x) under the product measure of u0,
/// as the bilinear form of predicted_initial_cov over all state pairs.
double initial_variance(const DensityField& u0, const DensityField& phi);

struct MildVariance {
  double initial = 0.0;
  double martingale = 0.0;
  double total() const { return initial + martingale; }
};

/// Var X_t(f e_i) = VarInit(P_0 (f e_i)) + int_0^t n^{-d} sum_x <gamma_x(s) P_s f, P_s f> ds.
/// t must be a time of the trajectory grid; the time integral is the trapezoid rule on that grid.
MildVariance predicted_variance_mild(std::span<const double> f, int i, double t, const Trajectory& trajectory,
                                     const ModelParams& p);

struct McSummary {
  std::size_t replicas = 0;
  double mean = 0.0;
  /// Unbiased sample variance.
  double variance = 0.0;
  /// sqrt(variance / replicas).
  double standard_error = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  double skewness_se = 0.0;
  double kurtosis_se = 0.0;
};

/// Moments without the jackknife.
McSummary summarize(std::span<const double> samples);
/// Requires at least 500 samples with nonzero spread; SEs of skewness and kurtosis by jackknife.
McSummary normality_diagnostics(std::span<const double> samples);

struct Estimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Sample covariance with the SE of the mean of centered products.
Estimate covariance_estimate(std::span<const double> x, std::span<const double> y);
Estimate variance_estimate(std::span<const double> x);
/// Mean of x^2 with its SE.
Estimate mean_square_estimate(std::span<const double> x);

}  // namespace gcph
