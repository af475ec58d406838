#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gcph/random.hpp"

namespace gcph {

/// Centered random variable with values in [lower, upper].
class BoundedSampler {
 public:
  /// 1(U < p) - p.
  static BoundedSampler centered_indicator(double p);
  /// +-1 with equal probability.
  static BoundedSampler rademacher();
  static BoundedSampler zero();
  /// Uniform on [-half_width, half_width].
  static BoundedSampler centered_uniform(double half_width);

  const std::string& name() const { return name_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double range_length() const { return upper_ - lower_; }
  /// Hoeffding: ||X||_psi2 <= range / 2.
  double psi2_bound() const { return 0.5 * range_length(); }

  double sample(RandomStream& rng) const;
  /// Throws std::range_error when v lies outside the declared range.
  void check(double v) const;

 private:
  enum class Kind { indicator, rademacher, zero, uniform };
  BoundedSampler(Kind kind, std::string name, double lower, double upper, double param)
      : kind_(kind), name_(std::move(name)), lower_(lower), upper_(upper), param_(param) {}

  Kind kind_;
  std::string name_;
  double lower_;
  double upper_;
  double param_;
};

/// `points` log-spaced values in [lo, hi].
std::vector<double> log_theta_grid(std::size_t points = 9, double lo = 0.1, double hi = 4.0);

struct InequalityRow {
  /// theta or gamma.
  double parameter = 0.0;
  double empirical = 0.0;
  double standard_error = 0.0;
  double bound = 0.0;
  bool pass() const { return empirical <= bound + 4.0 * standard_error; }
};

struct InequalityReport {
  std::string check;
  std::string sampler;
  std::size_t replicas = 0;
  std::vector<InequalityRow> rows;
  bool passed() const;
};

/// log E[e^{theta X}] <= theta^2 a^2 / 8 at +-theta for every theta, a the range length.
InequalityReport check_hoeffding(const BoundedSampler& sampler, std::span<const double> thetas, std::size_t replicas,
                                 RandomStream& rng);

/// E[e^{gamma X^2}] <= 3 at gamma = 1 / (4 (a/2)^2).
InequalityReport check_quad(const BoundedSampler& sampler, std::size_t replicas, RandomStream& rng);

/// Independent pairs (X_i, Y_i); within a pair the coordinates may be dependent.
class PairSampler {
 public:
  static PairSampler independent(BoundedSampler x, BoundedSampler y);
  /// Y = X.
  static PairSampler identical(BoundedSampler x);
  /// (1(s = i) - u_i, 1(s = j) - u_j) for s categorical with probabilities u.
  static PairSampler categorical(std::vector<double> u, int i, int j);

  const std::string& name() const { return name_; }
  /// Sub-Gaussian indices sigma^2 and tilde sigma^2 from Hoeffding.
  double x_index() const { return x_index_; }
  double y_index() const { return y_index_; }
  void sample(RandomStream& rng, double& x, double& y) const;

 private:
  enum class Kind { independent, identical, categorical };
  PairSampler(Kind kind, std::string name, BoundedSampler x, BoundedSampler y)
      : kind_(kind), name_(std::move(name)), x_(std::move(x)), y_(std::move(y)) {}

  Kind kind_;
  std::string name_;
  BoundedSampler x_;
  BoundedSampler y_;
  std::vector<double> probs_;
  int i_ = 0;
  int j_ = 0;
  double x_index_ = 0.0;
  double y_index_ = 0.0;
};

/// (1024 sum_{i != j} sigma_i^2 tilde sigma_j^2 g_ij^2)^{-1/2} for identically distributed pairs.
double hanson_wright_gamma(std::span<const double> g, std::size_t size, double x_index, double y_index);

/// E[exp(gamma sum_{i != j} g_ij X_i Y_j)] <= 3 at the threshold gamma. g is row-major size x size
/// with zero diagonal.
InequalityReport check_hanson_wright(std::size_t size, std::span<const double> g, const PairSampler& pairs,
                                     std::size_t replicas, RandomStream& rng);

/// Random +-1 off-diagonal matrix with zero diagonal.
std::vector<double> random_sign_matrix(std::size_t size, RandomStream& rng);

/// log E[e^{theta (X + Y)}] <= theta^2 (psi2(X)^2 + psi2(Y)^2) / 2 for independent X, Y.
InequalityReport check_psi2_sum(const BoundedSampler& x, const BoundedSampler& y, std::span<const double> thetas,
                                std::size_t replicas, RandomStream& rng);

struct DonskerVaradhan {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs + 1e-12; }
};

/// int g f dmu <= (int f log f dmu + log int e^{gamma g} dmu) / gamma on a finite space.
DonskerVaradhan donsker_varadhan(std::span<const double> mu, std::span<const double> f, std::span<const double> g,
                                 double gamma);

}  // namespace gcph
