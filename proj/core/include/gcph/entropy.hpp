#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gcph/gcp.hpp"
#include "gcph/hydro.hpp"

namespace gcph {

/// All (k+1)^N configurations of a small lattice, encoded in base k+1 with
/// site 0 as the least significant digit.
class StateSpace {
 public:
  static constexpr std::size_t kMaxStates = std::size_t{1} << 20;

  StateSpace(TorusLattice lattice, int threshold);

  const TorusLattice& lattice() const { return lattice_; }
  int threshold() const { return threshold_; }
  std::size_t sites() const { return lattice_.size(); }
  std::size_t size() const { return size_; }
  /// (k+1)^x.
  std::size_t place_value(std::size_t x) const { return place_[x]; }

  void decode(std::size_t index, std::span<int> out) const;
  SpinConfig config(std::size_t index) const;
  std::size_t encode(std::span<const int> states) const;
  std::size_t encode(const SpinConfig& sigma) const { return encode(sigma.states()); }

 private:
  TorusLattice lattice_;
  int threshold_;
  std::size_t size_ = 1;
  std::vector<std::size_t> place_;
};

/// Probability of each enumerated configuration.
using LawVector = std::vector<double>;

/// Throws unless entries are >= -1e-12 and sum to 1 within 1e-9.
void check_law(std::span<const double> law);
LawVector point_law(const StateSpace& space, const SpinConfig& sigma);

/// prod_x u_x^{sigma_x}.
double profile_prob(std::span<const int> sigma, const DensityField& u);
double profile_prob(const SpinConfig& sigma, const DensityField& u);
/// The product measure mu_u over the whole space.
LawVector profile_law(const StateSpace& space, const DensityField& u);

struct LawTrajectory {
  std::vector<double> times;
  std::vector<LawVector> laws;
};

/// Forward Kolmogorov equation integrated by matrix-free RK4 on {0, h, ..., t_end}.
/// Negative entries down to -1e-12 are clamped to 0.
LawTrajectory master_evolve(const StateSpace& space, const LawVector& initial, const ModelParams& p, double t_end,
                            double h, bool keep_trajectory = true);

/// sum law log(law / reference), with 0 log 0 = 0.
double relative_entropy(std::span<const double> law, std::span<const double> reference);
double relative_entropy(const StateSpace& space, std::span<const double> law, const DensityField& u);

/// L*1(sigma) - d/dt log mu_t(sigma), evaluated from the measure ratios
/// u_x^{sigma_x - 1} / u_x^{sigma_x} and the logarithmic derivative of mu_t.
double entropy_integrand_direct(std::span<const int> sigma, const DensityField& u, const DensityField& du,
                                const ModelParams& p);
/// n^{-d} sum_i sum_{x != y} J^n_{x,y} g_x^i w_x^i w_y^k.
double entropy_integrand_closed(std::span<const int> sigma, const DensityField& u, const ModelParams& p);

/// C (exp(C (exp(C t) - 1)) - 1).
double entropy_envelope(double c, double t);
/// Smallest C with entropy_envelope(C, t) >= value (0 when value <= 0).
double envelope_constant_for(double value, double t);

struct EntropyReport {
  std::vector<double> times;
  std::vector<double> entropy;
  /// Finite-difference dH/dt.
  std::vector<double> derivative;
  /// sum_sigma law(sigma) F_t(sigma).
  std::vector<double> production;
  /// max |F_direct - F_closed| over all configurations and grid times.
  double closed_form_gap = 0.0;
  double step = 0.0;
  double tolerance = 0.0;
  /// max over the grid of dH/dt - production.
  double max_excess = 0.0;
  /// Smallest C whose envelope dominates H on the whole grid.
  double envelope_constant = 0.0;
  std::vector<double> envelope;
  /// C matched to H at fit_time, and whether that envelope dominates everywhere.
  double fit_time = 0.0;
  double fit_constant = 0.0;
  bool fit_envelope_dominates = false;

  bool starts_at_zero() const;
  bool nonnegative() const;
  bool inequality_holds() const { return max_excess <= tolerance; }
};

/// Runs the law and the hydrodynamic equation side by side from mu_{u0}
/// and compares dH/dt with the exact entropy production term.
EntropyReport entropy_production_check(const ModelParams& p, const DensityField& u0, double t_end, double h,
                                       double fit_time = 0.5);

}  // namespace gcph
