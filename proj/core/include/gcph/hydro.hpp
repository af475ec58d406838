#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcph/kernel.hpp"
#include "gcph/lattice.hpp"
#include "gcph/rate_fit.hpp"

namespace gcph {

/// Recovery rate a > 0, threshold state k >= 1 and the lattice kernel J^n.
struct ModelParams {
  double recovery_rate = 1.0;
  int threshold = 1;
  std::shared_ptr<const DiscreteKernel> kernel;

  int states() const { return threshold + 1; }
  const TorusLattice& lattice() const { return kernel->lattice(); }
  void validate() const;
};

ModelParams make_params(double recovery_rate, int threshold, DiscreteKernel kernel);

/// The (k+1) x (k+1) reaction matrices of the mean-field equation.
///   A_{0k} = a, A_{kk} = -a.
///   M_{i,i-1} = 1 (i = 1..k), M_{ii} = -1 (i = 0..k-1).
/// Both have zero column sums.
class MatrixAM {
 public:
  MatrixAM(double recovery_rate, int threshold);

  int size() const { return size_; }
  double a(int i, int j) const { return a_[static_cast<std::size_t>(i * size_ + j)]; }
  double m(int i, int j) const { return m_[static_cast<std::size_t>(i * size_ + j)]; }

  /// Max column absolute sum.
  double a_norm() const;
  double m_norm() const;

  std::vector<double> apply_a(std::span<const double> v) const;
  std::vector<double> apply_m(std::span<const double> v) const;
  std::vector<double> apply_a_transpose(std::span<const double> v) const;
  std::vector<double> apply_m_transpose(std::span<const double> v) const;

 private:
  static std::vector<double> apply(const std::vector<double>& mat, int size, std::span<const double> v, bool transpose);
  int size_;
  std::vector<double> a_;
  std::vector<double> m_;
};

/// Per-site probability vectors (u^0_x, ..., u^k_x), site-major storage.
class DensityField {
 public:
  DensityField(TorusLattice lattice, int threshold);

  const TorusLattice& lattice() const { return lattice_; }
  int threshold() const { return threshold_; }
  int states() const { return threshold_ + 1; }
  std::size_t sites() const { return lattice_.size(); }

  double& operator()(std::size_t x, int i) { return values_[x * stride() + static_cast<std::size_t>(i)]; }
  double operator()(std::size_t x, int i) const { return values_[x * stride() + static_cast<std::size_t>(i)]; }
  std::span<double> site(std::size_t x) { return {values_.data() + x * stride(), stride()}; }
  std::span<const double> site(std::size_t x) const { return {values_.data() + x * stride(), stride()}; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  /// u^i as a per-site field.
  std::vector<double> component(int i) const;
  double min_component() const;
  double max_abs() const;
  /// max_x |sum_i u^i_x - 1|.
  double max_simplex_deviation() const;
  /// Throws std::invalid_argument unless every site lies on the simplex.
  void check_simplex(double tolerance = 1e-9) const;

 private:
  std::size_t stride() const { return static_cast<std::size_t>(threshold_ + 1); }

  TorusLattice lattice_;
  int threshold_;
  std::vector<double> values_;
};

/// Smooth simplex-valued initial profile
///   u^i(x) = base_i + amplitude_i * (1/d) sum_j cos(2 pi mode x_j),
/// with sum(base) = 1 and sum(amplitude) = 0. Constant profiles have zero amplitude.
class InitialProfile {
 public:
  static InitialProfile constant(std::vector<double> values);
  static InitialProfile cosine(std::vector<double> base, std::vector<double> amplitude, int mode = 1);

  int threshold() const { return static_cast<int>(base_.size()) - 1; }
  const std::vector<double>& base() const { return base_; }
  const std::vector<double>& amplitude() const { return amplitude_; }
  int mode() const { return mode_; }
  std::string name() const;

  std::vector<double> operator()(std::span<const double> point) const;
  /// Infimum and supremum over the torus of all components.
  double min_component() const;
  double max_component() const;

  /// x -> u0(x / n).
  DensityField on_lattice(const TorusLattice& lattice) const;

 private:
  InitialProfile(std::vector<double> base, std::vector<double> amplitude, int mode);

  std::vector<double> base_;
  std::vector<double> amplitude_;
  int mode_;
};

/// A u_x + (J^n * u^k)_x M u_x at every site.
DensityField drift(const DensityField& u, const ModelParams& p);

/// ||A|| + ||J||_{1,n} ||M|| with max-column-sum norms.
double lipschitz_scale(const ModelParams& p);
/// min(1e-2, 0.1 / lipschitz_scale).
double default_step(const ModelParams& p);

/// Raised when the positivity floor is breached: the step is too large.
class StepSizeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IntegrateOptions {
  /// 0 selects default_step.
  double step = 0.0;
  /// When false only the first and last states are stored.
  bool keep_trajectory = true;
  bool check_floor = true;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityField> states;
  /// Drift evaluated at each stored state.
  std::vector<DensityField> rates;
  double step = 0.0;
  /// eps0 = min component of the initial state.
  double initial_floor = 0.0;
  /// max(a, ||J||_{1,n}).
  double floor_rate = 0.0;
  /// Sites renormalized because their sum drifted by more than 1e-9.
  std::size_t simplex_repairs = 0;

  double end_time() const { return times.back(); }
  const DensityField& final_state() const { return states.back(); }
  bool complete() const { return states.size() == times.size(); }
  /// eps0 exp(-max(a, ||J||_{1,n}) t).
  double floor_at(double t) const;
  /// Cubic Hermite interpolation inside grid interval [times[j], times[j+1]].
  DensityField interpolate(std::size_t interval, double fraction) const;
};

/// Classical RK4 on the grid {0, h, 2h, ..., t_end}; the last step is
/// shortened when t_end is not a multiple of h.
Trajectory integrate(const DensityField& u0, const ModelParams& p, double t_end, IntegrateOptions options = {});

/// Fine-lattice solution standing in for the continuum equation.
DensityField reference_continuum(const InitialProfile& u0, const KernelSpec& kernel, double recovery_rate,
                                 int dim, int reference_side, double t_end, double step = 0.0);

/// Subsamples a fine field at the sites of a coarser lattice whose side divides the fine side.
DensityField restrict_to(const DensityField& fine, const TorusLattice& coarse);

struct ConvergenceRow {
  int side = 0;
  double sup_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergenceRow> rows;
  int reference_side = 0;
  double step = 0.0;
  /// Absent when some error is exactly zero.
  std::optional<RateFit> fit;
};

/// Sup-norm distance at time t between the lattice solutions for each n and
/// a reference solution on n_ref sites per side (default: the smallest
/// multiple of 4 max(n) divisible by every n).
ConvergenceStudy convergence_study(std::span<const int> sides, const KernelSpec& kernel,
                                   const InitialProfile& u0, double recovery_rate, int dim, double t_end,
                                   std::optional<int> reference_side = std::nullopt, double step = 0.0);

/// g_s on the trajectory grid, values[j] at times[j].
struct BackwardField {
  std::vector<double> times;
  std::vector<DensityField> values;
};

/// Solves d_s g + A^T g + (J^n * u^k_s) M^T g + (J^{n,*} * <g, M u_s>) e_k = 0
/// backwards from g_t = terminal by RK4 on the reversed trajectory grid.
BackwardField backward_fp(const DensityField& terminal, const Trajectory& trajectory, const ModelParams& p);

}  // namespace gcph
