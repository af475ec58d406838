#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "gcph/lattice.hpp"

namespace gcph {

/// J(x, y) = value.
struct ConstantKernel {
  double value = 1.0;
};

/// J(x, y) = scale * prod_j (1 + beta cos(2 pi (x_j - y_j))), |beta| <= 1.
struct CosineKernel {
  double scale = 1.0;
  double beta = 0.5;
};

/// Periodized Gaussian bump,
/// J(x, y) = amplitude * prod_j sum_m exp(-(x_j - y_j + m)^2 / (2 width^2)).
struct GaussianKernel {
  double amplitude = 1.0;
  double width = 0.1;
};

/// Values given directly on one lattice, N x N row-major.
struct TabulatedKernel {
  TorusLattice lattice{1, 1};
  std::vector<double> values;
};

/// A nonnegative bounded interaction kernel on the continuous torus, chosen
/// from a small closed-form catalog or tabulated on a lattice.
class KernelSpec {
 public:
  using Variant = std::variant<ConstantKernel, CosineKernel, GaussianKernel, TabulatedKernel>;

  explicit KernelSpec(Variant kernel);

  static KernelSpec constant(double value) { return KernelSpec(ConstantKernel{value}); }
  static KernelSpec cosine(double scale, double beta) {
    return KernelSpec(CosineKernel{scale, beta});
  }
  static KernelSpec gaussian(double amplitude, double width) {
    return KernelSpec(GaussianKernel{amplitude, width});
  }
  /// Reads `x_index,y_index,value` rows; absent pairs are zero. Lines that
  /// do not start with a digit (headers, comments) are skipped.
  static KernelSpec load_csv(const std::filesystem::path& path, const TorusLattice& lattice);

  const Variant& kernel() const { return kernel_; }
  std::string name() const;

  bool is_tabulated() const { return std::holds_alternative<TabulatedKernel>(kernel_); }
  std::optional<double> constant_value() const;

  /// Closed-form evaluation; not available for tabulated kernels.
  double operator()(std::span<const double> x, std::span<const double> y) const;

  /// sup |J|, closed form.
  std::optional<double> sup_norm(int dim) const;
  /// sup_x integral J(x, y) dy, closed form.
  std::optional<double> l1_norm(int dim) const;

  /// Translation-invariant product kernels factor as prefactor * prod_j phi(x_j - y_j).
  /// Returns phi sampled at offsets o / n, o = 0..n-1, or nothing for other kinds.
  std::optional<std::vector<double>> offset_factors(int side) const;
  double prefactor() const;

 private:
  Variant kernel_;
};

enum class KernelStorage { automatic, dense, on_the_fly };

/// The lattice kernel J^n_{x,y} = J(x/n, y/n) for x != y and J^n_{x,x} = 0.
///
/// Immutable after construction. Stored as a dense N x N matrix for
/// N <= kDenseSiteLimit, otherwise evaluated on demand (from per-offset
/// factor tables for the product kernels).
class DiscreteKernel {
 public:
  static constexpr std::size_t kDenseSiteLimit = 4096;

  DiscreteKernel(const KernelSpec& spec, const TorusLattice& lattice,
                 KernelStorage storage = KernelStorage::automatic);

  const TorusLattice& lattice() const { return lattice_; }
  const KernelSpec& spec() const { return spec_; }
  std::size_t sites() const { return lattice_.size(); }
  bool is_dense() const { return !dense_.empty(); }
  bool is_symmetric() const { return symmetric_; }
  std::optional<double> constant_value() const { return spec_.constant_value(); }

  double operator()(std::size_t x, std::size_t y) const;

  /// (J^n * g)_x = n^{-d} sum_y J^n_{x,y} g_y.
  void conv(std::span<const double> g, std::span<double> out) const;
  std::vector<double> conv(std::span<const double> g) const;
  /// (J^{n,*} * g)_x = n^{-d} sum_y J^n_{y,x} g_y.
  void conv_adjoint(std::span<const double> g, std::span<double> out) const;
  std::vector<double> conv_adjoint(std::span<const double> g) const;

  /// field_x += weight * n^{-d} J^n_{x,y} for every x (column y of the convolution).
  void add_column(std::size_t y, double weight, std::span<double> field) const;

  /// ||J||_{1,n} = max_x n^{-d} sum_y J^n_{x,y}.
  double norm_1n() const { return norm_1n_; }
  /// ||J||_inf: the closed form when known, otherwise the largest entry.
  double sup_norm() const { return sup_norm_; }
  double max_entry() const { return max_entry_; }

 private:
  double evaluate(std::size_t x, std::size_t y) const;

  KernelSpec spec_;
  TorusLattice lattice_;
  std::vector<double> dense_;
  std::vector<double> factors_;
  double prefactor_ = 0.0;
  bool symmetric_ = true;
  double norm_1n_ = 0.0;
  double sup_norm_ = 0.0;
  double max_entry_ = 0.0;
};

DiscreteKernel discretize(const KernelSpec& spec, const TorusLattice& lattice,
                          KernelStorage storage = KernelStorage::automatic);

}  // namespace gcph
