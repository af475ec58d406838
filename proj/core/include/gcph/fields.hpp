#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gcph/gcp.hpp"
#include "gcph/hydro.hpp"
#include "gcph/lattice.hpp"

namespace gcph {

/// Smooth periodic test function on the unit torus.
///
/// Catalog names accepted by parse:
///   one            f = 1
///   cosM, sinM     f = cos / sin(2 pi M x_0)
///   cos:m0,m1,...  f = cos(2 pi m . x), likewise sin:
///   bump           C-infinity bump of radius 1/4 centered at (1/2, ..., 1/2)
class TestFunction {
 public:
  enum class Kind { one, cosine, sine, bump, tabulated };

  static TestFunction one();
  static TestFunction cosine(std::vector<int> modes);
  static TestFunction sine(std::vector<int> modes);
  static TestFunction bump(double radius = 0.25);
  /// Values at the sites of one lattice; sup norm is taken from the table.
  static TestFunction tabulated(std::string name, TorusLattice lattice, std::vector<double> values);
  static TestFunction parse(std::string_view name);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  /// Not available for tabulated functions.
  double operator()(std::span<const double> point) const;
  /// f(x / n) at every site.
  std::vector<double> values(const TorusLattice& lattice) const;
  double sup_norm() const;
  /// n^{-d} sum_x f(x/n)^2.
  double l2n_squared(const TorusLattice& lattice) const;

 private:
  TestFunction(Kind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

  Kind kind_;
  std::string name_;
  std::vector<int> modes_;
  double radius_ = 0.25;
  std::vector<double> table_;
  TorusLattice table_lattice_{1, 1};
};

/// w_x^i = 1(sigma_x = i) - u_x^i, site-major.
class CenteredField {
 public:
  CenteredField(TorusLattice lattice, int threshold, std::vector<double> values);

  const TorusLattice& lattice() const { return lattice_; }
  int threshold() const { return threshold_; }
  std::size_t sites() const { return lattice_.size(); }
  double operator()(std::size_t x, int i) const {
    return values_[x * static_cast<std::size_t>(threshold_ + 1) + static_cast<std::size_t>(i)];
  }
  std::span<const double> values() const { return values_; }

 private:
  TorusLattice lattice_;
  int threshold_;
  std::vector<double> values_;
};

CenteredField centered_field(const SpinConfig& sigma, const DensityField& u);

/// n^{-d} sum_x w_x^i f(x/n), with f given by its site values.
double lln_error(const CenteredField& w, std::span<const double> f_values, int i);
double lln_error(const CenteredField& w, const TestFunction& f, int i);

/// n^{-d/2} sum_x w_x^i f(x/n).
double fluctuation(const CenteredField& w, std::span<const double> f_values, int i);
double fluctuation(const CenteredField& w, const TestFunction& f, int i);

/// n^{-d} sum_x c_x(sigma) (1(sigma_x = i-1) - 1(sigma_x = i)) (1(sigma_x = j-1) - 1(sigma_x = j)) f(x/n)^2,
/// indices taken mod k+1.
double carre_du_champ(const SpinConfig& sigma, const ModelParams& p, std::span<const double> f_values, int i, int j);
double carre_du_champ(const SpinConfig& sigma, const ModelParams& p, const TestFunction& f, int i, int j);

}  // namespace gcph
