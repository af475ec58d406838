#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gcph {

/// Discrete torus (Z / nZ)^d with row-major site indexing.
///
/// Site x has coordinates (c_0, ..., c_{d-1}) with c_{d-1} varying fastest;
/// its macroscopic position is x / n in the unit torus.
class TorusLattice {
 public:
  TorusLattice(int dim, int side);

  int dim() const { return dim_; }
  int side() const { return side_; }
  std::size_t size() const { return size_; }
  /// n^{-d}, the weight of one site in lattice Riemann sums.
  double site_weight() const { return 1.0 / static_cast<double>(size_); }

  /// Coordinates are wrapped periodically, so any integers are accepted.
  std::size_t index(std::span<const int> coords) const;
  void coords(std::size_t index, std::span<int> out) const;
  std::vector<int> coords(std::size_t index) const;
  /// Position x / n in [0, 1)^d.
  std::vector<double> point(std::size_t index) const;

  bool operator==(const TorusLattice&) const = default;

 private:
  int dim_;
  int side_;
  std::size_t size_;
};

}  // namespace gcph
