#include "gcph/lattice.hpp"

#include <limits>
#include <stdexcept>

namespace gcph {

TorusLattice::TorusLattice(int dim, int side) : dim_(dim), side_(side), size_(1) {
  if (dim < 1) throw std::invalid_argument("TorusLattice: dimension must be >= 1");
  if (side < 1) throw std::invalid_argument("TorusLattice: side must be >= 1");
  for (int j = 0; j < dim; ++j) {
    if (size_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(side))
      throw std::overflow_error("TorusLattice: n^d overflows");
    size_ *= static_cast<std::size_t>(side);
  }
}

std::size_t TorusLattice::index(std::span<const int> coords) const {
  if (coords.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("TorusLattice::index: coordinate count != dimension");
  std::size_t idx = 0;
  for (int c : coords) {
    int wrapped = c % side_;
    if (wrapped < 0) wrapped += side_;
    idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(wrapped);
  }
  return idx;
}

void TorusLattice::coords(std::size_t index, std::span<int> out) const {
  if (index >= size_) throw std::out_of_range("TorusLattice::coords: index out of range");
  if (out.size() != static_cast<std::size_t>(dim_))
    throw std::invalid_argument("TorusLattice::coords: output size != dimension");
  for (int j = dim_ - 1; j >= 0; --j) {
    out[static_cast<std::size_t>(j)] = static_cast<int>(index % static_cast<std::size_t>(side_));
    index /= static_cast<std::size_t>(side_);
  }
}

std::vector<int> TorusLattice::coords(std::size_t index) const {
  std::vector<int> out(static_cast<std::size_t>(dim_));
  coords(index, out);
  return out;
}

std::vector<double> TorusLattice::point(std::size_t index) const {
  const auto c = coords(index);
  std::vector<double> p(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) p[j] = static_cast<double>(c[j]) / side_;
  return p;
}

}  // namespace gcph
