#include "gcph/kernel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gcph {
namespace {

constexpr int kGaussianImages = 4;

double gaussian_wrapped(double offset, double width) {
  double sum = 0.0;
  for (int m = -kGaussianImages; m <= kGaussianImages; ++m) {
    const double z = (offset + m) / width;
    sum += std::exp(-0.5 * z * z);
  }
  return sum;
}

double cosine_factor(double offset, double beta) {
  return 1.0 + beta * std::cos(2.0 * std::numbers::pi * offset);
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void validate(const KernelSpec::Variant& kernel) {
  std::visit(Overloaded{
                 [](const ConstantKernel& k) {
                   if (!std::isfinite(k.value) || k.value < 0.0)
                     throw std::invalid_argument("constant kernel: value must be finite and >= 0");
                 },
                 [](const CosineKernel& k) {
                   if (!std::isfinite(k.scale) || k.scale < 0.0)
                     throw std::invalid_argument("cosine kernel: scale must be finite and >= 0");
                   if (!std::isfinite(k.beta) || std::abs(k.beta) > 1.0)
                     throw std::invalid_argument("cosine kernel: |beta| must be <= 1");
                 },
                 [](const GaussianKernel& k) {
                   if (!std::isfinite(k.amplitude) || k.amplitude < 0.0)
                     throw std::invalid_argument("gaussian kernel: amplitude must be finite and >= 0");
                   if (!(k.width > 0.0) || k.width > 0.25)
                     throw std::invalid_argument("gaussian kernel: width must lie in (0, 0.25]");
                 },
                 [](const TabulatedKernel& k) {
                   const std::size_t n = k.lattice.size();
                   if (k.values.size() != n * n)
                     throw std::invalid_argument("tabulated kernel: expected N*N values");
                   for (double v : k.values)
                     if (!std::isfinite(v) || v < 0.0)
                       throw std::invalid_argument("tabulated kernel: values must be finite and >= 0");
                 },
             },
             kernel);
}

}  // namespace

KernelSpec::KernelSpec(Variant kernel) : kernel_(std::move(kernel)) { validate(kernel_); }

KernelSpec KernelSpec::load_csv(const std::filesystem::path& path, const TorusLattice& lattice) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open kernel table " + path.string());
  const std::size_t n = lattice.size();
  TabulatedKernel table{lattice, std::vector<double>(n * n, 0.0)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || !std::isdigit(static_cast<unsigned char>(line[first])))
      continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    std::size_t x = 0, y = 0;
    double value = 0.0;
    if (!(row >> x >> y >> value))
      throw std::runtime_error("kernel table line " + std::to_string(line_no) + ": expected x,y,value");
    if (x >= n || y >= n)
      throw std::runtime_error("kernel table line " + std::to_string(line_no) + ": site index out of range");
    table.values[x * n + y] = value;
  }
  return KernelSpec(std::move(table));
}

std::string KernelSpec::name() const {
  return std::visit(Overloaded{
                        [](const ConstantKernel&) { return std::string("constant"); },
                        [](const CosineKernel&) { return std::string("cosine"); },
                        [](const GaussianKernel&) { return std::string("gaussian"); },
                        [](const TabulatedKernel&) { return std::string("tabulated"); },
                    },
                    kernel_);
}

std::optional<double> KernelSpec::constant_value() const {
  if (const auto* c = std::get_if<ConstantKernel>(&kernel_)) return c->value;
  return std::nullopt;
}

double KernelSpec::operator()(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw std::invalid_argument("kernel evaluation: dimension mismatch");
  return std::visit(Overloaded{
                        [](const ConstantKernel& k) { return k.value; },
                        [&](const CosineKernel& k) {
                          double v = k.scale;
                          for (std::size_t j = 0; j < x.size(); ++j) v *= cosine_factor(x[j] - y[j], k.beta);
                          return v;
                        },
                        [&](const GaussianKernel& k) {
                          double v = k.amplitude;
                          for (std::size_t j = 0; j < x.size(); ++j) {
                            const double off = std::remainder(x[j] - y[j], 1.0);
                            v *= gaussian_wrapped(off, k.width);
                          }
                          return v;
                        },
                        [](const TabulatedKernel&) -> double {
                          throw std::logic_error("tabulated kernels have no closed-form evaluation");
                        },
                    },
                    kernel_);
}

std::optional<double> KernelSpec::sup_norm(int dim) const {
  return std::visit(Overloaded{
                        [](const ConstantKernel& k) -> std::optional<double> { return k.value; },
                        [&](const CosineKernel& k) -> std::optional<double> {
                          return k.scale * std::pow(1.0 + std::abs(k.beta), dim);
                        },
                        [&](const GaussianKernel& k) -> std::optional<double> {
                          return k.amplitude * std::pow(gaussian_wrapped(0.0, k.width), dim);
                        },
                        [](const TabulatedKernel& k) -> std::optional<double> {
                          return k.values.empty() ? 0.0 : *std::max_element(k.values.begin(), k.values.end());
                        },
                    },
                    kernel_);
}

std::optional<double> KernelSpec::l1_norm(int dim) const {
  return std::visit(Overloaded{
                        [](const ConstantKernel& k) -> std::optional<double> { return k.value; },
                        [](const CosineKernel& k) -> std::optional<double> { return k.scale; },
                        [&](const GaussianKernel& k) -> std::optional<double> {
                          return k.amplitude * std::pow(k.width * std::sqrt(2.0 * std::numbers::pi), dim);
                        },
                        [](const TabulatedKernel&) -> std::optional<double> { return std::nullopt; },
                    },
                    kernel_);
}

std::optional<std::vector<double>> KernelSpec::offset_factors(int side) const {
  std::vector<double> phi(static_cast<std::size_t>(side));
  if (const auto* c = std::get_if<CosineKernel>(&kernel_)) {
    for (int o = 0; o < side; ++o) phi[static_cast<std::size_t>(o)] = cosine_factor(static_cast<double>(o) / side, c->beta);
    return phi;
  }
  if (const auto* g = std::get_if<GaussianKernel>(&kernel_)) {
    for (int o = 0; o < side; ++o)
      phi[static_cast<std::size_t>(o)] = gaussian_wrapped(std::remainder(static_cast<double>(o) / side, 1.0), g->width);
    return phi;
  }
  return std::nullopt;
}

double KernelSpec::prefactor() const {
  if (const auto* c = std::get_if<CosineKernel>(&kernel_)) return c->scale;
  if (const auto* g = std::get_if<GaussianKernel>(&kernel_)) return g->amplitude;
  if (const auto* c = std::get_if<ConstantKernel>(&kernel_)) return c->value;
  return 1.0;
}

DiscreteKernel::DiscreteKernel(const KernelSpec& spec, const TorusLattice& lattice, KernelStorage storage)
    : spec_(spec), lattice_(lattice) {
  const std::size_t n = lattice_.size();
  if (const auto* t = std::get_if<TabulatedKernel>(&spec_.kernel())) {
    if (!(t->lattice == lattice_))
      throw std::invalid_argument("tabulated kernel: lattice does not match the table");
    storage = KernelStorage::dense;
  }
  if (storage == KernelStorage::automatic)
    storage = n <= kDenseSiteLimit ? KernelStorage::dense : KernelStorage::on_the_fly;

  if (auto phi = spec_.offset_factors(lattice_.side())) {
    factors_ = std::move(*phi);
    prefactor_ = spec_.prefactor();
  }

  if (storage == KernelStorage::dense) {
    dense_.assign(n * n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        if (x != y) dense_[x * n + y] = evaluate(x, y);
  }

  // Exact row sums over the lattice; also validates every entry.
  for (std::size_t x = 0; x < n; ++x) {
    double row = 0.0;
    for (std::size_t y = 0; y < n; ++y) {
      const double v = (*this)(x, y);
      if (!std::isfinite(v) || v < 0.0)
        throw std::invalid_argument("discretize: kernel produced a negative or non-finite value");
      row += v;
      max_entry_ = std::max(max_entry_, v);
      if (symmetric_ && y < x && v != (*this)(y, x)) symmetric_ = false;
    }
    norm_1n_ = std::max(norm_1n_, row * lattice_.site_weight());
  }
  sup_norm_ = spec_.sup_norm(lattice_.dim()).value_or(max_entry_);
  sup_norm_ = std::max(sup_norm_, max_entry_);
}

double DiscreteKernel::evaluate(std::size_t x, std::size_t y) const {
  if (x == y) return 0.0;
  if (const auto c = spec_.constant_value()) return *c;
  if (const auto* t = std::get_if<TabulatedKernel>(&spec_.kernel())) return t->values[x * lattice_.size() + y];
  const int d = lattice_.dim();
  const auto side = static_cast<std::size_t>(lattice_.side());
  if (!factors_.empty()) {
    double v = prefactor_;
    for (int j = 0; j < d; ++j) {
      const std::size_t cx = x % side, cy = y % side;
      v *= factors_[(cx + side - cy) % side];
      x /= side;
      y /= side;
    }
    return v;
  }
  return spec_(lattice_.point(x), lattice_.point(y));
}

double DiscreteKernel::operator()(std::size_t x, std::size_t y) const {
  if (!dense_.empty()) return dense_[x * lattice_.size() + y];
  return evaluate(x, y);
}

void DiscreteKernel::conv(std::span<const double> g, std::span<double> out) const {
  const std::size_t n = lattice_.size();
  if (g.size() != n || out.size() != n)
    throw std::invalid_argument("conv: field size does not match the lattice");
  const double w = lattice_.site_weight();
  if (!dense_.empty()) {
    for (std::size_t x = 0; x < n; ++x) {
      const double* row = dense_.data() + x * n;
      double acc = 0.0;
      for (std::size_t y = 0; y < n; ++y) acc += row[y] * g[y];
      out[x] = w * acc;
    }
    return;
  }
  if (const auto c = spec_.constant_value()) {
    double total = 0.0;
    for (double v : g) total += v;
    for (std::size_t x = 0; x < n; ++x) out[x] = w * *c * (total - g[x]);
    return;
  }
  if (!factors_.empty() && lattice_.dim() == 1) {
    // circulant: phi[(x - y) mod n], with phi[0] dropped for the zero diagonal
    const double* phi = factors_.data();
    for (std::size_t x = 0; x < n; ++x) {
      double acc = 0.0;
      for (std::size_t y = 0; y < x; ++y) acc += phi[x - y] * g[y];
      for (std::size_t y = x + 1; y < n; ++y) acc += phi[n + x - y] * g[y];
      out[x] = w * prefactor_ * acc;
    }
    return;
  }
  for (std::size_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::size_t y = 0; y < n; ++y) acc += evaluate(x, y) * g[y];
    out[x] = w * acc;
  }
}

std::vector<double> DiscreteKernel::conv(std::span<const double> g) const {
  std::vector<double> out(lattice_.size());
  conv(g, out);
  return out;
}

void DiscreteKernel::conv_adjoint(std::span<const double> g, std::span<double> out) const {
  const std::size_t n = lattice_.size();
  if (g.size() != n || out.size() != n)
    throw std::invalid_argument("conv_adjoint: field size does not match the lattice");
  if (symmetric_) {
    conv(g, out);
    return;
  }
  const double w = lattice_.site_weight();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t y = 0; y < n; ++y) {
    if (g[y] == 0.0) continue;
    for (std::size_t x = 0; x < n; ++x) out[x] += (*this)(y, x) * g[y];
  }
  for (auto& v : out) v *= w;
}

std::vector<double> DiscreteKernel::conv_adjoint(std::span<const double> g) const {
  std::vector<double> out(lattice_.size());
  conv_adjoint(g, out);
  return out;
}

void DiscreteKernel::add_column(std::size_t y, double weight, std::span<double> field) const {
  const std::size_t n = lattice_.size();
  if (field.size() != n) throw std::invalid_argument("add_column: field size does not match the lattice");
  const double scale = weight * lattice_.site_weight();
  if (!dense_.empty()) {
    if (symmetric_) {
      const double* row = dense_.data() + y * n;
      for (std::size_t x = 0; x < n; ++x) field[x] += scale * row[x];
    } else {
      for (std::size_t x = 0; x < n; ++x) field[x] += scale * dense_[x * n + y];
    }
    return;
  }
  if (!factors_.empty() && lattice_.dim() == 1) {
    const double* phi = factors_.data();
    const double sp = scale * prefactor_;
    for (std::size_t x = 0; x < y; ++x) field[x] += sp * phi[n + x - y];
    for (std::size_t x = y + 1; x < n; ++x) field[x] += sp * phi[x - y];
    return;
  }
  for (std::size_t x = 0; x < n; ++x) field[x] += scale * evaluate(x, y);
}

DiscreteKernel discretize(const KernelSpec& spec, const TorusLattice& lattice, KernelStorage storage) {
  return DiscreteKernel(spec, lattice, storage);
}

}  // namespace gcph
