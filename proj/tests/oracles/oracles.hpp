#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the incremental or matrix-free code paths it checks.

#include <cmath>
#include <cstddef>
#include <vector>

#include "gcph/kernel.hpp"
#include "gcph/lattice.hpp"

namespace gcph::oracle {

/// (J^n * g)_x by direct evaluation of the continuum kernel at x/n, y/n.
inline std::vector<double> brute_conv(const KernelSpec& spec, const TorusLattice& lattice, const std::vector<double>& g) {
  const std::size_t n = lattice.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto px = lattice.point(x);
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      out[x] += spec(px, lattice.point(y)) * g[y];
    }
    out[x] /= static_cast<double>(n);
  }
  return out;
}

/// Site rates of the contact process from the definition.
inline std::vector<double> brute_rates(const std::vector<int>& sigma, int k, double a, const KernelSpec& spec,
                                       const TorusLattice& lattice) {
  const std::size_t n = lattice.size();
  std::vector<double> r(n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    if (sigma[x] == k) {
      r[x] = a;
      continue;
    }
    for (std::size_t y = 0; y < n; ++y)
      if (y != x && sigma[y] == k) r[x] += spec(lattice.point(x), lattice.point(y));
    r[x] /= static_cast<double>(n);
  }
  return r;
}

/// Mean-field solution for k = 1 and constant kernel c on N sites with the
/// self-interaction removed: du/dt = cbar u (1 - u) - a u, cbar = c (N - 1) / N.
inline double logistic_active(double u0, double c, double a, std::size_t sites, double t) {
  const double cbar = c * static_cast<double>(sites - 1) / static_cast<double>(sites);
  const double r = cbar - a;
  if (std::abs(r) < 1e-14) return u0 / (1.0 + cbar * u0 * t);
  return r * u0 / (cbar * u0 + (r - cbar * u0) * std::exp(-r * t));
}

/// exp(Q t) applied to p (row vector convention: p' = p Q) by scaling and squaring of a Taylor series.
inline std::vector<double> expm_apply(const std::vector<double>& q, std::size_t m, const std::vector<double>& p,
                                      double t) {
  double norm = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < m; ++j) row += std::abs(q[i * m + j]);
    norm = std::max(norm, row);
  }
  int squarings = 0;
  while (norm * t / std::pow(2.0, squarings) > 0.5) ++squarings;
  const double h = t / std::pow(2.0, squarings);
  std::vector<double> e(m * m, 0.0), term(m * m, 0.0), next(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i) e[i * m + i] = term[i * m + i] = 1.0;
  for (int order = 1; order <= 30; ++order) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l)
        for (std::size_t j = 0; j < m; ++j) next[i * m + j] += term[i * m + l] * q[l * m + j] * h / order;
    term.swap(next);
    for (std::size_t i = 0; i < m * m; ++i) e[i] += term[i];
  }
  for (int s = 0; s < squarings; ++s) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l)
        for (std::size_t j = 0; j < m; ++j) next[i * m + j] += e[i * m + l] * e[l * m + j];
    e.swap(next);
  }
  std::vector<double> out(m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) out[j] += p[i] * e[i * m + j];
  return out;
}

/// Dense generator of the contact process on all (k+1)^N configurations,
/// site 0 the least significant base-(k+1) digit.
inline std::vector<double> dense_generator(int k, double a, const KernelSpec& spec, const TorusLattice& lattice,
                                           std::size_t& states) {
  const std::size_t n = lattice.size();
  const auto base = static_cast<std::size_t>(k + 1);
  states = 1;
  for (std::size_t x = 0; x < n; ++x) states *= base;
  std::vector<double> q(states * states, 0.0);
  std::vector<int> sigma(n);
  for (std::size_t s = 0; s < states; ++s) {
    std::size_t rest = s;
    for (std::size_t x = 0; x < n; ++x) {
      sigma[x] = static_cast<int>(rest % base);
      rest /= base;
    }
    const auto r = brute_rates(sigma, k, a, spec, lattice);
    for (std::size_t x = 0; x < n; ++x) {
      auto next = sigma;
      next[x] = (sigma[x] + 1) % (k + 1);
      std::size_t t = 0, pv = 1;
      for (std::size_t y = 0; y < n; ++y) {
        t += static_cast<std::size_t>(next[y]) * pv;
        pv *= base;
      }
      q[s * states + t] += r[x];
      q[s * states + s] -= r[x];
    }
  }
  return q;
}

}  // namespace gcph::oracle
