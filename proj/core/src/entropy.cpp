#include "gcph/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gcph {

StateSpace::StateSpace(TorusLattice lattice, int threshold) : lattice_(lattice), threshold_(threshold) {
  if (threshold < 1) throw std::invalid_argument("StateSpace: threshold must be >= 1");
  const auto base = static_cast<std::size_t>(threshold + 1);
  place_.reserve(lattice.size());
  for (std::size_t x = 0; x < lattice.size(); ++x) {
    place_.push_back(size_);
    if (size_ > kMaxStates / base) throw std::length_error("StateSpace: more than 2^20 configurations");
    size_ *= base;
  }
}

void StateSpace::decode(std::size_t index, std::span<int> out) const {
  if (index >= size_ || out.size() != sites()) throw std::out_of_range("StateSpace::decode");
  const auto base = static_cast<std::size_t>(threshold_ + 1);
  for (auto& s : out) {
    s = static_cast<int>(index % base);
    index /= base;
  }
}

SpinConfig StateSpace::config(std::size_t index) const {
  std::vector<int> states(sites());
  decode(index, states);
  return SpinConfig(lattice_, threshold_, std::move(states));
}

std::size_t StateSpace::encode(std::span<const int> states) const {
  if (states.size() != sites()) throw std::invalid_argument("StateSpace::encode: wrong length");
  std::size_t index = 0;
  for (std::size_t x = 0; x < states.size(); ++x) {
    if (states[x] < 0 || states[x] > threshold_) throw std::invalid_argument("StateSpace::encode: state out of range");
    index += static_cast<std::size_t>(states[x]) * place_[x];
  }
  return index;
}

void check_law(std::span<const double> law) {
  double total = 0.0;
  for (double v : law) {
    if (!(v >= -1e-12)) throw std::domain_error("law has negative mass beyond the clamp tolerance");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::domain_error("law does not sum to 1");
}

LawVector point_law(const StateSpace& space, const SpinConfig& sigma) {
  LawVector law(space.size(), 0.0);
  law[space.encode(sigma)] = 1.0;
  return law;
}

double profile_prob(std::span<const int> sigma, const DensityField& u) {
  if (sigma.size() != u.sites()) throw std::invalid_argument("profile_prob: wrong configuration length");
  double p = 1.0;
  for (std::size_t x = 0; x < sigma.size(); ++x) p *= u(x, sigma[x]);
  return p;
}

double profile_prob(const SpinConfig& sigma, const DensityField& u) { return profile_prob(sigma.states(), u); }

LawVector profile_law(const StateSpace& space, const DensityField& u) {
  if (!(space.lattice() == u.lattice()) || space.threshold() != u.threshold())
    throw std::invalid_argument("profile_law: shape mismatch");
  LawVector law(space.size());
  std::vector<int> sigma(space.sites());
  for (std::size_t s = 0; s < space.size(); ++s) {
    space.decode(s, sigma);
    law[s] = profile_prob(sigma, u);
  }
  return law;
}

namespace {

/// Per-site rates of one configuration.
void config_rates(std::span<const int> sigma, const ModelParams& p, std::span<double> rates) {
  const std::size_t n = sigma.size();
  const double w = p.lattice().site_weight();
  const auto& kernel = *p.kernel;
  for (std::size_t x = 0; x < n; ++x) {
    if (sigma[x] == p.threshold) {
      rates[x] = p.recovery_rate;
      continue;
    }
    double in = 0.0;
    for (std::size_t y = 0; y < n; ++y)
      if (sigma[y] == p.threshold) in += kernel(x, y);
    rates[x] = in * w;
  }
}

class Generator {
 public:
  static constexpr std::size_t kCacheLimit = std::size_t{1} << 22;

  Generator(const StateSpace& space, const ModelParams& p) : space_(space), params_(p) {
    const std::size_t n = space.sites();
    if (space.size() * n > kCacheLimit) return;
    rates_.resize(space.size() * n);
    std::vector<int> sigma(n);
    for (std::size_t s = 0; s < space.size(); ++s) {
      space.decode(s, sigma);
      config_rates(sigma, p, std::span<double>(rates_).subspan(s * n, n));
    }
  }

  /// out = L* law (forward equation right-hand side).
  void apply(std::span<const double> law, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    const std::size_t n = space_.sites();
    const int k = space_.threshold();
    std::vector<int> sigma(n);
    std::vector<double> local(n);
    for (std::size_t s = 0; s < space_.size(); ++s) {
      const double mass = law[s];
      if (mass == 0.0) continue;
      space_.decode(s, sigma);
      std::span<const double> rates;
      if (rates_.empty()) {
        config_rates(sigma, params_, local);
        rates = local;
      } else {
        rates = std::span<const double>(rates_).subspan(s * n, n);
      }
      for (std::size_t x = 0; x < n; ++x) {
        const double flow = mass * rates[x];
        const std::size_t place = space_.place_value(x);
        const std::size_t target = sigma[x] == k ? s - static_cast<std::size_t>(k) * place : s + place;
        out[s] -= flow;
        out[target] += flow;
      }
    }
  }

 private:
  const StateSpace& space_;
  const ModelParams& params_;
  std::vector<double> rates_;
};

}  // namespace

LawTrajectory master_evolve(const StateSpace& space, const LawVector& initial, const ModelParams& p, double t_end,
                            double h, bool keep_trajectory) {
  p.validate();
  if (!(space.lattice() == p.lattice()) || space.threshold() != p.threshold)
    throw std::invalid_argument("master_evolve: state space does not match the model");
  if (initial.size() != space.size()) throw std::invalid_argument("master_evolve: law has the wrong length");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("master_evolve: t_end must be >= 0");
  if (!(h > 0.0)) throw std::invalid_argument("master_evolve: step must be > 0");
  check_law(initial);

  const Generator gen(space, p);
  const std::size_t m = space.size();
  LawVector law = initial;
  std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);

  LawTrajectory out;
  out.times.push_back(0.0);
  out.laws.push_back(law);
  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil(t_end / h - 1e-9)));
  double t = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const double t_next = (s + 1 == steps) ? t_end : static_cast<double>(s + 1) * h;
    const double dt = t_next - t;
    gen.apply(law, k1);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = law[i] + 0.5 * dt * k1[i];
    gen.apply(tmp, k2);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = law[i] + 0.5 * dt * k2[i];
    gen.apply(tmp, k3);
    for (std::size_t i = 0; i < m; ++i) tmp[i] = law[i] + dt * k3[i];
    gen.apply(tmp, k4);
    for (std::size_t i = 0; i < m; ++i) {
      law[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    check_law(law);
    for (auto& v : law) v = std::max(v, 0.0);
    t = t_next;
    if (keep_trajectory || s + 1 == steps) {
      out.times.push_back(t);
      out.laws.push_back(law);
    }
  }
  return out;
}

double relative_entropy(std::span<const double> law, std::span<const double> reference) {
  if (law.size() != reference.size()) throw std::invalid_argument("relative_entropy: length mismatch");
  double h = 0.0;
  for (std::size_t i = 0; i < law.size(); ++i) {
    if (law[i] <= 0.0) continue;
    if (!(reference[i] > 0.0)) throw std::domain_error("relative_entropy: law is not absolutely continuous");
    h += law[i] * std::log(law[i] / reference[i]);
  }
  return h;
}

double relative_entropy(const StateSpace& space, std::span<const double> law, const DensityField& u) {
  return relative_entropy(law, profile_law(space, u));
}

namespace {

void check_integrand_inputs(std::span<const int> sigma, const DensityField& u, const ModelParams& p) {
  if (!p.kernel) throw std::invalid_argument("entropy integrand: kernel is missing");
  if (!(u.lattice() == p.lattice()) || u.threshold() != p.threshold)
    throw std::invalid_argument("entropy integrand: density does not match the model");
  if (sigma.size() != u.sites()) throw std::invalid_argument("entropy integrand: wrong configuration length");
  for (double v : u.values())
    if (!(v > 0.0)) throw std::domain_error("entropy integrand: density has a vanishing component");
}

}  // namespace

double entropy_integrand_direct(std::span<const int> sigma, const DensityField& u, const DensityField& du,
                                const ModelParams& p) {
  check_integrand_inputs(sigma, u, p);
  if (!(du.lattice() == u.lattice()) || du.threshold() != u.threshold())
    throw std::invalid_argument("entropy integrand: derivative shape mismatch");
  const int k = p.threshold;
  const std::size_t n = sigma.size();
  std::vector<double> rates(n);
  config_rates(sigma, p, rates);

  double adjoint = 0.0;
  double log_derivative = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const int s = sigma[x];
    const int prev = s == 0 ? k : s - 1;
    // Moving x back one step leaves every other site, hence I_x, unchanged.
    double back_rate = p.recovery_rate;
    if (prev != k) {
      double in = 0.0;
      for (std::size_t y = 0; y < n; ++y)
        if (y != x && sigma[y] == k) in += (*p.kernel)(x, y);
      back_rate = in * p.lattice().site_weight();
    }
    adjoint += back_rate * u(x, prev) / u(x, s) - rates[x];
    log_derivative += du(x, s) / u(x, s);
  }
  return adjoint - log_derivative;
}

double entropy_integrand_closed(std::span<const int> sigma, const DensityField& u, const ModelParams& p) {
  check_integrand_inputs(sigma, u, p);
  const int k = p.threshold;
  const std::size_t n = sigma.size();
  std::vector<double> wk(n);
  for (std::size_t y = 0; y < n; ++y) wk[y] = (sigma[y] == k ? 1.0 : 0.0) - u(y, k);
  const auto conv = p.kernel->conv(wk);
  double total = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double gw = 0.0;
    for (int i = 0; i <= k; ++i) {
      double g = 0.0;
      if (i == k) {
        g = u(x, k - 1) / u(x, k);
      } else if (i == 0) {
        g = -1.0;
      } else {
        g = (u(x, i - 1) - u(x, i)) / u(x, i);
      }
      gw += g * ((sigma[x] == i ? 1.0 : 0.0) - u(x, i));
    }
    total += gw * conv[x];
  }
  return total;
}

double entropy_envelope(double c, double t) { return c * std::expm1(c * std::expm1(c * t)); }

double envelope_constant_for(double value, double t) {
  if (!(value > 0.0)) return 0.0;
  if (!(t > 0.0)) return std::numeric_limits<double>::infinity();
  double lo = 0.0;
  double hi = 1.0;
  while (entropy_envelope(hi, t) < value) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (entropy_envelope(mid, t) < value ? lo : hi) = mid;
  }
  return hi;
}

bool EntropyReport::starts_at_zero() const { return !entropy.empty() && entropy.front() == 0.0; }

bool EntropyReport::nonnegative() const {
  return std::all_of(entropy.begin(), entropy.end(), [](double h) { return h >= -1e-14; });
}

namespace {

/// Derivative at `at` of the quadratic through three points.
double quadratic_derivative(const double* t, const double* f, double at) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) {
    double denom = 1.0;
    double numer = 0.0;
    for (int j = 0; j < 3; ++j) {
      if (j == i) continue;
      denom *= t[i] - t[j];
      double term = 1.0;
      for (int m = 0; m < 3; ++m)
        if (m != i && m != j) term *= at - t[m];
      numer += term;
    }
    d += f[i] * numer / denom;
  }
  return d;
}

}  // namespace

EntropyReport entropy_production_check(const ModelParams& p, const DensityField& u0, double t_end, double h,
                                       double fit_time) {
  p.validate();
  const StateSpace space(p.lattice(), p.threshold);
  IntegrateOptions opts;
  opts.step = h;
  const Trajectory traj = integrate(u0, p, t_end, opts);
  const LawTrajectory laws = master_evolve(space, profile_law(space, u0), p, t_end, h);
  if (laws.times.size() != traj.times.size()) throw std::logic_error("entropy check: grids differ");
  if (laws.times.size() < 3) throw std::invalid_argument("entropy check: need at least two steps");

  EntropyReport r;
  r.times = traj.times;
  r.step = h;
  r.tolerance = 10.0 * h;
  r.fit_time = fit_time;
  const std::size_t m = r.times.size();
  std::vector<int> sigma(space.sites());
  for (std::size_t j = 0; j < m; ++j) {
    const auto& u = traj.states[j];
    const auto& du = traj.rates[j];
    const auto& law = laws.laws[j];
    r.entropy.push_back(relative_entropy(law, profile_law(space, u)));
    double prod = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s) {
      space.decode(s, sigma);
      const double direct = entropy_integrand_direct(sigma, u, du, p);
      r.closed_form_gap = std::max(r.closed_form_gap, std::abs(direct - entropy_integrand_closed(sigma, u, p)));
      prod += law[s] * direct;
    }
    r.production.push_back(prod);
  }

  r.derivative.resize(m);
  r.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t c = std::clamp<std::size_t>(j, 1, m - 2);
    r.derivative[j] = quadratic_derivative(&r.times[c - 1], &r.entropy[c - 1], r.times[j]);
    r.max_excess = std::max(r.max_excess, r.derivative[j] - r.production[j]);
  }

  std::size_t fit_index = 0;
  for (std::size_t j = 0; j < m; ++j) {
    r.envelope_constant = std::max(r.envelope_constant, envelope_constant_for(r.entropy[j], r.times[j]));
    if (std::abs(r.times[j] - fit_time) < std::abs(r.times[fit_index] - fit_time)) fit_index = j;
  }
  for (double t : r.times) r.envelope.push_back(entropy_envelope(r.envelope_constant, t));
  r.fit_constant = envelope_constant_for(r.entropy[fit_index], r.times[fit_index]);
  r.fit_envelope_dominates = true;
  for (std::size_t j = 0; j < m; ++j)
    if (r.entropy[j] > entropy_envelope(r.fit_constant, r.times[j]) * (1.0 + 1e-12)) r.fit_envelope_dominates = false;
  return r;
}

}  // namespace gcph
