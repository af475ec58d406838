#include "gcph/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gcph {

namespace {

constexpr std::size_t kMinReplicas = 10000;

void check_replicas(std::size_t replicas) {
  if (replicas < kMinReplicas) throw std::invalid_argument("concentration check: replicas must be >= 10^4");
}

/// Mean of values with its standard error.
void mean_and_se(std::span<const double> v, double& mean, double& se) {
  const auto n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  se = std::sqrt(ss / (n - 1.0) / n);
}

/// log of the empirical MGF with a delta-method SE.
InequalityRow log_mgf_row(std::span<const double> samples, double theta, double bound) {
  std::vector<double> e(samples.size());
  std::transform(samples.begin(), samples.end(), e.begin(), [&](double x) { return std::exp(theta * x); });
  double mean = 0.0, se = 0.0;
  mean_and_se(e, mean, se);
  return {theta, std::log(mean), se / mean, bound};
}

}  // namespace

BoundedSampler BoundedSampler::centered_indicator(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("centered_indicator: p must be in [0, 1]");
  return BoundedSampler(Kind::indicator, "indicator(" + std::to_string(p) + ")", -p, 1.0 - p, p);
}

BoundedSampler BoundedSampler::rademacher() { return BoundedSampler(Kind::rademacher, "rademacher", -1.0, 1.0, 0.0); }

BoundedSampler BoundedSampler::zero() { return BoundedSampler(Kind::zero, "zero", 0.0, 0.0, 0.0); }

BoundedSampler BoundedSampler::centered_uniform(double half_width) {
  if (!(half_width >= 0.0)) throw std::invalid_argument("centered_uniform: half width must be >= 0");
  return BoundedSampler(Kind::uniform, "uniform(" + std::to_string(half_width) + ")", -half_width, half_width,
                        half_width);
}

double BoundedSampler::sample(RandomStream& rng) const {
  switch (kind_) {
    case Kind::indicator:
      return (rng.uniform() < param_ ? 1.0 : 0.0) - param_;
    case Kind::rademacher:
      return (rng.next_u32() & 1u) ? 1.0 : -1.0;
    case Kind::zero:
      return 0.0;
    case Kind::uniform:
      return param_ * (2.0 * rng.uniform() - 1.0);
  }
  return 0.0;
}

void BoundedSampler::check(double v) const {
  if (!(v >= lower_ && v <= upper_)) throw std::range_error("sampler " + name_ + " produced a value outside its range");
}

std::vector<double> log_theta_grid(std::size_t points, double lo, double hi) {
  if (points < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("log_theta_grid: bad arguments");
  std::vector<double> out(points);
  const double step = std::log(hi / lo) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) out[i] = lo * std::exp(step * static_cast<double>(i));
  out.back() = hi;
  return out;
}

bool InequalityReport::passed() const {
  return std::all_of(rows.begin(), rows.end(), [](const InequalityRow& r) { return r.pass(); });
}

namespace {

std::vector<double> draw(const BoundedSampler& sampler, std::size_t replicas, RandomStream& rng) {
  std::vector<double> out(replicas);
  for (auto& v : out) {
    v = sampler.sample(rng);
    sampler.check(v);
  }
  return out;
}

}  // namespace

InequalityReport check_hoeffding(const BoundedSampler& sampler, std::span<const double> thetas, std::size_t replicas,
                                 RandomStream& rng) {
  check_replicas(replicas);
  const auto samples = draw(sampler, replicas, rng);
  InequalityReport r{"hoeffding", sampler.name(), replicas, {}};
  const double a = sampler.range_length();
  for (double theta : thetas)
    for (double signed_theta : {theta, -theta})
      r.rows.push_back(log_mgf_row(samples, signed_theta, theta * theta * a * a / 8.0));
  return r;
}

InequalityReport check_quad(const BoundedSampler& sampler, std::size_t replicas, RandomStream& rng) {
  check_replicas(replicas);
  const auto samples = draw(sampler, replicas, rng);
  const double psi2 = sampler.psi2_bound();
  const double gamma = psi2 > 0.0 ? 1.0 / (4.0 * psi2 * psi2) : 1.0;
  std::vector<double> e(samples.size());
  std::transform(samples.begin(), samples.end(), e.begin(), [&](double x) { return std::exp(gamma * x * x); });
  double mean = 0.0, se = 0.0;
  mean_and_se(e, mean, se);
  return {"quad", sampler.name(), replicas, {{gamma, mean, se, 3.0}}};
}

PairSampler PairSampler::independent(BoundedSampler x, BoundedSampler y) {
  PairSampler p(Kind::independent, "independent(" + x.name() + "," + y.name() + ")", x, y);
  p.x_index_ = x.psi2_bound() * x.psi2_bound();
  p.y_index_ = y.psi2_bound() * y.psi2_bound();
  return p;
}

PairSampler PairSampler::identical(BoundedSampler x) {
  PairSampler p(Kind::identical, "identical(" + x.name() + ")", x, x);
  p.x_index_ = p.y_index_ = x.psi2_bound() * x.psi2_bound();
  return p;
}

PairSampler PairSampler::categorical(std::vector<double> u, int i, int j) {
  const int states = static_cast<int>(u.size());
  if (states < 2 || i < 0 || i >= states || j < 0 || j >= states)
    throw std::invalid_argument("categorical pair: bad state indices");
  double total = 0.0;
  for (double v : u) {
    if (!(v >= 0.0)) throw std::invalid_argument("categorical pair: negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("categorical pair: probabilities must sum to 1");
  const auto ui = u[static_cast<std::size_t>(i)];
  const auto uj = u[static_cast<std::size_t>(j)];
  PairSampler p(Kind::categorical, "categorical(" + std::to_string(i) + "," + std::to_string(j) + ")",
                BoundedSampler::centered_indicator(ui), BoundedSampler::centered_indicator(uj));
  p.probs_ = std::move(u);
  p.i_ = i;
  p.j_ = j;
  p.x_index_ = p.x_.psi2_bound() * p.x_.psi2_bound();
  p.y_index_ = p.y_.psi2_bound() * p.y_.psi2_bound();
  return p;
}

void PairSampler::sample(RandomStream& rng, double& x, double& y) const {
  switch (kind_) {
    case Kind::independent:
      x = x_.sample(rng);
      y = y_.sample(rng);
      break;
    case Kind::identical:
      x = y = x_.sample(rng);
      break;
    case Kind::categorical: {
      const double r = rng.uniform();
      double acc = 0.0;
      int s = static_cast<int>(probs_.size()) - 1;
      for (std::size_t m = 0; m + 1 < probs_.size(); ++m) {
        acc += probs_[m];
        if (r < acc) {
          s = static_cast<int>(m);
          break;
        }
      }
      x = (s == i_ ? 1.0 : 0.0) - probs_[static_cast<std::size_t>(i_)];
      y = (s == j_ ? 1.0 : 0.0) - probs_[static_cast<std::size_t>(j_)];
      break;
    }
  }
  x_.check(x);
  y_.check(y);
}

double hanson_wright_gamma(std::span<const double> g, std::size_t size, double x_index, double y_index) {
  if (g.size() != size * size) throw std::invalid_argument("hanson_wright_gamma: g must be size x size");
  double s = 0.0;
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      if (i != j) s += x_index * y_index * g[i * size + j] * g[i * size + j];
  return s > 0.0 ? 1.0 / std::sqrt(1024.0 * s) : std::numeric_limits<double>::infinity();
}

InequalityReport check_hanson_wright(std::size_t size, std::span<const double> g, const PairSampler& pairs,
                                     std::size_t replicas, RandomStream& rng) {
  check_replicas(replicas);
  if (g.size() != size * size) throw std::invalid_argument("check_hanson_wright: g must be size x size");
  for (std::size_t i = 0; i < size; ++i)
    if (g[i * size + i] != 0.0) throw std::invalid_argument("check_hanson_wright: g must have a zero diagonal");
  double gamma = hanson_wright_gamma(g, size, pairs.x_index(), pairs.y_index());
  if (!std::isfinite(gamma)) gamma = 1.0;

  std::vector<double> xs(size), ys(size), e(replicas);
  for (auto& v : e) {
    for (std::size_t i = 0; i < size; ++i) pairs.sample(rng, xs[i], ys[i]);
    double q = 0.0;
    for (std::size_t i = 0; i < size; ++i)
      for (std::size_t j = 0; j < size; ++j) q += g[i * size + j] * xs[i] * ys[j];
    v = std::exp(gamma * q);
  }
  double mean = 0.0, se = 0.0;
  mean_and_se(e, mean, se);
  return {"hanson-wright", pairs.name(), replicas, {{gamma, mean, se, 3.0}}};
}

std::vector<double> random_sign_matrix(std::size_t size, RandomStream& rng) {
  std::vector<double> g(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i)
    for (std::size_t j = 0; j < size; ++j)
      if (i != j) g[i * size + j] = (rng.next_u32() & 1u) ? 1.0 : -1.0;
  return g;
}

InequalityReport check_psi2_sum(const BoundedSampler& x, const BoundedSampler& y, std::span<const double> thetas,
                                std::size_t replicas, RandomStream& rng) {
  check_replicas(replicas);
  std::vector<double> sums(replicas);
  for (auto& v : sums) {
    const double a = x.sample(rng);
    const double b = y.sample(rng);
    x.check(a);
    y.check(b);
    v = a + b;
  }
  const double index = x.psi2_bound() * x.psi2_bound() + y.psi2_bound() * y.psi2_bound();
  InequalityReport r{"psi2-sum", x.name() + "+" + y.name(), replicas, {}};
  for (double theta : thetas)
    for (double signed_theta : {theta, -theta})
      r.rows.push_back(log_mgf_row(sums, signed_theta, 0.5 * theta * theta * index));
  return r;
}

DonskerVaradhan donsker_varadhan(std::span<const double> mu, std::span<const double> f, std::span<const double> g,
                                 double gamma) {
  if (mu.size() != f.size() || mu.size() != g.size() || mu.empty())
    throw std::invalid_argument("donsker_varadhan: length mismatch");
  if (!(gamma > 0.0)) throw std::invalid_argument("donsker_varadhan: gamma must be > 0");
  double mass = 0.0, density = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!(mu[i] >= 0.0) || !(f[i] >= 0.0)) throw std::invalid_argument("donsker_varadhan: negative weight");
    mass += mu[i];
    density += f[i] * mu[i];
  }
  if (std::abs(mass - 1.0) > 1e-12 || std::abs(density - 1.0) > 1e-12)
    throw std::invalid_argument("donsker_varadhan: mu and f mu must be probability measures");
  DonskerVaradhan out;
  double entropy = 0.0, mgf = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out.lhs += g[i] * f[i] * mu[i];
    if (f[i] > 0.0) entropy += f[i] * std::log(f[i]) * mu[i];
    mgf += std::exp(gamma * g[i]) * mu[i];
  }
  out.rhs = (entropy + std::log(mgf)) / gamma;
  return out;
}

}  // namespace gcph
