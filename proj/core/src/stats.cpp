#include "gcph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gcph {

std::vector<double> gamma_matrix(std::span<const double> ux, double intensity, double recovery_rate) {
  const int states = static_cast<int>(ux.size());
  const int k = states - 1;
  if (k < 1) throw std::invalid_argument("gamma_matrix: need at least two states");
  const double a = recovery_rate;
  const double in = intensity;
  const auto u = [&](int i) { return ux[static_cast<std::size_t>(i)]; };
  std::vector<double> g(static_cast<std::size_t>(states * states), 0.0);
  const auto at = [&](int i, int j) -> double& { return g[static_cast<std::size_t>(i * states + j)]; };

  for (int i = 0; i <= k; ++i) {
    if (i == k) {
      at(i, i) = a * u(k) + in * u(k - 1);
    } else if (i == 0) {
      at(i, i) = a * u(k) + in * u(0);
    } else {
      at(i, i) = in * (u(i - 1) + u(i));
    }
  }
  const auto add_sym = [&](int i, int j, double v) {
    at(i, j) += v;
    at(j, i) += v;
  };
  add_sym(k, 0, -a * u(k));
  for (int i = 0; i < k; ++i) add_sym(i, i + 1, -in * u(i));
  return g;
}

GammaField::GammaField(TorusLattice lattice, int threshold)
    : lattice_(lattice),
      threshold_(threshold),
      values_(lattice.size() * static_cast<std::size_t>((threshold + 1) * (threshold + 1)), 0.0) {
  if (threshold < 1) throw std::invalid_argument("GammaField: threshold must be >= 1");
}

double GammaField::quadratic_form(std::size_t x, std::span<const double> v) const {
  if (v.size() != static_cast<std::size_t>(states())) throw std::invalid_argument("quadratic_form: wrong length");
  const auto m = site(x);
  double q = 0.0;
  for (int i = 0; i < states(); ++i)
    for (int j = 0; j < states(); ++j)
      q += v[static_cast<std::size_t>(i)] * m[index(i, j)] * v[static_cast<std::size_t>(j)];
  return q;
}

GammaField gamma_field(const DensityField& u, const ModelParams& p) {
  if (!(u.lattice() == p.lattice()) || u.threshold() != p.threshold)
    throw std::invalid_argument("gamma_field: density does not match the model");
  const auto intensity = p.kernel->conv(u.component(p.threshold));
  GammaField out(u.lattice(), u.threshold());
  for (std::size_t x = 0; x < u.sites(); ++x) {
    const auto m = gamma_matrix(u.site(x), intensity[x], p.recovery_rate);
    std::copy(m.begin(), m.end(), out.site(x).begin());
  }
  return out;
}

double predicted_initial_cov(const DensityField& u0, std::span<const double> f, std::span<const double> g, int i,
                             int j) {
  if (f.size() != u0.sites() || g.size() != u0.sites())
    throw std::invalid_argument("predicted_initial_cov: test function values do not match the lattice");
  if (i < 0 || i > u0.threshold() || j < 0 || j > u0.threshold())
    throw std::invalid_argument("predicted_initial_cov: state index out of range");
  double s = 0.0;
  for (std::size_t x = 0; x < u0.sites(); ++x) {
    const double c = i == j ? u0(x, i) * (1.0 - u0(x, i)) : -u0(x, i) * u0(x, j);
    s += f[x] * g[x] * c;
  }
  return s * u0.lattice().site_weight();
}

double predicted_initial_cov(const DensityField& u0, const TestFunction& f, const TestFunction& g, int i, int j) {
  return predicted_initial_cov(u0, f.values(u0.lattice()), g.values(u0.lattice()), i, j);
}

double initial_variance(const DensityField& u0, const DensityField& phi) {
  if (!(phi.lattice() == u0.lattice()) || phi.threshold() != u0.threshold())
    throw std::invalid_argument("initial_variance: shape mismatch");
  double total = 0.0;
  for (int i = 0; i < u0.states(); ++i) {
    const auto fi = phi.component(i);
    for (int j = 0; j < u0.states(); ++j) total += predicted_initial_cov(u0, fi, phi.component(j), i, j);
  }
  return total;
}

MildVariance predicted_variance_mild(std::span<const double> f, int i, double t, const Trajectory& trajectory,
                                     const ModelParams& p) {
  if (trajectory.times.empty() || !trajectory.complete()) throw std::invalid_argument("mild variance: incomplete trajectory");
  const auto& u0 = trajectory.states.front();
  if (f.size() != u0.sites()) throw std::invalid_argument("mild variance: test function values do not match the lattice");
  if (i < 0 || i > p.threshold) throw std::invalid_argument("mild variance: state index out of range");

  std::size_t last = trajectory.times.size();
  for (std::size_t j = 0; j < trajectory.times.size(); ++j)
    if (std::abs(trajectory.times[j] - t) <= 1e-12 * std::max(1.0, std::abs(t))) last = j;
  if (last == trajectory.times.size()) throw std::invalid_argument("mild variance: t is not a trajectory grid time");

  Trajectory head;
  head.step = trajectory.step;
  head.initial_floor = trajectory.initial_floor;
  head.floor_rate = trajectory.floor_rate;
  head.times.assign(trajectory.times.begin(), trajectory.times.begin() + static_cast<std::ptrdiff_t>(last + 1));
  head.states.assign(trajectory.states.begin(), trajectory.states.begin() + static_cast<std::ptrdiff_t>(last + 1));
  head.rates.assign(trajectory.rates.begin(), trajectory.rates.begin() + static_cast<std::ptrdiff_t>(last + 1));

  DensityField terminal(u0.lattice(), u0.threshold());
  for (std::size_t x = 0; x < terminal.sites(); ++x) terminal(x, i) = f[x];
  const BackwardField g = backward_fp(terminal, head, p);

  MildVariance out;
  out.initial = initial_variance(u0, g.values.front());
  const double w = u0.lattice().site_weight();
  std::vector<double> integrand(head.times.size());
  for (std::size_t j = 0; j < head.times.size(); ++j) {
    const GammaField gamma = gamma_field(head.states[j], p);
    double s = 0.0;
    for (std::size_t x = 0; x < gamma.sites(); ++x) s += gamma.quadratic_form(x, g.values[j].site(x));
    integrand[j] = s * w;
  }
  for (std::size_t j = 0; j + 1 < head.times.size(); ++j)
    out.martingale += 0.5 * (head.times[j + 1] - head.times[j]) * (integrand[j] + integrand[j + 1]);
  return out;
}

namespace {

struct PowerSums {
  double n = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;

  /// Central moments m2, m3, m4 (population normalization) about the mean.
  void moments(double& mean, double& m2, double& m3, double& m4) const {
    mean = s1 / n;
    const double e2 = s2 / n, e3 = s3 / n, e4 = s4 / n;
    m2 = e2 - mean * mean;
    m3 = e3 - 3 * mean * e2 + 2 * mean * mean * mean;
    m4 = e4 - 4 * mean * e3 + 6 * mean * mean * e2 - 3 * mean * mean * mean * mean;
  }
};

}  // namespace

McSummary summarize(std::span<const double> samples) {
  McSummary s;
  s.replicas = samples.size();
  if (samples.size() < 2) throw std::invalid_argument("summarize: need at least two samples");
  for (double v : samples)
    if (!std::isfinite(v)) throw std::invalid_argument("summarize: non-finite sample");
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= static_cast<double>(samples.size());
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : samples) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const auto n = static_cast<double>(samples.size());
  s.mean = mean;
  s.variance = m2 / (n - 1.0);
  s.standard_error = std::sqrt(s.variance / n);
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (m2 > 0.0) {
    s.skewness = m3 / std::pow(m2, 1.5);
    s.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  }
  return s;
}

McSummary normality_diagnostics(std::span<const double> samples) {
  if (samples.size() < 500) throw std::invalid_argument("normality_diagnostics: need at least 500 samples");
  McSummary s = summarize(samples);
  if (!(s.variance > 0.0)) throw std::invalid_argument("normality_diagnostics: degenerate samples (zero variance)");

  // Shift by the mean so the leave-one-out power sums stay well conditioned.
  PowerSums all;
  for (double v : samples) {
    const double d = v - s.mean;
    all.n += 1;
    all.s1 += d;
    all.s2 += d * d;
    all.s3 += d * d * d;
    all.s4 += d * d * d * d;
  }
  const double n = all.n;
  double sk_sum = 0.0, sk_sq = 0.0, ku_sum = 0.0, ku_sq = 0.0;
  for (double v : samples) {
    const double d = v - s.mean;
    PowerSums loo{all.n - 1, all.s1 - d, all.s2 - d * d, all.s3 - d * d * d, all.s4 - d * d * d * d};
    double mean, m2, m3, m4;
    loo.moments(mean, m2, m3, m4);
    const double sk = m3 / std::pow(m2, 1.5);
    const double ku = m4 / (m2 * m2) - 3.0;
    sk_sum += sk;
    sk_sq += sk * sk;
    ku_sum += ku;
    ku_sq += ku * ku;
  }
  const double sk_var = sk_sq / n - (sk_sum / n) * (sk_sum / n);
  const double ku_var = ku_sq / n - (ku_sum / n) * (ku_sum / n);
  s.skewness_se = std::sqrt(std::max(0.0, (n - 1.0) * sk_var));
  s.kurtosis_se = std::sqrt(std::max(0.0, (n - 1.0) * ku_var));
  return s;
}

Estimate covariance_estimate(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("covariance_estimate: need matching samples");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    mx += x[r];
    my += y[r];
  }
  mx /= n;
  my /= n;
  double mean = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) mean += (x[r] - mx) * (y[r] - my);
  mean /= n;
  double spread = 0.0;
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double d = (x[r] - mx) * (y[r] - my) - mean;
    spread += d * d;
  }
  Estimate e;
  e.value = mean * n / (n - 1.0);
  e.standard_error = std::sqrt(spread / (n - 1.0) / n);
  return e;
}

Estimate variance_estimate(std::span<const double> x) { return covariance_estimate(x, x); }

Estimate mean_square_estimate(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("mean_square_estimate: need at least two samples");
  std::vector<double> sq(x.size());
  std::transform(x.begin(), x.end(), sq.begin(), [](double v) { return v * v; });
  const McSummary s = summarize(sq);
  return {s.mean, s.standard_error};
}

}  // namespace gcph
