#include "gcph/hydro.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace gcph {

void ModelParams::validate() const {
  if (!(recovery_rate > 0.0) || !std::isfinite(recovery_rate))
    throw std::invalid_argument("ModelParams: recovery rate a must be > 0");
  if (threshold < 1) throw std::invalid_argument("ModelParams: threshold k must be >= 1");
  if (!kernel) throw std::invalid_argument("ModelParams: kernel is missing");
}

ModelParams make_params(double recovery_rate, int threshold, DiscreteKernel kernel) {
  ModelParams p{recovery_rate, threshold, std::make_shared<const DiscreteKernel>(std::move(kernel))};
  p.validate();
  return p;
}

MatrixAM::MatrixAM(double recovery_rate, int threshold)
    : size_(threshold + 1),
      a_(static_cast<std::size_t>(size_ * size_), 0.0),
      m_(static_cast<std::size_t>(size_ * size_), 0.0) {
  if (threshold < 1) throw std::invalid_argument("MatrixAM: threshold must be >= 1");
  const int k = threshold;
  a_[static_cast<std::size_t>(0 * size_ + k)] = recovery_rate;
  a_[static_cast<std::size_t>(k * size_ + k)] = -recovery_rate;
  for (int i = 1; i <= k; ++i) m_[static_cast<std::size_t>(i * size_ + i - 1)] = 1.0;
  for (int i = 0; i < k; ++i) m_[static_cast<std::size_t>(i * size_ + i)] = -1.0;
}

namespace {

double column_norm(const std::vector<double>& mat, int size) {
  double best = 0.0;
  for (int j = 0; j < size; ++j) {
    double s = 0.0;
    for (int i = 0; i < size; ++i) s += std::abs(mat[static_cast<std::size_t>(i * size + j)]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace

double MatrixAM::a_norm() const { return column_norm(a_, size_); }
double MatrixAM::m_norm() const { return column_norm(m_, size_); }

std::vector<double> MatrixAM::apply(const std::vector<double>& mat, int size, std::span<const double> v,
                                    bool transpose) {
  if (v.size() != static_cast<std::size_t>(size)) throw std::invalid_argument("MatrixAM: vector size mismatch");
  std::vector<double> out(v.size(), 0.0);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) {
      const double e = transpose ? mat[static_cast<std::size_t>(j * size + i)] : mat[static_cast<std::size_t>(i * size + j)];
      out[static_cast<std::size_t>(i)] += e * v[static_cast<std::size_t>(j)];
    }
  return out;
}

std::vector<double> MatrixAM::apply_a(std::span<const double> v) const { return apply(a_, size_, v, false); }
std::vector<double> MatrixAM::apply_m(std::span<const double> v) const { return apply(m_, size_, v, false); }
std::vector<double> MatrixAM::apply_a_transpose(std::span<const double> v) const { return apply(a_, size_, v, true); }
std::vector<double> MatrixAM::apply_m_transpose(std::span<const double> v) const { return apply(m_, size_, v, true); }

// --- DensityField ----------------------------------------------------------

DensityField::DensityField(TorusLattice lattice, int threshold)
    : lattice_(lattice), threshold_(threshold), values_(lattice.size() * static_cast<std::size_t>(threshold + 1), 0.0) {
  if (threshold < 1) throw std::invalid_argument("DensityField: threshold must be >= 1");
}

std::vector<double> DensityField::component(int i) const {
  std::vector<double> out(sites());
  for (std::size_t x = 0; x < sites(); ++x) out[x] = (*this)(x, i);
  return out;
}

double DensityField::min_component() const { return *std::min_element(values_.begin(), values_.end()); }

double DensityField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double DensityField::max_simplex_deviation() const {
  double worst = 0.0;
  for (std::size_t x = 0; x < sites(); ++x) {
    const auto s = site(x);
    worst = std::max(worst, std::abs(std::accumulate(s.begin(), s.end(), 0.0) - 1.0));
  }
  return worst;
}

void DensityField::check_simplex(double tolerance) const {
  for (double v : values_)
    if (!std::isfinite(v) || v < -tolerance) throw std::invalid_argument("density field: negative or non-finite component");
  if (max_simplex_deviation() > tolerance) throw std::invalid_argument("density field: site vector does not sum to 1");
}

// --- InitialProfile --------------------------------------------------------

InitialProfile::InitialProfile(std::vector<double> base, std::vector<double> amplitude, int mode)
    : base_(std::move(base)), amplitude_(std::move(amplitude)), mode_(mode) {
  if (base_.size() < 2) throw std::invalid_argument("profile: need at least two states");
  if (amplitude_.size() != base_.size()) throw std::invalid_argument("profile: amplitude length != state count");
  if (std::abs(std::accumulate(base_.begin(), base_.end(), 0.0) - 1.0) > 1e-12)
    throw std::invalid_argument("profile: base values must sum to 1");
  if (std::abs(std::accumulate(amplitude_.begin(), amplitude_.end(), 0.0)) > 1e-12)
    throw std::invalid_argument("profile: amplitudes must sum to 0");
  if (min_component() < 0.0 || max_component() > 1.0)
    throw std::invalid_argument("profile: components leave [0, 1]");
}

InitialProfile InitialProfile::constant(std::vector<double> values) {
  std::vector<double> zeros(values.size(), 0.0);
  return InitialProfile(std::move(values), std::move(zeros), 1);
}

InitialProfile InitialProfile::cosine(std::vector<double> base, std::vector<double> amplitude, int mode) {
  return InitialProfile(std::move(base), std::move(amplitude), mode);
}

std::string InitialProfile::name() const {
  const bool flat = std::all_of(amplitude_.begin(), amplitude_.end(), [](double a) { return a == 0.0; });
  return flat ? "constant" : "cosine";
}

std::vector<double> InitialProfile::operator()(std::span<const double> point) const {
  double wave = 0.0;
  for (double xj : point) wave += std::cos(2.0 * std::numbers::pi * mode_ * xj);
  if (!point.empty()) wave /= static_cast<double>(point.size());
  std::vector<double> u(base_.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = base_[i] + amplitude_[i] * wave;
  return u;
}

double InitialProfile::min_component() const {
  double m = 1.0;
  for (std::size_t i = 0; i < base_.size(); ++i) m = std::min(m, base_[i] - std::abs(amplitude_[i]));
  return m;
}

double InitialProfile::max_component() const {
  double m = 0.0;
  for (std::size_t i = 0; i < base_.size(); ++i) m = std::max(m, base_[i] + std::abs(amplitude_[i]));
  return m;
}

DensityField InitialProfile::on_lattice(const TorusLattice& lattice) const {
  DensityField u(lattice, threshold());
  for (std::size_t x = 0; x < lattice.size(); ++x) {
    const auto v = (*this)(lattice.point(x));
    std::copy(v.begin(), v.end(), u.site(x).begin());
  }
  return u;
}

// --- drift and RK4 ---------------------------------------------------------

namespace {

void check_compatible(const DensityField& u, const ModelParams& p) {
  if (!(u.lattice() == p.lattice())) throw std::invalid_argument("density field lattice does not match the kernel");
  if (u.threshold() != p.threshold) throw std::invalid_argument("density field threshold does not match the model");
}

struct DriftWorkspace {
  std::vector<double> active;
  std::vector<double> intensity;

  void evaluate(const DensityField& u, const ModelParams& p, DensityField& out) {
    const std::size_t n = u.sites();
    const int k = p.threshold;
    const double a = p.recovery_rate;
    active.resize(n);
    intensity.resize(n);
    for (std::size_t x = 0; x < n; ++x) active[x] = u(x, k);
    p.kernel->conv(active, intensity);
    for (std::size_t x = 0; x < n; ++x) {
      const auto ux = u.site(x);
      const auto dx = out.site(x);
      const double in = intensity[x];
      dx[0] = a * ux[static_cast<std::size_t>(k)] - in * ux[0];
      for (int i = 1; i < k; ++i)
        dx[static_cast<std::size_t>(i)] = in * (ux[static_cast<std::size_t>(i - 1)] - ux[static_cast<std::size_t>(i)]);
      dx[static_cast<std::size_t>(k)] = -a * ux[static_cast<std::size_t>(k)] + in * ux[static_cast<std::size_t>(k - 1)];
    }
    for (double v : out.values())
      if (!std::isfinite(v)) throw std::domain_error("drift: non-finite value");
  }
};

void axpy(std::span<double> out, std::span<const double> base, double h, std::span<const double> dir) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = base[i] + h * dir[i];
}

}  // namespace

DensityField drift(const DensityField& u, const ModelParams& p) {
  p.validate();
  check_compatible(u, p);
  DensityField out(u.lattice(), u.threshold());
  DriftWorkspace ws;
  ws.evaluate(u, p, out);
  return out;
}

double lipschitz_scale(const ModelParams& p) {
  const MatrixAM am(p.recovery_rate, p.threshold);
  return am.a_norm() + p.kernel->norm_1n() * am.m_norm();
}

double default_step(const ModelParams& p) { return std::min(1e-2, 0.1 / lipschitz_scale(p)); }

double Trajectory::floor_at(double t) const { return initial_floor * std::exp(-floor_rate * t); }

DensityField Trajectory::interpolate(std::size_t interval, double fraction) const {
  if (!complete() || interval + 1 >= times.size()) throw std::out_of_range("Trajectory::interpolate: bad interval");
  const double dt = times[interval + 1] - times[interval];
  const auto& y0 = states[interval].values();
  const auto& y1 = states[interval + 1].values();
  const auto& d0 = rates[interval].values();
  const auto& d1 = rates[interval + 1].values();
  const double s = fraction;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  DensityField out(states[interval].lattice(), states[interval].threshold());
  auto o = out.values();
  for (std::size_t i = 0; i < o.size(); ++i)
    o[i] = h00 * y0[i] + h10 * dt * d0[i] + h01 * y1[i] + h11 * dt * d1[i];
  return out;
}

Trajectory integrate(const DensityField& u0, const ModelParams& p, double t_end, IntegrateOptions options) {
  p.validate();
  check_compatible(u0, p);
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("integrate: t_end must be >= 0");
  u0.check_simplex();
  const double floor0 = u0.min_component();
  if (!(floor0 > 0.0)) throw std::invalid_argument("integrate: initial profile must have min component > 0");

  Trajectory traj;
  traj.step = options.step > 0.0 ? options.step : default_step(p);
  traj.initial_floor = floor0;
  traj.floor_rate = std::max(p.recovery_rate, p.kernel->norm_1n());

  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil(t_end / traj.step - 1e-9)));
  DriftWorkspace ws;
  DensityField u = u0;
  DensityField k1(u.lattice(), u.threshold()), k2 = k1, k3 = k1, k4 = k1, tmp = k1;
  ws.evaluate(u, p, k1);

  traj.times.push_back(0.0);
  traj.states.push_back(u);
  traj.rates.push_back(k1);

  double t = 0.0;
  const int states = u.states();
  for (std::size_t s = 0; s < steps; ++s) {
    const double t_next = (s + 1 == steps) ? t_end : static_cast<double>(s + 1) * traj.step;
    const double h = t_next - t;
    axpy(tmp.values(), u.values(), 0.5 * h, k1.values());
    ws.evaluate(tmp, p, k2);
    axpy(tmp.values(), u.values(), 0.5 * h, k2.values());
    ws.evaluate(tmp, p, k3);
    axpy(tmp.values(), u.values(), h, k3.values());
    ws.evaluate(tmp, p, k4);
    auto uv = u.values();
    const auto a1 = k1.values(), a2 = k2.values(), a3 = k3.values(), a4 = k4.values();
    for (std::size_t i = 0; i < uv.size(); ++i) uv[i] += h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    t = t_next;

    for (std::size_t x = 0; x < u.sites(); ++x) {
      auto site = u.site(x);
      const double sum = std::accumulate(site.begin(), site.end(), 0.0);
      if (!std::isfinite(sum)) throw std::domain_error("integrate: non-finite state");
      if (std::abs(sum - 1.0) > 1e-9) {
        for (int i = 0; i < states; ++i) site[static_cast<std::size_t>(i)] /= sum;
        ++traj.simplex_repairs;
      }
    }
    if (options.check_floor) {
      const double floor = 0.9 * traj.floor_at(t);
      if (u.min_component() < floor)
        throw StepSizeError("integrate: positivity floor violated at t = " + std::to_string(t) +
                            "; reduce the step size");
    }

    ws.evaluate(u, p, k1);
    if (options.keep_trajectory || s + 1 == steps) {
      traj.times.push_back(t);
      traj.states.push_back(u);
      traj.rates.push_back(k1);
    }
  }
  return traj;
}

DensityField reference_continuum(const InitialProfile& u0, const KernelSpec& kernel, double recovery_rate, int dim,
                                 int reference_side, double t_end, double step) {
  const TorusLattice lattice(dim, reference_side);
  const auto p = make_params(recovery_rate, u0.threshold(), discretize(kernel, lattice));
  IntegrateOptions opts;
  opts.step = step;
  opts.keep_trajectory = false;
  return integrate(u0.on_lattice(lattice), p, t_end, opts).final_state();
}

DensityField restrict_to(const DensityField& fine, const TorusLattice& coarse) {
  const auto& fl = fine.lattice();
  if (fl.dim() != coarse.dim()) throw std::invalid_argument("restrict_to: dimension mismatch");
  if (fl.side() % coarse.side() != 0) throw std::invalid_argument("restrict_to: coarse side must divide fine side");
  const int stride = fl.side() / coarse.side();
  DensityField out(coarse, fine.threshold());
  std::vector<int> c(static_cast<std::size_t>(coarse.dim()));
  for (std::size_t x = 0; x < coarse.size(); ++x) {
    coarse.coords(x, c);
    for (auto& cj : c) cj *= stride;
    const auto src = fine.site(fl.index(c));
    std::copy(src.begin(), src.end(), out.site(x).begin());
  }
  return out;
}

ConvergenceStudy convergence_study(std::span<const int> sides, const KernelSpec& kernel, const InitialProfile& u0,
                                   double recovery_rate, int dim, double t_end, std::optional<int> reference_side,
                                   double step) {
  if (sides.size() < 3) throw std::invalid_argument("convergence_study: at least 3 lattice sizes are required");
  const int n_max = *std::max_element(sides.begin(), sides.end());
  int n_ref = 0;
  if (reference_side) {
    n_ref = *reference_side;
  } else {
    for (n_ref = 4 * n_max;; n_ref += n_max)
      if (std::all_of(sides.begin(), sides.end(), [&](int n) { return n > 0 && n_ref % n == 0; })) break;
  }
  if (n_ref < 4 * n_max) throw std::invalid_argument("convergence_study: reference side must be >= 4 max(n)");
  for (int n : sides)
    if (n < 1 || n_ref % n != 0) throw std::invalid_argument("convergence_study: every n must divide the reference side");

  ConvergenceStudy study;
  study.reference_side = n_ref;
  const TorusLattice ref_lattice(dim, n_ref);
  const auto ref_params = make_params(recovery_rate, u0.threshold(), discretize(kernel, ref_lattice));
  study.step = step > 0.0 ? step : default_step(ref_params);

  IntegrateOptions opts;
  opts.step = study.step;
  opts.keep_trajectory = false;
  const DensityField reference = integrate(u0.on_lattice(ref_lattice), ref_params, t_end, opts).final_state();

  bool all_positive = true;
  std::vector<std::pair<double, double>> points;
  for (int n : sides) {
    const TorusLattice lattice(dim, n);
    const auto p = make_params(recovery_rate, u0.threshold(), discretize(kernel, lattice));
    const DensityField un = integrate(u0.on_lattice(lattice), p, t_end, opts).final_state();
    const DensityField ref = restrict_to(reference, lattice);
    double err = 0.0;
    for (std::size_t i = 0; i < un.values().size(); ++i)
      err = std::max(err, std::abs(un.values()[i] - ref.values()[i]));
    study.rows.push_back({n, err});
    points.emplace_back(static_cast<double>(n), err);
    if (!(err > 0.0)) all_positive = false;
  }
  if (all_positive) study.fit = rate_fit(points);
  return study;
}

// --- backward equation -----------------------------------------------------

namespace {

struct BackwardWorkspace {
  std::vector<double> active, intensity, inner, adjoint;

  void prepare(const DensityField& u, const ModelParams& p) {
    const std::size_t n = u.sites();
    active.resize(n);
    intensity.resize(n);
    for (std::size_t x = 0; x < n; ++x) active[x] = u(x, p.threshold);
    p.kernel->conv(active, intensity);
  }

  // out = -(A^T g + I M^T g + (J^{n,*} * <g, M u>) e_k), i.e. dg/ds.
  void rhs(const DensityField& g, const DensityField& u, const ModelParams& p, DensityField& out) {
    prepare(u, p);
    const std::size_t n = u.sites();
    const int k = p.threshold;
    const double a = p.recovery_rate;
    inner.resize(n);
    adjoint.resize(n);
    for (std::size_t x = 0; x < n; ++x) {
      const auto ux = u.site(x);
      const auto gx = g.site(x);
      double acc = -gx[0] * ux[0];
      for (int i = 1; i < k; ++i)
        acc += gx[static_cast<std::size_t>(i)] * (ux[static_cast<std::size_t>(i - 1)] - ux[static_cast<std::size_t>(i)]);
      acc += gx[static_cast<std::size_t>(k)] * ux[static_cast<std::size_t>(k - 1)];
      inner[x] = acc;
    }
    p.kernel->conv_adjoint(inner, adjoint);
    for (std::size_t x = 0; x < n; ++x) {
      const auto gx = g.site(x);
      auto ox = out.site(x);
      for (int j = 0; j < k; ++j)
        ox[static_cast<std::size_t>(j)] =
            -intensity[x] * (gx[static_cast<std::size_t>(j + 1)] - gx[static_cast<std::size_t>(j)]);
      ox[static_cast<std::size_t>(k)] = -(a * (gx[0] - gx[static_cast<std::size_t>(k)]) + adjoint[x]);
    }
  }
};

}  // namespace

BackwardField backward_fp(const DensityField& terminal, const Trajectory& trajectory, const ModelParams& p) {
  p.validate();
  check_compatible(terminal, p);
  if (trajectory.times.empty() || !trajectory.complete() || trajectory.rates.size() != trajectory.times.size())
    throw std::invalid_argument("backward_fp: trajectory must keep every grid state");
  check_compatible(trajectory.states.front(), p);
  for (double v : terminal.values())
    if (!std::isfinite(v)) throw std::invalid_argument("backward_fp: terminal datum must be finite");

  const std::size_t m = trajectory.times.size();
  BackwardField out;
  out.times = trajectory.times;
  out.values.assign(m, terminal);

  BackwardWorkspace ws;
  DensityField g = terminal;
  DensityField k1(g.lattice(), g.threshold()), k2 = k1, k3 = k1, k4 = k1, tmp = k1;
  for (std::size_t j = m - 1; j > 0; --j) {
    const double h = trajectory.times[j] - trajectory.times[j - 1];
    const DensityField& u_hi = trajectory.states[j];
    const DensityField& u_lo = trajectory.states[j - 1];
    const DensityField u_mid = trajectory.interpolate(j - 1, 0.5);
    ws.rhs(g, u_hi, p, k1);
    axpy(tmp.values(), g.values(), -0.5 * h, k1.values());
    ws.rhs(tmp, u_mid, p, k2);
    axpy(tmp.values(), g.values(), -0.5 * h, k2.values());
    ws.rhs(tmp, u_mid, p, k3);
    axpy(tmp.values(), g.values(), -h, k3.values());
    ws.rhs(tmp, u_lo, p, k4);
    auto gv = g.values();
    const auto a1 = k1.values(), a2 = k2.values(), a3 = k3.values(), a4 = k4.values();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] -= h / 6.0 * (a1[i] + 2.0 * a2[i] + 2.0 * a3[i] + a4[i]);
    out.values[j - 1] = g;
  }
  return out;
}

}  // namespace gcph
