#include "experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "gcph/fields.hpp"
#include "gcph/gcp.hpp"
#include "gcph/kernel.hpp"
#include "gcph/random.hpp"

namespace gcph::experiments {

using nlohmann::json;

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
  const auto pool = static_cast<std::size_t>(std::max(1, resolve_workers(workers)));
  if (pool == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < std::min(pool, count); ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

std::uint64_t replica_stream(std::size_t size_index, std::size_t replica) {
  return (static_cast<std::uint64_t>(size_index + 1) << 32) | static_cast<std::uint64_t>(replica);
}

namespace {

ModelParams params_for(const ExperimentConfig& c, int side) {
  const TorusLattice lattice(c.d, side);
  return make_params(c.a, c.k, discretize(c.kernel_spec(side), lattice));
}

IntegrateOptions options_for(const ExperimentConfig& c, bool keep) {
  IntegrateOptions o;
  o.step = c.step;
  o.keep_trajectory = keep;
  return o;
}

/// Hydrodynamic state at each requested time, integrated piecewise.
std::vector<DensityField> hydro_at(const DensityField& u0, const ModelParams& p, const std::vector<double>& times,
                                   const ExperimentConfig& c) {
  std::vector<DensityField> out;
  DensityField u = u0;
  double prev = 0.0;
  for (double t : times) {
    if (t > prev) u = integrate(u, p, t - prev, options_for(c, false)).final_state();
    out.push_back(u);
    prev = t;
  }
  return out;
}

std::vector<TestFunction> test_functions(const ExperimentConfig& c) {
  std::vector<TestFunction> out;
  for (const auto& name : c.test_functions) out.push_back(TestFunction::parse(name));
  return out;
}

/// Runs one replica to every requested time and hands each snapshot to `observe`.
template <class Observe>
void simulate_replica(const ModelParams& p, const DensityField& u0, const ExperimentConfig& c, std::uint64_t stream,
                      Observe&& observe) {
  RandomStream rng(c.seed, stream);
  SpinConfig sigma = sample_initial(u0, rng);
  Simulator sim(p, std::move(sigma), std::move(rng));
  const auto snaps = sim.simulate_until(c.times);
  for (std::size_t ti = 0; ti < snaps.size(); ++ti) observe(ti, *snaps[ti].config);
}

}  // namespace

HydroConvergeResult hydro_converge(const ExperimentConfig& c) {
  HydroConvergeResult r;
  r.time = c.times.back();
  r.study = convergence_study(c.n, c.kernel_spec(c.n_ref.value_or(c.n.back())), c.initial_profile(), c.a, c.d, r.time,
                              c.n_ref, c.step);
  return r;
}

LlnRateResult lln_rate(const ExperimentConfig& c) {
  LlnRateResult r;
  const auto fs = test_functions(c);
  const std::size_t nt = c.times.size(), nf = fs.size(), ns = static_cast<std::size_t>(c.k + 1);
  const auto profile = c.initial_profile();
  // rows grouped by side, then (time, function, state)
  std::vector<std::vector<Estimate>> by_side;
  for (std::size_t si = 0; si < c.n.size(); ++si) {
    const int side = c.n[si];
    const auto p = params_for(c, side);
    const auto u0 = profile.on_lattice(p.lattice());
    const auto u = hydro_at(u0, p, c.times, c);
    std::vector<std::vector<double>> fvals;
    for (const auto& f : fs) fvals.push_back(f.values(p.lattice()));
    const auto replicas = static_cast<std::size_t>(c.replicas);
    std::vector<double> samples(replicas * nt * nf * ns);
    parallel_for(replicas, c.workers, [&](std::size_t rep) {
      double* out = samples.data() + rep * nt * nf * ns;
      simulate_replica(p, u0, c, replica_stream(si, rep), [&](std::size_t ti, const SpinConfig& sigma) {
        const auto w = centered_field(sigma, u[ti]);
        for (std::size_t fi = 0; fi < nf; ++fi)
          for (std::size_t i = 0; i < ns; ++i) {
            const double e = lln_error(w, fvals[fi], static_cast<int>(i));
            out[(ti * nf + fi) * ns + i] = e * e;
          }
      });
    });
    std::vector<Estimate> est;
    std::vector<double> column(replicas);
    for (std::size_t obs = 0; obs < nt * nf * ns; ++obs) {
      for (std::size_t rep = 0; rep < replicas; ++rep) column[rep] = samples[rep * nt * nf * ns + obs];
      Estimate e;
      const auto s = summarize(column);
      e.value = s.mean;
      e.standard_error = s.standard_error;
      est.push_back(e);
    }
    by_side.push_back(std::move(est));
  }
  for (std::size_t ti = 0; ti < nt; ++ti)
    for (std::size_t fi = 0; fi < nf; ++fi)
      for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t obs = (ti * nf + fi) * ns + i;
        std::vector<std::pair<double, double>> pts;
        for (std::size_t si = 0; si < c.n.size(); ++si) {
          r.rows.push_back({c.times[ti], fs[fi].name(), static_cast<int>(i), c.n[si], by_side[si][obs]});
          pts.emplace_back(static_cast<double>(c.n[si]), by_side[si][obs].value);
        }
        const bool positive = std::all_of(pts.begin(), pts.end(), [](const auto& q) { return q.second > 0.0; });
        if (c.times[ti] > 0.0 && positive)
          r.fits.push_back({c.times[ti], fs[fi].name(), static_cast<int>(i), rate_fit(pts)});
      }
  return r;
}

InitCovResult init_cov(const ExperimentConfig& c) {
  InitCovResult r;
  r.side = c.n.front();
  const auto fs = test_functions(c);
  const TorusLattice lattice(c.d, r.side);
  const auto u0 = c.initial_profile().on_lattice(lattice);
  const std::size_t nf = fs.size(), ns = static_cast<std::size_t>(c.k + 1);
  std::vector<std::vector<double>> fvals;
  for (const auto& f : fs) fvals.push_back(f.values(lattice));
  const auto replicas = static_cast<std::size_t>(c.replicas);
  std::vector<double> samples(replicas * nf * ns);
  parallel_for(replicas, c.workers, [&](std::size_t rep) {
    RandomStream rng(c.seed, replica_stream(0, rep));
    const auto w = centered_field(sample_initial(u0, rng), u0);
    for (std::size_t fi = 0; fi < nf; ++fi)
      for (std::size_t i = 0; i < ns; ++i)
        samples[rep * nf * ns + fi * ns + i] = fluctuation(w, fvals[fi], static_cast<int>(i));
  });
  auto column = [&](std::size_t fi, std::size_t i) {
    std::vector<double> v(replicas);
    for (std::size_t rep = 0; rep < replicas; ++rep) v[rep] = samples[rep * nf * ns + fi * ns + i];
    return v;
  };
  for (std::size_t a = 0; a < nf; ++a)
    for (std::size_t b = a; b < nf; ++b)
      for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t j = 0; j < ns; ++j) {
          InitCovRow row{fs[a].name(), fs[b].name(), static_cast<int>(i), static_cast<int>(j), 0.0, {}};
          row.predicted = predicted_initial_cov(u0, fvals[a], fvals[b], row.i, row.j);
          row.empirical = covariance_estimate(column(a, i), column(b, j));
          r.rows.push_back(std::move(row));
        }
  return r;
}

CltResult clt_check(const ExperimentConfig& c) {
  CltResult r;
  r.side = c.n.front();
  const auto fs = test_functions(c);
  const auto p = params_for(c, r.side);
  const auto u0 = c.initial_profile().on_lattice(p.lattice());
  const std::size_t nt = c.times.size(), nf = fs.size(), ns = static_cast<std::size_t>(c.k + 1);
  std::vector<std::vector<double>> fvals;
  for (const auto& f : fs) fvals.push_back(f.values(p.lattice()));

  std::vector<Trajectory> trajs;
  for (double t : c.times) trajs.push_back(integrate(u0, p, t, options_for(c, true)));

  const auto replicas = static_cast<std::size_t>(c.replicas);
  const std::size_t per = nt * nf * ns;
  std::vector<double> samples(replicas * per);
  parallel_for(replicas, c.workers, [&](std::size_t rep) {
    double* out = samples.data() + rep * per;
    simulate_replica(p, u0, c, replica_stream(0, rep), [&](std::size_t ti, const SpinConfig& sigma) {
      const auto w = centered_field(sigma, trajs[ti].final_state());
      for (std::size_t fi = 0; fi < nf; ++fi)
        for (std::size_t i = 0; i < ns; ++i)
          out[(ti * nf + fi) * ns + i] = fluctuation(w, fvals[fi], static_cast<int>(i));
    });
  });

  std::vector<double> column(replicas);
  for (std::size_t ti = 0; ti < nt; ++ti)
    for (std::size_t fi = 0; fi < nf; ++fi)
      for (std::size_t i = 0; i < ns; ++i) {
        const std::size_t obs = (ti * nf + fi) * ns + i;
        for (std::size_t rep = 0; rep < replicas; ++rep) column[rep] = samples[rep * per + obs];
        CltRow row;
        row.time = c.times[ti];
        row.function = fs[fi].name();
        row.state = static_cast<int>(i);
        row.predicted = predicted_variance_mild(fvals[fi], row.state, row.time, trajs[ti], p);
        row.empirical = variance_estimate(column);
        row.summary = normality_diagnostics(column);
        r.rows.push_back(std::move(row));
      }
  return r;
}

double QvResult::max_gap() const {
  double m = 0.0;
  for (const auto& row : rows) m = std::max(m, std::abs(row.average - row.predicted));
  return m;
}

QvResult qv_check(const ExperimentConfig& c) {
  QvResult r;
  r.side = c.n.front();
  const auto fs = test_functions(c);
  const auto p = params_for(c, r.side);
  const StateSpace space(p.lattice(), c.k);
  const auto u = hydro_at(c.initial_profile().on_lattice(p.lattice()), p, c.times, c);
  std::vector<SpinConfig> configs;
  configs.reserve(space.size());
  for (std::size_t s = 0; s < space.size(); ++s) configs.push_back(space.config(s));
  const double w = p.lattice().site_weight();
  for (std::size_t ti = 0; ti < c.times.size(); ++ti) {
    const auto mu = profile_law(space, u[ti]);
    const auto gamma = gamma_field(u[ti], p);
    for (const auto& f : fs) {
      const auto fv = f.values(p.lattice());
      for (int i = 0; i <= c.k; ++i)
        for (int j = 0; j <= c.k; ++j) {
          QvRow row{c.times[ti], f.name(), i, j, 0.0, 0.0};
          for (std::size_t s = 0; s < space.size(); ++s) row.average += mu[s] * carre_du_champ(configs[s], p, fv, i, j);
          for (std::size_t x = 0; x < p.lattice().size(); ++x) row.predicted += gamma(x, i, j) * fv[x] * fv[x];
          row.predicted *= w;
          r.rows.push_back(std::move(row));
        }
    }
  }
  return r;
}

double EntropyResult::max_identity_gap() const {
  double m = 0.0;
  for (const auto& row : identity) m = std::max(m, row.max_gap);
  return m;
}

EntropyResult entropy_exact(const ExperimentConfig& c) {
  EntropyResult r;
  const int side = c.n.front();
  const auto p = params_for(c, side);
  const double h = c.step > 0.0 ? c.step : 1e-3;
  r.report = entropy_production_check(p, c.initial_profile().on_lattice(p.lattice()), c.times.back(), h);

  const int max_side = *std::max_element(c.n.begin(), c.n.end());
  std::uint64_t sweep = 0;
  for (int n = 2; n <= max_side; ++n)
    for (int k = 1; k <= std::max(2, c.k); ++k) {
      const TorusLattice lattice(c.d, n);
      const StateSpace space(lattice, k);
      const auto q = make_params(c.a, k, discretize(c.kernel_spec(n), lattice));
      FIdentityRow row{n, k, c.replicas, space.size(), 0.0};
      RandomStream rng(c.seed, replica_stream(0, sweep++));
      std::vector<int> sigma(lattice.size());
      for (int prof = 0; prof < c.replicas; ++prof) {
        DensityField u(lattice, k);
        for (std::size_t x = 0; x < lattice.size(); ++x) {
          double total = 0.0;
          for (int i = 0; i <= k; ++i) total += (u(x, i) = 0.05 + rng.uniform());
          for (int i = 0; i <= k; ++i) u(x, i) /= total;
        }
        const auto du = drift(u, q);
        for (std::size_t s = 0; s < space.size(); ++s) {
          space.decode(s, sigma);
          const double gap =
              std::abs(entropy_integrand_direct(sigma, u, du, q) - entropy_integrand_closed(sigma, u, q));
          row.max_gap = std::max(row.max_gap, gap);
        }
      }
      r.identity.push_back(row);
    }
  return r;
}

ConcentrationResult concentration(const ExperimentConfig& c) {
  ConcentrationResult r;
  const auto replicas = static_cast<std::size_t>(c.replicas);
  const auto thetas = log_theta_grid();
  std::uint64_t stream = 0;
  auto next_rng = [&] { return RandomStream(c.seed, replica_stream(0, stream++)); };
  const std::vector<BoundedSampler> samplers{BoundedSampler::centered_indicator(0.5),
                                             BoundedSampler::centered_indicator(0.2), BoundedSampler::rademacher(),
                                             BoundedSampler::centered_uniform(1.0), BoundedSampler::zero()};
  for (const auto& s : samplers) {
    auto rng = next_rng();
    r.reports.push_back(check_hoeffding(s, thetas, replicas, rng));
  }
  for (const auto& s : samplers) {
    auto rng = next_rng();
    r.reports.push_back(check_quad(s, replicas, rng));
  }
  {
    auto rng = next_rng();
    const std::size_t size = 8;
    const auto g = random_sign_matrix(size, rng);
    const std::vector<PairSampler> pairs{
        PairSampler::independent(BoundedSampler::rademacher(), BoundedSampler::rademacher()),
        PairSampler::identical(BoundedSampler::centered_indicator(0.5)),
        PairSampler::categorical({0.3, 0.3, 0.4}, 0, 2)};
    for (const auto& pair : pairs) {
      auto prng = next_rng();
      r.reports.push_back(check_hanson_wright(size, g, pair, replicas, prng));
    }
    const std::vector<double> zero(size * size, 0.0);
    auto zrng = next_rng();
    r.reports.push_back(check_hanson_wright(
        size, zero, PairSampler::independent(BoundedSampler::rademacher(), BoundedSampler::rademacher()), replicas,
        zrng));
  }
  {
    auto rng = next_rng();
    r.reports.push_back(check_psi2_sum(BoundedSampler::centered_indicator(0.3), BoundedSampler::rademacher(), thetas,
                                       replicas, rng));
  }
  const std::vector<double> mu{0.3, 0.7}, f{2.0, 4.0 / 7.0}, g{1.0, -0.5};
  for (double gamma : {0.5, 1.0, 2.0}) r.donsker_varadhan.push_back({gamma, donsker_varadhan(mu, f, g, gamma)});
  return r;
}

MasterCheckResult master_check(const ExperimentConfig& c) {
  MasterCheckResult r;
  r.side = c.n.front();
  const auto p = params_for(c, r.side);
  const auto u0 = c.initial_profile().on_lattice(p.lattice());
  const StateSpace space(p.lattice(), c.k);
  const std::size_t sites = p.lattice().size(), ns = static_cast<std::size_t>(c.k + 1), nt = c.times.size();
  const double h = c.step > 0.0 ? c.step : 1e-3;

  std::vector<std::vector<double>> exact(nt, std::vector<double>(sites * ns, 0.0));
  LawVector law = profile_law(space, u0);
  double prev = 0.0;
  std::vector<int> sigma(sites);
  for (std::size_t ti = 0; ti < nt; ++ti) {
    if (c.times[ti] > prev) law = master_evolve(space, law, p, c.times[ti] - prev, h, false).laws.back();
    prev = c.times[ti];
    for (std::size_t s = 0; s < space.size(); ++s) {
      space.decode(s, sigma);
      for (std::size_t x = 0; x < sites; ++x) exact[ti][x * ns + static_cast<std::size_t>(sigma[x])] += law[s];
    }
  }

  const auto replicas = static_cast<std::size_t>(c.replicas);
  std::vector<std::uint8_t> states(replicas * nt * sites);
  parallel_for(replicas, c.workers, [&](std::size_t rep) {
    simulate_replica(p, u0, c, replica_stream(0, rep), [&](std::size_t ti, const SpinConfig& s) {
      for (std::size_t x = 0; x < sites; ++x) states[(rep * nt + ti) * sites + x] = static_cast<std::uint8_t>(s[x]);
    });
  });
  const double reps = static_cast<double>(replicas);
  for (std::size_t ti = 0; ti < nt; ++ti)
    for (std::size_t x = 0; x < sites; ++x) {
      std::vector<std::size_t> hits(ns, 0);
      for (std::size_t rep = 0; rep < replicas; ++rep) ++hits[states[(rep * nt + ti) * sites + x]];
      for (std::size_t i = 0; i < ns; ++i) {
        MarginalRow row;
        row.time = c.times[ti];
        row.site = x;
        row.state = static_cast<int>(i);
        row.exact = exact[ti][x * ns + i];
        row.empirical = static_cast<double>(hits[i]) / reps;
        row.standard_error = std::sqrt(std::max(row.exact * (1.0 - row.exact), 0.0) / reps);
        r.rows.push_back(row);
      }
    }
  return r;
}

bool RunResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

namespace {

std::string pass_word(bool ok) { return ok ? "pass" : "fail"; }

constexpr double kInf = std::numeric_limits<double>::infinity();

RunResult run_hydro_converge(const ExperimentConfig& c) {
  const auto r = hydro_converge(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "n_ref", "time", "step", "sup_error"});
  for (const auto& row : r.study.rows)
    rows.add_row({std::int64_t{row.side}, std::int64_t{r.study.reference_side}, r.time, r.study.step, row.sup_error});
  CsvTable fit({"slope", "slope_se", "intercept", "target_lower", "target_upper", "status"});
  const double slope = r.study.fit ? r.study.fit->slope : std::nan("");
  Check check{"slope of log sup error vs log n", slope, -2.3, -1.7};
  fit.add_row({slope, r.study.fit ? r.study.fit->slope_se : std::nan(""),
               r.study.fit ? r.study.fit->intercept : std::nan(""), check.lower, check.upper,
               pass_word(check.pass())});
  out.tables.emplace_back(c.experiment, std::move(rows));
  out.tables.emplace_back(c.experiment + "_fit", std::move(fit));
  out.checks.push_back(check);
  return out;
}

RunResult run_lln_rate(const ExperimentConfig& c) {
  const auto r = lln_rate(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"time", "function", "state", "n", "mean_square_error", "standard_error"});
  for (const auto& row : r.rows)
    rows.add_row({row.time, row.function, std::int64_t{row.state}, std::int64_t{row.side}, row.mean_square.value,
                  row.mean_square.standard_error});
  CsvTable fits({"time", "function", "state", "slope", "slope_se", "status"});
  for (const auto& f : r.fits) {
    Check check{"slope t=" + format_double(f.time) + " f=" + f.function + " i=" + std::to_string(f.state),
                f.fit.slope, -1.25, -0.75};
    fits.add_row({f.time, f.function, std::int64_t{f.state}, f.fit.slope, f.fit.slope_se, pass_word(check.pass())});
    if (f.time == c.times.back()) out.checks.push_back(check);
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  out.tables.emplace_back(c.experiment + "_fit", std::move(fits));
  return out;
}

RunResult run_init_cov(const ExperimentConfig& c) {
  const auto r = init_cov(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "f", "g", "i", "j", "predicted", "empirical", "standard_error", "z", "status"});
  for (const auto& row : r.rows) {
    const double diff = std::abs(row.empirical.value - row.predicted);
    const double z = row.empirical.standard_error > 0.0 ? diff / row.empirical.standard_error : (diff > 0 ? kInf : 0.0);
    Check check{"cov " + row.f + "," + row.g + " i=" + std::to_string(row.i) + " j=" + std::to_string(row.j), z,
                -kInf, 4.0};
    rows.add_row({std::int64_t{r.side}, row.f, row.g, std::int64_t{row.i}, std::int64_t{row.j}, row.predicted,
                  row.empirical.value, row.empirical.standard_error, z, pass_word(check.pass())});
    out.checks.push_back(check);
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  return out;
}

RunResult run_clt_check(const ExperimentConfig& c) {
  const auto r = clt_check(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "time", "function", "state", "predicted_initial", "predicted_martingale", "predicted",
                 "empirical_variance", "standard_error", "z", "mean", "skewness", "skewness_se", "excess_kurtosis",
                 "kurtosis_se", "status"});
  for (const auto& row : r.rows) {
    const std::string tag = " t=" + format_double(row.time) + " f=" + row.function + " i=" + std::to_string(row.state);
    const double diff = std::abs(row.empirical.value - row.predicted.total());
    const double z = row.empirical.standard_error > 0.0 ? diff / row.empirical.standard_error : kInf;
    const Check var{"variance" + tag, z, -kInf, 4.0};
    const Check skew{"|skewness|" + tag, std::abs(row.summary.skewness), -kInf, 0.2};
    const Check kurt{"|excess kurtosis|" + tag, std::abs(row.summary.excess_kurtosis), -kInf, 0.3};
    rows.add_row({std::int64_t{r.side}, row.time, row.function, std::int64_t{row.state}, row.predicted.initial,
                  row.predicted.martingale, row.predicted.total(), row.empirical.value, row.empirical.standard_error,
                  z, row.summary.mean, row.summary.skewness, row.summary.skewness_se, row.summary.excess_kurtosis,
                  row.summary.kurtosis_se, pass_word(var.pass() && skew.pass() && kurt.pass())});
    out.checks.insert(out.checks.end(), {var, skew, kurt});
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  return out;
}

RunResult run_qv_check(const ExperimentConfig& c) {
  const auto r = qv_check(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "time", "function", "i", "j", "carre_du_champ_mean", "gamma_sum", "abs_gap"});
  for (const auto& row : r.rows)
    rows.add_row({std::int64_t{r.side}, row.time, row.function, std::int64_t{row.i}, std::int64_t{row.j}, row.average,
                  row.predicted, std::abs(row.average - row.predicted)});
  out.tables.emplace_back(c.experiment, std::move(rows));
  out.checks.push_back({"max |E Gamma - sum gamma f^2|", r.max_gap(), -kInf, 1e-10});
  return out;
}

RunResult run_entropy_exact(const ExperimentConfig& c) {
  const auto r = entropy_exact(c);
  const auto& e = r.report;
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"time", "entropy", "derivative", "production", "excess", "envelope"});
  for (std::size_t j = 0; j < e.times.size(); ++j)
    rows.add_row({e.times[j], e.entropy[j], e.derivative[j], e.production[j], e.derivative[j] - e.production[j],
                  e.envelope[j]});
  CsvTable summary({"step", "tolerance", "max_excess", "closed_form_gap", "envelope_constant", "fit_time",
                    "fit_constant", "fit_envelope_dominates"});
  summary.add_row({e.step, e.tolerance, e.max_excess, e.closed_form_gap, e.envelope_constant, e.fit_time,
                   e.fit_constant, std::string(e.fit_envelope_dominates ? "true" : "false")});
  CsvTable identity({"n", "k", "profiles", "configurations", "max_gap"});
  for (const auto& row : r.identity)
    identity.add_row({std::int64_t{row.side}, std::int64_t{row.threshold}, std::int64_t{row.profiles},
                      static_cast<std::int64_t>(row.configurations), row.max_gap});
  out.tables.emplace_back(c.experiment, std::move(rows));
  out.tables.emplace_back(c.experiment + "_summary", std::move(summary));
  out.tables.emplace_back(c.experiment + "_identity", std::move(identity));
  const double h_min = *std::min_element(e.entropy.begin(), e.entropy.end());
  out.checks.push_back({"|H(0)|", std::abs(e.entropy.front()), -kInf, 1e-12});
  out.checks.push_back({"min H", h_min, -1e-12, kInf});
  out.checks.push_back({"max (dH/dt - production) vs 10h", e.max_excess, -kInf, e.tolerance});
  out.checks.push_back({"dominating envelope constant", e.envelope_constant, 0.0, std::numeric_limits<double>::max()});
  out.checks.push_back({"max |F_direct - F_closed|", r.max_identity_gap(), -kInf, 1e-10});
  return out;
}

RunResult run_concentration(const ExperimentConfig& c) {
  const auto r = concentration(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"check", "sampler", "replicas", "parameter", "empirical", "standard_error", "bound", "slack",
                 "status"});
  for (const auto& rep : r.reports) {
    double worst = -kInf;
    for (const auto& row : rep.rows) {
      const double slack = row.bound + 4.0 * row.standard_error - row.empirical;
      worst = std::max(worst, -slack);
      rows.add_row({rep.check, rep.sampler, static_cast<std::int64_t>(rep.replicas), row.parameter, row.empirical,
                    row.standard_error, row.bound, slack, pass_word(row.pass())});
    }
    out.checks.push_back({rep.check + " " + rep.sampler, worst, -kInf, 0.0});
  }
  CsvTable dv({"gamma", "lhs", "rhs", "status"});
  for (const auto& row : r.donsker_varadhan) {
    dv.add_row({row.gamma, row.value.lhs, row.value.rhs, pass_word(row.value.holds())});
    out.checks.push_back({"donsker-varadhan gamma=" + format_double(row.gamma), row.value.lhs - row.value.rhs, -kInf,
                          1e-12});
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  out.tables.emplace_back(c.experiment + "_donsker_varadhan", std::move(dv));
  return out;
}

RunResult run_master_check(const ExperimentConfig& c) {
  const auto r = master_check(c);
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "time", "site", "state", "exact", "empirical", "standard_error", "z", "status"});
  for (const auto& row : r.rows) {
    const double diff = std::abs(row.empirical - row.exact);
    const double z = row.standard_error > 0.0 ? diff / row.standard_error : (diff > 0.0 ? kInf : 0.0);
    const Check check{"marginal t=" + format_double(row.time) + " x=" + std::to_string(row.site) +
                          " i=" + std::to_string(row.state),
                      z, -kInf, 4.0};
    rows.add_row({std::int64_t{r.side}, row.time, static_cast<std::int64_t>(row.site), std::int64_t{row.state},
                  row.exact, row.empirical, row.standard_error, z, pass_word(check.pass())});
    out.checks.push_back(check);
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  return out;
}

RunResult run_simulate(const ExperimentConfig& c) {
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "replica", "time", "state", "count", "density", "hydro_density"});
  const auto profile = c.initial_profile();
  for (std::size_t si = 0; si < c.n.size(); ++si) {
    const auto p = params_for(c, c.n[si]);
    const auto u0 = profile.on_lattice(p.lattice());
    const auto u = hydro_at(u0, p, c.times, c);
    const auto replicas = static_cast<std::size_t>(c.replicas);
    std::vector<std::vector<std::size_t>> counts(replicas);
    parallel_for(replicas, c.workers, [&](std::size_t rep) {
      simulate_replica(p, u0, c, replica_stream(si, rep), [&](std::size_t, const SpinConfig& s) {
        const auto cnt = s.counts();
        counts[rep].insert(counts[rep].end(), cnt.begin(), cnt.end());
      });
    });
    const double sites = static_cast<double>(p.lattice().size());
    for (std::size_t rep = 0; rep < replicas; ++rep)
      for (std::size_t ti = 0; ti < c.times.size(); ++ti)
        for (int i = 0; i <= c.k; ++i) {
          const auto cnt = counts[rep][ti * static_cast<std::size_t>(c.k + 1) + static_cast<std::size_t>(i)];
          const auto comp = u[ti].component(i);
          double mean = 0.0;
          for (double v : comp) mean += v;
          rows.add_row({std::int64_t{c.n[si]}, static_cast<std::int64_t>(rep), c.times[ti], std::int64_t{i},
                        static_cast<std::int64_t>(cnt), static_cast<double>(cnt) / sites, mean / sites});
        }
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  return out;
}

RunResult run_trajectory(const ExperimentConfig& c) {
  RunResult out{c.experiment, {}, {}};
  CsvTable rows({"n", "time", "site", "position", "state", "density"});
  const auto profile = c.initial_profile();
  for (int side : c.n) {
    const auto p = params_for(c, side);
    const auto u = hydro_at(profile.on_lattice(p.lattice()), p, c.times, c);
    for (std::size_t ti = 0; ti < c.times.size(); ++ti)
      for (std::size_t x = 0; x < p.lattice().size(); ++x) {
        const double pos = p.lattice().point(x)[0];
        for (int i = 0; i <= c.k; ++i)
          rows.add_row({std::int64_t{side}, c.times[ti], static_cast<std::int64_t>(x), pos, std::int64_t{i},
                        u[ti](x, i)});
      }
  }
  out.tables.emplace_back(c.experiment, std::move(rows));
  return out;
}

}  // namespace

RunResult run(const ExperimentConfig& c) {
  if (const auto v = validate(c); !v.empty()) throw ConfigError(v);
  const auto& e = c.experiment;
  if (e == "hydro-converge") return run_hydro_converge(c);
  if (e == "lln-rate") return run_lln_rate(c);
  if (e == "init-cov") return run_init_cov(c);
  if (e == "clt-check") return run_clt_check(c);
  if (e == "qv-check") return run_qv_check(c);
  if (e == "entropy-exact") return run_entropy_exact(c);
  if (e == "concentration") return run_concentration(c);
  if (e == "master-check") return run_master_check(c);
  if (e == "simulate") return run_simulate(c);
  if (e == "trajectory") return run_trajectory(c);
  throw ConfigError({"experiment: unknown experiment '" + e + "'"});
}

std::vector<std::filesystem::path> write_outputs(const RunResult& result, const ExperimentConfig& c,
                                                 const std::filesystem::path& dir, double wall_seconds) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  json tables = json::array();
  for (const auto& [stem, table] : result.tables) {
    const auto path = dir / (stem + ".csv");
    write_atomic(path, table.str());
    written.push_back(path);
    tables.push_back({{"file", stem + ".csv"}, {"columns", table.header()}, {"rows", table.rows().size()}});
  }
  json checks = json::array();
  for (const auto& ch : result.checks)
    checks.push_back({{"name", ch.name},
                      {"value", ch.value},
                      {"lower", std::isfinite(ch.lower) ? json(ch.lower) : json(nullptr)},
                      {"upper", std::isfinite(ch.upper) ? json(ch.upper) : json(nullptr)},
                      {"pass", ch.pass()}});
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(c)));
  json meta;
  meta["schema_version"] = kSchemaVersion;
  meta["experiment"] = result.experiment;
  meta["config"] = c.to_json();
  meta["config_hash"] = hash;
  meta["seed"] = c.seed;
  meta["provenance"] = std::string("gcp-hydro ") + kVersion;
  meta["module_versions"] = {{"lattice_kernel", kVersion}, {"hydro", kVersion},          {"gcp", kVersion},
                             {"fields", kVersion},         {"entropy_oracle", kVersion}, {"stats", kVersion},
                             {"concentration", kVersion},  {"cli", kVersion}};
  meta["workers"] = resolve_workers(c.workers);
  meta["wall_time_seconds"] = wall_seconds;
  meta["tables"] = tables;
  meta["checks"] = checks;
  meta["status"] = result.has_thresholds() ? pass_word(result.passed()) : "no-thresholds";
  const auto path = dir / (result.experiment + ".json");
  write_atomic(path, meta.dump(2) + "\n");
  written.push_back(path);
  return written;
}

}  // namespace gcph::experiments
