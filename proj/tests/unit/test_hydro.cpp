#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gcph/hydro.hpp"
#include "gcph/random.hpp"
#include "oracles.hpp"

using namespace gcph;

namespace {

ModelParams constant_model(int side, double c, double a, int k) {
  return make_params(a, k, discretize(KernelSpec::constant(c), TorusLattice(1, side)));
}

double sup_distance(const DensityField& a, const DensityField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
  return m;
}

}  // namespace

TEST(MatrixAM, EntriesAndNorms) {
  const MatrixAM am(1.5, 3);
  EXPECT_DOUBLE_EQ(am.a(0, 3), 1.5);
  EXPECT_DOUBLE_EQ(am.a(3, 3), -1.5);
  EXPECT_DOUBLE_EQ(am.m(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(am.m(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(am.m(3, 3), 0.0);
  EXPECT_DOUBLE_EQ(am.a_norm(), 3.0);
  EXPECT_DOUBLE_EQ(am.m_norm(), 2.0);
  const std::vector<double> u{0.1, 0.2, 0.3, 0.4};
  const auto mu = am.apply_m(u);
  EXPECT_DOUBLE_EQ(mu[0], -0.1);
  EXPECT_DOUBLE_EQ(mu[1], 0.1 - 0.2);
  EXPECT_DOUBLE_EQ(mu[3], 0.3);
  for (int j = 0; j < 4; ++j) {
    double ca = 0.0, cm = 0.0;
    for (int i = 0; i < 4; ++i) {
      ca += am.a(i, j);
      cm += am.m(i, j);
    }
    EXPECT_DOUBLE_EQ(ca, 0.0);
    EXPECT_DOUBLE_EQ(cm, 0.0);
  }
}

TEST(Hydro, DriftMatchesMatrixForm) {
  const TorusLattice lat(1, 8);
  const auto p = make_params(1.3, 2, discretize(KernelSpec::cosine(2.0, 0.4), lat));
  const auto u = InitialProfile::cosine({0.3, 0.3, 0.4}, {0.1, -0.05, -0.05}).on_lattice(lat);
  const auto du = drift(u, p);
  const MatrixAM am(1.3, 2);
  const auto in = p.kernel->conv(u.component(2));
  for (std::size_t x = 0; x < lat.size(); ++x) {
    const auto au = am.apply_a(u.site(x));
    const auto mu = am.apply_m(u.site(x));
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(du(x, i), au[static_cast<std::size_t>(i)] + in[x] * mu[static_cast<std::size_t>(i)], 1e-15);
  }
}

TEST(Hydro, PureDecayWithoutInteraction) {
  // One site: no pairs, so the kernel never acts.
  const auto p = constant_model(1, 1.0, 1.0, 1);
  const auto u0 = InitialProfile::constant({0.3, 0.7}).on_lattice(p.lattice());
  const auto traj = integrate(u0, p, 1.0);
  EXPECT_NEAR(traj.final_state()(0, 1), 0.7 * std::exp(-1.0), 1e-10);
}

TEST(Hydro, LogisticClosedForm) {
  const std::size_t sites = 16;
  const double c = 3.0, a = 1.0;
  const auto p = constant_model(static_cast<int>(sites), c, a, 1);
  const auto u0 = InitialProfile::constant({0.8, 0.2}).on_lattice(p.lattice());
  IntegrateOptions opts;
  opts.step = 1e-3;
  const auto traj = integrate(u0, p, 2.0, opts);
  for (std::size_t j = 0; j < traj.times.size(); j += 250)
    EXPECT_NEAR(traj.states[j](3, 1), oracle::logistic_active(0.2, c, a, sites, traj.times[j]), 1e-8);
}

TEST(Hydro, FourthOrderConvergence) {
  const auto p = constant_model(8, 3.0, 1.0, 1);
  const auto u0 = InitialProfile::constant({0.8, 0.2}).on_lattice(p.lattice());
  const double exact = oracle::logistic_active(0.2, 3.0, 1.0, 8, 1.0);
  double err[2];
  int idx = 0;
  for (double h : {0.1, 0.05}) {
    IntegrateOptions opts;
    opts.step = h;
    err[idx++] = std::abs(integrate(u0, p, 1.0, opts).final_state()(0, 1) - exact);
  }
  EXPECT_NEAR(err[0] / err[1], 16.0, 2.0);
}

TEST(Hydro, InvariantsAlongTrajectory) {
  const TorusLattice lat(1, 32);
  const auto p = make_params(0.7, 3, discretize(KernelSpec::gaussian(4.0, 0.1), lat));
  const auto u0 = InitialProfile::cosine({0.25, 0.25, 0.25, 0.25}, {0.2, -0.1, 0.0, -0.1}).on_lattice(lat);
  const auto traj = integrate(u0, p, 3.0);
  ASSERT_TRUE(traj.complete());
  for (std::size_t j = 0; j < traj.times.size(); ++j) {
    const auto& u = traj.states[j];
    EXPECT_LT(u.max_simplex_deviation(), 1e-12);
    EXPECT_GE(u.min_component(), traj.floor_at(traj.times[j]));
    for (double v : u.values()) EXPECT_LE(v, 1.0);
  }
  EXPECT_DOUBLE_EQ(traj.end_time(), 3.0);
}

TEST(Hydro, LastStepShortened) {
  const auto p = constant_model(4, 1.0, 1.0, 1);
  const auto u0 = InitialProfile::constant({0.5, 0.5}).on_lattice(p.lattice());
  IntegrateOptions opts;
  opts.step = 0.3;
  const auto traj = integrate(u0, p, 1.0, opts);
  ASSERT_EQ(traj.times.size(), 5u);
  EXPECT_DOUBLE_EQ(traj.times.back(), 1.0);
  EXPECT_NEAR(traj.times[3], 0.9, 1e-15);
}

TEST(Hydro, RejectsBadInitialData) {
  const auto p = constant_model(4, 1.0, 1.0, 1);
  EXPECT_THROW(integrate(InitialProfile::constant({1.0, 0.0}).on_lattice(p.lattice()), p, 1.0), std::invalid_argument);
  EXPECT_THROW(InitialProfile::constant({0.6, 0.6}), std::invalid_argument);
  EXPECT_THROW(InitialProfile::cosine({0.5, 0.5}, {0.6, -0.6}), std::invalid_argument);
}

TEST(Hydro, StepTooLargeIsReported) {
  const auto p = constant_model(4, 40.0, 20.0, 1);
  const auto u0 = InitialProfile::constant({0.5, 0.5}).on_lattice(p.lattice());
  IntegrateOptions opts;
  opts.step = 0.5;
  EXPECT_THROW(integrate(u0, p, 2.0, opts), StepSizeError);
}

TEST(Hydro, DefaultStep) {
  const auto p = constant_model(4, 1.0, 1.0, 1);
  // lambda = 2a + 2 ||J||_{1,n} = 2 + 1.5.
  EXPECT_DOUBLE_EQ(lipschitz_scale(p), 3.5);
  EXPECT_DOUBLE_EQ(default_step(p), 0.01);
  const auto q = constant_model(4, 100.0, 1.0, 1);
  EXPECT_DOUBLE_EQ(default_step(q), 0.1 / (2.0 + 150.0));
}

TEST(Hydro, HermiteInterpolationReproducesCubicAccuracy) {
  const auto p = constant_model(8, 3.0, 1.0, 1);
  const auto u0 = InitialProfile::constant({0.8, 0.2}).on_lattice(p.lattice());
  IntegrateOptions opts;
  opts.step = 0.05;
  const auto traj = integrate(u0, p, 1.0, opts);
  const auto mid = traj.interpolate(6, 0.5);
  EXPECT_NEAR(mid(0, 1), oracle::logistic_active(0.2, 3.0, 1.0, 8, 0.325), 1e-6);
}

TEST(Hydro, RestrictToSubsamples) {
  const TorusLattice fine(1, 12), coarse(1, 4);
  const auto u = InitialProfile::cosine({0.5, 0.5}, {0.2, -0.2}).on_lattice(fine);
  const auto r = restrict_to(u, coarse);
  for (std::size_t x = 0; x < coarse.size(); ++x) EXPECT_EQ(r(x, 0), u(3 * x, 0));
  EXPECT_THROW(restrict_to(u, TorusLattice(1, 5)), std::invalid_argument);
}

TEST(HydroConvergence, ZeroDiagonalGivesFirstOrder) {
  const std::vector<int> sides{16, 32, 64};
  const auto profile = InitialProfile::cosine({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.15, 0.0, -0.15});
  const auto study = convergence_study(sides, KernelSpec::cosine(2.0, 0.5), profile, 1.0, 1, 1.0, 256);
  ASSERT_TRUE(study.fit.has_value());
  EXPECT_GT(study.fit->slope, -1.3);
  EXPECT_LT(study.fit->slope, -0.9);
}

TEST(HydroConvergence, KernelVanishingOnDiagonalIsSpectral) {
  const std::vector<int> sides{8, 16, 32};
  const auto profile = InitialProfile::cosine({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.15, 0.0, -0.15});
  const auto study = convergence_study(sides, KernelSpec::cosine(2.0, -1.0), profile, 1.0, 1, 1.0, 128);
  for (const auto& row : study.rows) EXPECT_LT(row.sup_error, 1e-12) << row.side;
}

TEST(HydroConvergence, ValidatesSides) {
  const auto profile = InitialProfile::constant({0.5, 0.5});
  const std::vector<int> two{8, 16}, bad{8, 16, 24};
  EXPECT_THROW(convergence_study(two, KernelSpec::constant(1.0), profile, 1.0, 1, 0.1), std::invalid_argument);
  EXPECT_THROW(convergence_study(bad, KernelSpec::constant(1.0), profile, 1.0, 1, 0.1, 64), std::invalid_argument);
  EXPECT_THROW(convergence_study(bad, KernelSpec::constant(1.0), profile, 1.0, 1, 0.1, 48), std::invalid_argument);
}

TEST(BackwardFP, SingleSiteClosedForm) {
  const auto p = constant_model(1, 1.0, 0.8, 1);
  const auto u0 = InitialProfile::constant({0.4, 0.6}).on_lattice(p.lattice());
  IntegrateOptions opts;
  opts.step = 0.01;
  const auto traj = integrate(u0, p, 1.0, opts);
  DensityField terminal(p.lattice(), 1);
  terminal(0, 0) = 0.3;
  terminal(0, 1) = 1.2;
  const auto g = backward_fp(terminal, traj, p);
  for (std::size_t j = 0; j < g.times.size(); j += 10) {
    const double s = g.times[j];
    EXPECT_NEAR(g.values[j](0, 0), 0.3, 1e-12);
    EXPECT_NEAR(g.values[j](0, 1), 0.3 + 0.9 * std::exp(-0.8 * (1.0 - s)), 1e-10);
  }
}

TEST(BackwardFP, DualToLinearizedForwardFlow) {
  // <g_0, delta u_0> = <g_t, delta u_t> for perturbations transported by the forward flow.
  const TorusLattice lat(1, 12);
  const auto p = make_params(1.0, 2, discretize(KernelSpec::cosine(2.5, 0.6), lat));
  const auto u0 = InitialProfile::cosine({0.3, 0.3, 0.4}, {0.1, -0.05, -0.05}).on_lattice(lat);
  RandomStream rng(31, 0);
  DensityField v(lat, 2), terminal(lat, 2);
  for (std::size_t x = 0; x < lat.size(); ++x) {
    const double a = rng.uniform() - 0.5, b = rng.uniform() - 0.5;
    v(x, 0) = a;
    v(x, 1) = b;
    v(x, 2) = -a - b;
    for (int i = 0; i < 3; ++i) terminal(x, i) = std::cos(0.7 * x + i);
  }
  const double eps = 1e-5, t = 0.8;
  IntegrateOptions opts;
  opts.step = 0.005;
  auto plus = u0, minus = u0;
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    plus.values()[i] += eps * v.values()[i];
    minus.values()[i] -= eps * v.values()[i];
  }
  const auto up = integrate(plus, p, t, opts).final_state();
  const auto um = integrate(minus, p, t, opts).final_state();
  const auto traj = integrate(u0, p, t, opts);
  const auto g = backward_fp(terminal, traj, p);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    lhs += g.values.front().values()[i] * v.values()[i];
    rhs += terminal.values()[i] * (up.values()[i] - um.values()[i]) / (2 * eps);
  }
  EXPECT_NEAR(lhs, rhs, 1e-7 * std::max(1.0, std::abs(rhs)));
}

TEST(ReferenceContinuum, MatchesDirectIntegration) {
  const auto profile = InitialProfile::cosine({0.5, 0.5}, {0.2, -0.2});
  const auto spec = KernelSpec::cosine(2.0, 0.5);
  const auto ref = reference_continuum(profile, spec, 1.0, 1, 16, 0.5, 0.01);
  const TorusLattice lat(1, 16);
  const auto p = make_params(1.0, 1, discretize(spec, lat));
  IntegrateOptions opts;
  opts.step = 0.01;
  EXPECT_EQ(sup_distance(ref, integrate(profile.on_lattice(lat), p, 0.5, opts).final_state()), 0.0);
}
