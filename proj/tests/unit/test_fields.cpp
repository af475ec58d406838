#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gcph/fields.hpp"
#include "oracles.hpp"

using namespace gcph;

namespace {

SpinConfig random_config(const TorusLattice& lat, int k, RandomStream& rng) {
  std::vector<int> s(lat.size());
  for (auto& v : s) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(k + 1)));
  return SpinConfig(lat, k, s);
}

}  // namespace

TEST(TestFunction, CatalogParsing) {
  EXPECT_EQ(TestFunction::parse("one").kind(), TestFunction::Kind::one);
  const auto c = TestFunction::parse("cos2");
  EXPECT_EQ(c.kind(), TestFunction::Kind::cosine);
  const std::vector<double> x{0.125};
  EXPECT_NEAR(c(x), 0.0, 1e-15);
  const auto s = TestFunction::parse("sin:1,1");
  const std::vector<double> y{0.125, 0.125};
  EXPECT_NEAR(s(y), 1.0, 1e-15);
  EXPECT_EQ(s.name(), "sin:1,1");
  EXPECT_THROW(TestFunction::parse("tan1"), std::invalid_argument);
  EXPECT_THROW(TestFunction::parse("cos"), std::invalid_argument);
}

TEST(TestFunction, NormsAndBump) {
  const TorusLattice lat(1, 64);
  EXPECT_NEAR(TestFunction::parse("cos1").l2n_squared(lat), 0.5, 1e-14);
  EXPECT_DOUBLE_EQ(TestFunction::one().l2n_squared(lat), 1.0);
  const auto b = TestFunction::bump();
  const std::vector<double> centre{0.5}, edge{0.1};
  EXPECT_DOUBLE_EQ(b(centre), 1.0);
  EXPECT_DOUBLE_EQ(b(edge), 0.0);
  const auto t = TestFunction::tabulated("tab", TorusLattice(1, 3), {0.5, -2.0, 1.0});
  EXPECT_DOUBLE_EQ(t.sup_norm(), 2.0);
  EXPECT_THROW(t.values(lat), std::invalid_argument);
}

TEST(CenteredField, WorkedExample) {
  const TorusLattice lat(1, 2);
  DensityField u(lat, 1);
  u(0, 0) = 0.4;
  u(0, 1) = 0.6;
  u(1, 0) = 0.5;
  u(1, 1) = 0.5;
  const auto w = centered_field(SpinConfig(lat, 1, {1, 0}), u);
  EXPECT_DOUBLE_EQ(w(0, 0), -0.4);
  EXPECT_DOUBLE_EQ(w(0, 1), 0.4);
  EXPECT_DOUBLE_EQ(w(1, 0) + w(1, 1), 0.0);
}

TEST(CenteredField, PointMassIsZero) {
  const TorusLattice lat(1, 10);
  DensityField u(lat, 2);
  for (std::size_t x = 0; x < lat.size(); ++x) u(x, 1) = 1.0;
  RandomStream rng(1, 0);
  const auto w = centered_field(sample_initial(u, rng), u);
  for (double v : w.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(lln_error(w, TestFunction::one(), 1), 0.0);
  EXPECT_EQ(fluctuation(w, TestFunction::one(), 1), 0.0);
}

TEST(LlnError, IdentitiesAndBounds) {
  const TorusLattice lat(1, 50);
  const auto u = InitialProfile::cosine({0.2, 0.3, 0.5}, {0.1, 0.0, -0.1}).on_lattice(lat);
  RandomStream rng(2, 0);
  const auto s = sample_initial(u, rng);
  const auto w = centered_field(s, u);
  for (int i = 0; i < 3; ++i) {
    double mean_u = 0.0;
    for (std::size_t x = 0; x < lat.size(); ++x) mean_u += u(x, i);
    mean_u /= 50.0;
    EXPECT_NEAR(lln_error(w, TestFunction::one(), i), s.count(i) / 50.0 - mean_u, 1e-14);
    const auto f = TestFunction::parse("sin3");
    const double e = lln_error(w, f, i);
    EXPECT_LE(std::abs(e), f.sup_norm());
    EXPECT_NEAR(fluctuation(w, f, i), std::sqrt(50.0) * e, 1e-12);
  }
  for (std::size_t x = 0; x < lat.size(); ++x) EXPECT_NEAR(w(x, 0) + w(x, 1) + w(x, 2), 0.0, 1e-15);
}

TEST(Fluctuation, InitialVarianceQuarter) {
  const TorusLattice lat(1, 100);
  const auto u = InitialProfile::constant({0.5, 0.5}).on_lattice(lat);
  const int replicas = 2000;
  double s = 0.0, s2 = 0.0, s4 = 0.0;
  for (int r = 0; r < replicas; ++r) {
    RandomStream rng(3, static_cast<std::uint64_t>(r));
    const double x = fluctuation(centered_field(sample_initial(u, rng), u), TestFunction::one(), 1);
    s += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  const double var = s2 / replicas - (s / replicas) * (s / replicas);
  const double se = std::sqrt((s4 / replicas - (s2 / replicas) * (s2 / replicas)) / replicas);
  EXPECT_NEAR(var, 0.25, 4.0 * se);
}

TEST(Fluctuation, LinearInTestFunction) {
  const TorusLattice lat(1, 30);
  const auto u = InitialProfile::constant({0.3, 0.7}).on_lattice(lat);
  RandomStream rng(4, 0);
  const auto w = centered_field(sample_initial(u, rng), u);
  const auto f = TestFunction::parse("cos1").values(lat), g = TestFunction::parse("sin2").values(lat);
  std::vector<double> h(lat.size());
  for (std::size_t x = 0; x < h.size(); ++x) h[x] = 2.0 * f[x] - 3.0 * g[x];
  EXPECT_NEAR(fluctuation(w, h, 1), 2.0 * fluctuation(w, f, 1) - 3.0 * fluctuation(w, g, 1), 1e-12);
}

TEST(CarreDuChamp, WorkedExample) {
  const auto p = make_params(1.5, 1, discretize(KernelSpec::constant(1.0), TorusLattice(1, 4)));
  const SpinConfig s(p.lattice(), 1, {1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(carre_du_champ(s, p, TestFunction::one(), 1, 1), 1.0);
}

TEST(CarreDuChamp, VanishesWithoutActivity) {
  const auto p = make_params(1.0, 3, discretize(KernelSpec::cosine(1.0, 0.3), TorusLattice(1, 6)));
  const SpinConfig s(p.lattice(), 3, {0, 1, 2, 0, 1, 2});
  EXPECT_EQ(carre_du_champ(s, p, TestFunction::one(), 1, 1), 0.0);
  const SpinConfig t(p.lattice(), 3, {0, 0, 0, 0, 0, 0});
  EXPECT_EQ(carre_du_champ(t, p, TestFunction::one(), 2, 2), 0.0);
}

TEST(CarreDuChamp, PolarizationBoundAndSign) {
  const TorusLattice lat(1, 20);
  const auto spec = KernelSpec::cosine(2.0, 0.6);
  const auto p = make_params(1.2, 2, discretize(spec, lat));
  RandomStream rng(5, 0);
  const auto f = TestFunction::parse("cos1").values(lat), g = TestFunction::parse("sin1").values(lat);
  std::vector<double> fg(lat.size());
  for (std::size_t x = 0; x < fg.size(); ++x) fg[x] = f[x] + g[x];
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_config(lat, 2, rng);
    const auto rates = oracle::brute_rates(s.states(), 2, 1.2, spec, lat);
    for (int i = 0; i <= 2; ++i) {
      const int im = (i + 2) % 3;
      double mixed = 0.0;
      for (std::size_t x = 0; x < lat.size(); ++x) {
        const double d = (s[x] == im) - (s[x] == i);
        mixed += rates[x] * d * d * f[x] * g[x];
      }
      mixed /= static_cast<double>(lat.size());
      const double pol = carre_du_champ(s, p, fg, i, i) - carre_du_champ(s, p, f, i, i) - carre_du_champ(s, p, g, i, i);
      EXPECT_NEAR(pol, 2.0 * mixed, 1e-12);
      const double gff = carre_du_champ(s, p, f, i, i);
      EXPECT_GE(gff, 0.0);
      double l2 = 0.0;
      for (double v : f) l2 += v * v;
      l2 /= static_cast<double>(lat.size());
      EXPECT_LE(gff, (p.recovery_rate + p.kernel->sup_norm()) * l2 + 1e-12);
    }
  }
}
