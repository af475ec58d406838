#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <vector>

#include "gcph/kernel.hpp"
#include "gcph/lattice.hpp"
#include "gcph/random.hpp"
#include "oracles.hpp"

using namespace gcph;

TEST(TorusLattice, IndexCoordsRoundTrip) {
  const TorusLattice lat(3, 5);
  EXPECT_EQ(lat.size(), 125u);
  for (std::size_t x = 0; x < lat.size(); ++x) EXPECT_EQ(lat.index(lat.coords(x)), x);
}

TEST(TorusLattice, WrapsCoordinates) {
  const TorusLattice lat(2, 4);
  const std::vector<int> a{-1, 5}, b{3, 1};
  EXPECT_EQ(lat.index(a), lat.index(b));
  EXPECT_DOUBLE_EQ(lat.site_weight(), 1.0 / 16.0);
  const auto p = lat.point(lat.index(b));
  EXPECT_DOUBLE_EQ(p[0], 0.75);
  EXPECT_DOUBLE_EQ(p[1], 0.25);
}

TEST(TorusLattice, RejectsBadShape) {
  EXPECT_THROW(TorusLattice(0, 4), std::invalid_argument);
  EXPECT_THROW(TorusLattice(1, 0), std::invalid_argument);
}

TEST(DiscreteKernel, ConstantKernelNormOnFourSites) {
  const auto k = discretize(KernelSpec::constant(1.0), TorusLattice(1, 4));
  EXPECT_DOUBLE_EQ(k.norm_1n(), 0.75);
  EXPECT_DOUBLE_EQ(k(2, 2), 0.0);
  EXPECT_DOUBLE_EQ(k(0, 3), 1.0);
}

TEST(DiscreteKernel, ConvMatchesBruteForce) {
  const TorusLattice lat(2, 6);
  RandomStream rng(11, 0);
  std::vector<double> g(lat.size());
  for (auto& v : g) v = rng.uniform() - 0.3;
  for (const auto& spec : {KernelSpec::cosine(2.0, 0.5), KernelSpec::gaussian(1.0, 0.15), KernelSpec::constant(0.7)}) {
    const auto kernel = discretize(spec, lat);
    const auto got = kernel.conv(g);
    const auto want = oracle::brute_conv(spec, lat, g);
    for (std::size_t x = 0; x < g.size(); ++x) EXPECT_NEAR(got[x], want[x], 1e-12) << spec.name();
  }
}

TEST(DiscreteKernel, DenseAndOnTheFlyAgree) {
  RandomStream rng(12, 0);
  for (const auto& lat : {TorusLattice(1, 64), TorusLattice(2, 8)}) {
    std::vector<double> g(lat.size());
    for (auto& v : g) v = rng.uniform();
    for (const auto& spec :
         {KernelSpec::cosine(1.5, -0.8), KernelSpec::gaussian(2.0, 0.05), KernelSpec::constant(0.7)}) {
      const auto dense = discretize(spec, lat, KernelStorage::dense);
      const auto lazy = discretize(spec, lat, KernelStorage::on_the_fly);
      ASSERT_TRUE(dense.is_dense());
      ASSERT_FALSE(lazy.is_dense());
      const auto a = dense.conv(g), b = lazy.conv(g);
      for (std::size_t x = 0; x < g.size(); ++x) EXPECT_NEAR(a[x], b[x], 1e-12) << spec.name();
      EXPECT_NEAR(dense.norm_1n(), lazy.norm_1n(), 1e-12);
      for (std::size_t y : {std::size_t{0}, std::size_t{5}, lat.size() - 1}) {
        std::vector<double> ca(lat.size(), 0.0), cb(lat.size(), 0.0);
        dense.add_column(y, 1.5, ca);
        lazy.add_column(y, 1.5, cb);
        for (std::size_t x = 0; x < g.size(); ++x) EXPECT_NEAR(ca[x], cb[x], 1e-14) << spec.name();
        EXPECT_EQ(cb[y], 0.0);
      }
    }
  }
}

TEST(DiscreteKernel, AdjointPairing) {
  const TorusLattice lat(1, 10);
  std::vector<double> table(lat.size() * lat.size());
  RandomStream rng(13, 0);
  for (auto& v : table) v = rng.uniform();
  const auto kernel = discretize(KernelSpec(TabulatedKernel{lat, table}), lat);
  EXPECT_FALSE(kernel.is_symmetric());
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> f(lat.size()), g(lat.size());
    for (auto& v : f) v = rng.uniform() - 0.5;
    for (auto& v : g) v = rng.uniform() - 0.5;
    const auto jf = kernel.conv(f);
    const auto jtg = kernel.conv_adjoint(g);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t x = 0; x < f.size(); ++x) {
      lhs += g[x] * jf[x];
      rhs += jtg[x] * f[x];
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(DiscreteKernel, ConvBoundedBySupTimesMass) {
  const TorusLattice lat(1, 32);
  const auto kernel = discretize(KernelSpec::cosine(2.0, 0.5), lat);
  RandomStream rng(14, 0);
  std::vector<double> g(lat.size());
  double gmax = 0.0;
  for (auto& v : g) {
    v = 2.0 * rng.uniform() - 1.0;
    gmax = std::max(gmax, std::abs(v));
  }
  const auto out = kernel.conv(g);
  for (double v : out) EXPECT_LE(std::abs(v), kernel.norm_1n() * gmax + 1e-12);
  EXPECT_LE(kernel.norm_1n(), kernel.sup_norm());
}

TEST(DiscreteKernel, AddColumnMatchesConv) {
  const TorusLattice lat(2, 5);
  const auto kernel = discretize(KernelSpec::gaussian(1.0, 0.2), lat);
  std::vector<double> e(lat.size(), 0.0), field(lat.size(), 0.0);
  e[7] = 1.0;
  kernel.add_column(7, 1.0, field);
  const auto want = kernel.conv(e);
  for (std::size_t x = 0; x < field.size(); ++x) EXPECT_NEAR(field[x], want[x], 1e-15);
}

TEST(KernelSpec, ClosedFormNorms) {
  const auto c = KernelSpec::cosine(2.0, 0.5);
  EXPECT_DOUBLE_EQ(*c.sup_norm(1), 3.0);
  EXPECT_DOUBLE_EQ(*c.l1_norm(1), 2.0);
  EXPECT_THROW(KernelSpec::cosine(1.0, 1.5), std::invalid_argument);
  EXPECT_THROW(KernelSpec::constant(-1.0), std::invalid_argument);
}

TEST(KernelSpec, LoadCsv) {
  const TorusLattice lat(1, 3);
  const auto path = std::filesystem::temp_directory_path() / "gcph_kernel_test.csv";
  {
    std::ofstream out(path);
    out << "x,y,value\n0,1,2.0\n1,0,2.0\n2,0,0.5\n";
  }
  const auto spec = KernelSpec::load_csv(path, lat);
  const auto kernel = discretize(spec, lat);
  EXPECT_DOUBLE_EQ(kernel(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(kernel(2, 0), 0.5);
  EXPECT_DOUBLE_EQ(kernel(0, 2), 0.0);
  EXPECT_FALSE(kernel.is_symmetric());
  std::filesystem::remove(path);
}
