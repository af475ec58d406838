#include <benchmark/benchmark.h>

#include <vector>

#include "gcph/entropy.hpp"
#include "gcph/gcp.hpp"
#include "gcph/hydro.hpp"
#include "gcph/kernel.hpp"

using namespace gcph;

namespace {

InitialProfile k2_profile() { return InitialProfile::cosine({1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.15, 0.0, -0.15}); }

void BM_SimulatorStep(benchmark::State& state, KernelSpec spec, bool fast_path) {
  const TorusLattice lat(1, static_cast<int>(state.range(0)));
  const auto p = make_params(1.0, 2, discretize(spec, lat));
  const auto u0 = k2_profile().on_lattice(lat);
  RandomStream rng(1, 0);
  auto sigma = sample_initial(u0, rng);
  SimulatorOptions opts;
  opts.constant_kernel_fast_path = fast_path;
  Simulator sim(p, sigma, rng, opts);
  for (auto _ : state) {
    if (sim.absorbed()) {
      state.PauseTiming();
      sim = Simulator(p, sigma, RandomStream(1, sim.events()), opts);
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sim.step());
  }
  state.SetItemsProcessed(state.iterations());
}

void BM_StepCosineTree(benchmark::State& s) { BM_SimulatorStep(s, KernelSpec::cosine(2.0, 0.5), false); }
void BM_StepConstantTree(benchmark::State& s) { BM_SimulatorStep(s, KernelSpec::constant(2.0), false); }
void BM_StepConstantFast(benchmark::State& s) { BM_SimulatorStep(s, KernelSpec::constant(2.0), true); }

void BM_Conv(benchmark::State& state, KernelStorage storage) {
  const TorusLattice lat(1, static_cast<int>(state.range(0)));
  const DiscreteKernel kernel(KernelSpec::cosine(2.0, 0.5), lat, storage);
  std::vector<double> g(lat.size(), 0.5), out(lat.size());
  for (auto _ : state) {
    kernel.conv(g, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}

void BM_ConvDense(benchmark::State& s) { BM_Conv(s, KernelStorage::dense); }
void BM_ConvOnTheFly(benchmark::State& s) { BM_Conv(s, KernelStorage::on_the_fly); }

void BM_Rk4Step(benchmark::State& state) {
  const TorusLattice lat(1, static_cast<int>(state.range(0)));
  const auto p = make_params(1.0, 2, discretize(KernelSpec::cosine(2.0, 0.5), lat));
  const auto u0 = k2_profile().on_lattice(lat);
  IntegrateOptions opts;
  opts.step = 1e-2;
  opts.keep_trajectory = false;
  for (auto _ : state) benchmark::DoNotOptimize(integrate(u0, p, 0.1, opts));
  state.SetItemsProcessed(state.iterations() * 10);
}

void BM_MasterEvolve(benchmark::State& state) {
  const TorusLattice lat(1, static_cast<int>(state.range(0)));
  const auto p = make_params(1.0, 1, discretize(KernelSpec::cosine(2.0, 0.5), lat));
  const StateSpace space(lat, 1);
  const auto law = profile_law(space, InitialProfile::cosine({0.5, 0.5}, {0.2, -0.2}).on_lattice(lat));
  for (auto _ : state) benchmark::DoNotOptimize(master_evolve(space, law, p, 0.01, 1e-3, false));
  state.SetItemsProcessed(state.iterations() * 10);
}

}  // namespace

BENCHMARK(BM_StepCosineTree)->Arg(64)->Arg(256)->Arg(1024);
BENCHMARK(BM_StepConstantTree)->Arg(256)->Arg(1024);
BENCHMARK(BM_StepConstantFast)->Arg(256)->Arg(1024);
BENCHMARK(BM_ConvDense)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_ConvOnTheFly)->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_Rk4Step)->Arg(128)->Arg(512);
BENCHMARK(BM_MasterEvolve)->Arg(6)->Arg(10);
BENCHMARK_MAIN();
