#include <benchmark/benchmark.h>

#include "fbrsim/simulation.hpp"

using namespace fbrsim;

namespace {

const std::vector<double> kFeed = {0.215, 0.645, 0.10, 0.04};

EosKind eos_arg(const benchmark::State& st) { return static_cast<EosKind>(st.range(0)); }

std::string eos_label(const benchmark::State& st) { return std::string(to_string(eos_arg(st))); }

void BM_Enthalpy(benchmark::State& st) {
  const FluidModel fluid(ammonia_components(), eos_arg(st));
  for (auto _ : st) benchmark::DoNotOptimize(enthalpy(fluid, 760.0, 200e5, kFeed));
  st.SetLabel(eos_label(st));
}

void BM_ThermoDerivatives(benchmark::State& st) {
  const FluidModel fluid(ammonia_components(), eos_arg(st));
  const double Vm = fluid.volume(760.0, 200e5, std::span<const double>(kFeed));
  ThermoState s{760.0, 200e5, {}};
  for (double x : kFeed) s.c.push_back(x / Vm);
  for (auto _ : st) benchmark::DoNotOptimize(thermo_derivatives(fluid, s));
  st.SetLabel(eos_label(st));
}

void BM_Residual(benchmark::State& st) {
  const SemiDiscreteSystem sys(build_afbr({}, {}, EosKind::SRK), static_cast<int>(st.range(0)));
  const auto cond = nominal_conditions(ammonia_components(), 760.0);
  const auto w = sys.initial_guess(cond);
  for (auto _ : st) benchmark::DoNotOptimize(sys.residual(w, cond));
  st.SetComplexityN(st.range(0));
}

void BM_Jacobian(benchmark::State& st) {
  const SemiDiscreteSystem sys(build_afbr({}, {}, EosKind::SRK), static_cast<int>(st.range(0)));
  const auto cond = nominal_conditions(ammonia_components(), 760.0);
  const auto w = sys.initial_guess(cond);
  for (auto _ : st) benchmark::DoNotOptimize(sys.jacobian(w, cond));
  st.SetComplexityN(st.range(0));
}

void BM_SteadyNewton(benchmark::State& st) {
  const SemiDiscreteSystem sys(build_afbr({}, {}, EosKind::SRK), static_cast<int>(st.range(0)));
  const auto cond = nominal_conditions(ammonia_components(), 760.0);
  for (auto _ : st) {
    const auto r = solve_steady(sys, cond);
    if (!r.converged()) st.SkipWithError("steady solve did not converge");
    benchmark::DoNotOptimize(r.outputs);
  }
}

}  // namespace

BENCHMARK(BM_Enthalpy)->DenseRange(0, 2);
BENCHMARK(BM_ThermoDerivatives)->DenseRange(0, 2);
BENCHMARK(BM_Residual)->RangeMultiplier(2)->Range(25, 200)->Complexity(benchmark::oN);
BENCHMARK(BM_Jacobian)->RangeMultiplier(2)->Range(25, 200)->Complexity(benchmark::oN);
BENCHMARK(BM_SteadyNewton)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
