#include <benchmark/benchmark.h>

#include "mbcert/protocol.hpp"
#include "mbcert/walk.hpp"

namespace {

// exp(-iHt)v on the two-wall walk Hamiltonian, Chebyshev vs dense.
void BM_ExpmWalk(benchmark::State& state, mbcert::ExpmMethod method) {
  const int n = static_cast<int>(state.range(0));
  const auto h = mbcert::build_walk_hamiltonian(mbcert::IsingParams{n, 1.0, 10.0});
  const auto v = mbcert::walk_state(h, 2, 2);
  const mbcert::Propagator prop(h.matrix, method);
  for (auto _ : state) benchmark::DoNotOptimize(prop.evolve(v, 0.5 * n));
  state.counters["dim"] = static_cast<double>(h.basis.size());
}
BENCHMARK_CAPTURE(BM_ExpmWalk, chebyshev, mbcert::ExpmMethod::kChebyshev)->Arg(16)->Arg(24)->Arg(32);
BENCHMARK_CAPTURE(BM_ExpmWalk, dense, mbcert::ExpmMethod::kDense)->Arg(16)->Arg(24)->Arg(32);

void BM_PropagateWalk(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto h = mbcert::build_walk_hamiltonian(mbcert::IsingParams{n, 1.0, 10.0});
  for (auto _ : state) benchmark::DoNotOptimize(mbcert::propagate_walk(h, 1.5 * n, 0.05));
}
BENCHMARK(BM_PropagateWalk)->Arg(24)->Arg(48)->Unit(benchmark::kMillisecond);

void BM_RunProtocol(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const mbcert::IsingParams p{n, 0.1, 1.0};
  const auto spec = mbcert::make_toy_protocol(p, 50.0);
  const auto g = mbcert::ground_state(p);
  for (auto _ : state) benchmark::DoNotOptimize(mbcert::run_protocol(spec, g));
}
BENCHMARK(BM_RunProtocol)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
