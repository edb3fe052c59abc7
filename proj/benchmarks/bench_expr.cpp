#include <benchmark/benchmark.h>

#include "pdmf/grid.hpp"
#include "pdmf/instances.hpp"

using namespace pdmf;
using namespace pdmf::funcrep;

namespace {

void BM_ProjectorEval(benchmark::State& state) {
  const auto p = instances::gen_idempotent_instance(2, state.range(0), 1, 2, 0.2, 3);
  const Point z = {Complex(0.3, 0.4), Complex(-0.2, 0.5)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(p, z));
  }
}
BENCHMARK(BM_ProjectorEval)->Arg(2)->Arg(4)->Arg(6);

void BM_UnitaryEval(benchmark::State& state) {
  const auto inst = instances::gen_symmetric_unitary_instance(1, state.range(0), 2, 0.3, 5);
  const Point z = {Complex(0.3, 0.4)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate(inst.u, z));
  }
}
BENCHMARK(BM_UnitaryEval)->Arg(2)->Arg(4)->Arg(6);

void BM_IdempotencyResidual(benchmark::State& state) {
  const auto p = instances::gen_idempotent_instance(1, 3, 1, 2, 0.3, 7);
  const DomainDescriptor d{1, 1, false};
  const auto grid = build_grid(d, state.range(0), 16, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(idempotency_residual(p, grid));
  }
}
BENCHMARK(BM_IdempotencyResidual)->Arg(5)->Arg(9);

}  // namespace

BENCHMARK_MAIN();
