#include <benchmark/benchmark.h>

#include "pdmf/factor2.hpp"
#include "pdmf/instances.hpp"
#include "pdmf/kato.hpp"

using namespace pdmf;
using namespace pdmf::funcrep;

namespace {

void BM_KatoTransport(benchmark::State& state) {
  const auto p = instances::gen_idempotent_instance(1, 3, 1, 2, 0.3, 7);
  const kato::ExprField field(p);
  const Point z = {Complex(0.6, 0.5)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kato::kato_transport(field, z, state.range(0)));
  }
}
BENCHMARK(BM_KatoTransport)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_OdeFactorizePoint(benchmark::State& state) {
  const auto inst = instances::gen_symmetric_unitary_instance(1, 3, 2, 0.3, 9);
  factor2::FactorizationConfig cfg;
  cfg.ode_steps = state.range(0);
  const Point z = {Complex(0.6, 0.5)};
  for (auto _ : state) {
    benchmark::DoNotOptimize(factor2::ode_factorize_point(inst.u, z, cfg));
  }
}
BENCHMARK(BM_OdeFactorizePoint)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
