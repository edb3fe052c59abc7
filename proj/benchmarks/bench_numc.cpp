#include <benchmark/benchmark.h>

#include <random>

#include "pdmf/numc.hpp"

using namespace pdmf;

namespace {

CMatrix random_matrix(Eigen::Index m, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const auto draw = [&gen] {
    return 2.0 * (static_cast<double>(gen() >> 11) * 0x1.0p-53) - 1.0;
  };
  CMatrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      a(i, j) = Complex(draw(), draw());
    }
  }
  return a;
}

CMatrix well_conditioned(Eigen::Index m, std::uint64_t seed) {
  CMatrix r = random_matrix(m, seed);
  r *= 0.8 / r.norm();
  return CMatrix(2.0 * CMatrix::Identity(m, m) + r);
}

void BM_MatInv(benchmark::State& state) {
  const CMatrix a = well_conditioned(state.range(0), 11);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numc::mat_inv(a));
  }
}
BENCHMARK(BM_MatInv)->Arg(2)->Arg(4)->Arg(8);

void BM_MatExpm(benchmark::State& state) {
  const CMatrix a = random_matrix(state.range(0), 13);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numc::mat_expm(a));
  }
}
BENCHMARK(BM_MatExpm)->Arg(2)->Arg(4)->Arg(8);

void BM_MatLogm(benchmark::State& state) {
  const CMatrix a = well_conditioned(state.range(0), 17);
  const numc::BranchAngle branch = numc::auto_branch(a);
  for (auto _ : state) {
    benchmark::DoNotOptimize(numc::mat_logm(a, branch));
  }
}
BENCHMARK(BM_MatLogm)->Arg(2)->Arg(4)->Arg(8);

void BM_IdempotentSplit(benchmark::State& state) {
  const Eigen::Index m = state.range(0);
  CMatrix t = CMatrix::Identity(m, m) +
              (0.5 / std::sqrt(static_cast<double>(m))) * random_matrix(m, 19);
  const CMatrix p = t * numc::rank_projector(m, m / 2) * t.partialPivLu().inverse();
  for (auto _ : state) {
    benchmark::DoNotOptimize(numc::idempotent_split(p));
  }
}
BENCHMARK(BM_IdempotentSplit)->Arg(2)->Arg(4)->Arg(8);

}  // namespace

BENCHMARK_MAIN();
