#include <benchmark/benchmark.h>

#include "agmm/cluster.hpp"
#include "agmm/loss.hpp"
#include "agmm/rng.hpp"
#include "agmm/snr.hpp"

namespace {

agmm::Matrix random_symmetric(std::size_t d, std::uint64_t seed) {
  agmm::Philox4x32 rng(seed);
  agmm::Matrix m(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.normal();
  return m;
}

void BM_SymEig(benchmark::State& state) {
  const agmm::Matrix m = random_symmetric(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(agmm::sym_eig(m));
}
BENCHMARK(BM_SymEig)->Arg(5)->Arg(20)->Arg(50);

void BM_MisclusteringRate(benchmark::State& state) {
  const auto k = static_cast<std::size_t>(state.range(0));
  agmm::Philox4x32 rng(2);
  agmm::LabelVector z(std::vector<int>(1200)), zstar(std::vector<int>(1200));
  for (std::size_t j = 0; j < 1200; ++j) {
    zstar[j] = static_cast<int>(rng.uniform_index(k));
    z[j] = rng.uniform() < 0.9 ? zstar[j] : static_cast<int>(rng.uniform_index(k));
  }
  for (auto _ : state) benchmark::DoNotOptimize(agmm::misclustering_rate(z, zstar, k));
}
BENCHMARK(BM_MisclusteringRate)->Arg(3)->Arg(30);

void BM_AdjustedLloydSim1(benchmark::State& state) {
  const agmm::GmmParams p = agmm::make_sim1(3);
  const agmm::Dataset ds = agmm::sample(p, agmm::balanced_assignment(1200, p.k), 4);
  agmm::LloydOptions opts;
  opts.restarts = 1;
  const agmm::LabelVector z0 = agmm::vanilla_lloyd(ds, p.k, 5, opts).labels;
  for (auto _ : state) benchmark::DoNotOptimize(agmm::adjusted_lloyd_homog(ds, p.k, z0, 8));
}
BENCHMARK(BM_AdjustedLloydSim1)->Unit(benchmark::kMillisecond);

void BM_AdjustedLloydSim2(benchmark::State& state) {
  const agmm::GmmParams p = agmm::make_sim2(3);
  const agmm::Dataset ds = agmm::sample(p, agmm::balanced_assignment(1200, p.k), 4);
  const agmm::LabelVector z0 = agmm::vanilla_lloyd(ds, p.k, 5).labels;
  for (auto _ : state) benchmark::DoNotOptimize(agmm::adjusted_lloyd_hetero(ds, p.k, z0, 8));
}
BENCHMARK(BM_AdjustedLloydSim2)->Unit(benchmark::kMillisecond);

void BM_SnrPrimeSim2(benchmark::State& state) {
  const agmm::GmmParams p = agmm::make_sim2(3);
  for (auto _ : state) benchmark::DoNotOptimize(agmm::snr_hetero(p));
}
BENCHMARK(BM_SnrPrimeSim2);

}  // namespace

BENCHMARK_MAIN();
