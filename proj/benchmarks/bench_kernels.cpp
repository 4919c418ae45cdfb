#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "rydcycle/coupling.hpp"
#include "rydcycle/exact.hpp"
#include "rydcycle/meanfield.hpp"
#include "rydcycle/observables.hpp"
#include "rydcycle/osdtwa.hpp"

using namespace rydcycle;

namespace {

const CollectiveCouplings kChi = CollectiveCouplings::uniform(12.0);

void BM_TwaStepAllToAll(benchmark::State& st) {
  const Lattice lat(static_cast<int>(st.range(0)));
  const auto cm = build_coupling_matrix(lat, AllToAll{kChi});
  TwaEngine engine(SystemParams::reference(2.0, 3.0), cm);
  TrajectoryState s = sample_initial(lat, 1);
  for (auto _ : st) engine.step(s, 5e-3);
  st.SetItemsProcessed(st.iterations() * static_cast<long>(lat.size()));
}
BENCHMARK(BM_TwaStepAllToAll)->Arg(8)->Arg(16)->Arg(32);

void BM_TwaStepVdw(benchmark::State& st) {
  const Lattice lat(static_cast<int>(st.range(0)));
  const auto cm = build_coupling_matrix(lat, calibrate_vdw(kChi));
  TwaEngine engine(SystemParams::reference(2.0, 3.0), cm);
  TrajectoryState s = sample_initial(lat, 1);
  for (auto _ : st) engine.step(s, 5e-3);
  st.SetItemsProcessed(st.iterations() * static_cast<long>(lat.size()));
}
BENCHMARK(BM_TwaStepVdw)->Arg(8)->Arg(16);

void BM_LiouvillianApply(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  std::vector<Site> sites;
  for (int l = 0; l < n; ++l) sites.push_back({0, l});
  const auto cm = build_coupling_matrix(sites, calibrate_vdw(kChi));
  const ExactLiouvillian l(SystemParams::reference(2.0, 3.0), cm);
  const DensityMatrix rho = DensityMatrix::ground(n);
  for (auto _ : st) benchmark::DoNotOptimize(l.apply(rho.matrix()));
}
BENCHMARK(BM_LiouvillianApply)->DenseRange(2, 5);

void BM_MeanFieldRhs(benchmark::State& st) {
  const SystemParams p = SystemParams::reference(2.0, 3.0);
  MFCoords x = MFState::mixture(0.2, 0.3).coords();
  for (auto _ : st) {
    x += 1e-12 * mf_rhs(x, p, kChi);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_MeanFieldRhs);

void BM_CorrelationFft(benchmark::State& st) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> d;
  std::vector<double> a(static_cast<std::size_t>(st.range(0)));
  for (auto& v : a) v = d(gen);
  const CorrelationOptions o{0.0, 20.0, 10.0};
  for (auto _ : st) benchmark::DoNotOptimize(two_time_correlation(a, a, 0.05, o));
}
BENCHMARK(BM_CorrelationFft)->Arg(40000)->Arg(400000);

}  // namespace
BENCHMARK_MAIN();
