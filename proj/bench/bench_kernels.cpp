// Serial vs OpenMP kernels on the K = 20, d = 3, n = 100 clustering workload
// (50 inliers per subspace, 50% outliers, 70% observed, Q = 10K candidates).

#include <benchmark/benchmark.h>

#include <limits>

#include "gasg/kernels.hpp"
#include "gasg/ksubspaces.hpp"
#include "gasg/synth.hpp"

namespace {

using namespace gasg;

struct Workload {
  Eigen::MatrixXd z;
  std::vector<ObservedVector> unit;
  std::vector<Subspace> candidates;
  std::vector<Subspace> selected;
  std::vector<Index> seeds;
  Eigen::MatrixXd residuals;

  Workload() {
    UnionSpec s;
    s.k = 20;
    s.d = 3;
    s.n = 100;
    s.inliers_per_subspace = 50;
    s.outlier_fraction = 0.5;
    s.observe_fraction = 0.7;
    const SyntheticProblem p = gen_union(s);
    z = zero_filled(p.data);
    unit = spherize_all(p.data.columns);
    Rng rng = make_rng(1, stream::seeding);
    const CandidateSet set = seed_candidates(z, 200, 3, 6, rng);
    candidates = set.candidates;
    seeds = set.seed_columns;
    selected.assign(candidates.begin(), candidates.begin() + 20);
    residuals = kernels::serial::residual_matrix(candidates, unit);
  }
};

const Workload& workload() {
  static const Workload w;
  return w;
}

template <bool Parallel>
void BM_ResidualMatrix(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::omp::residual_matrix(w.candidates, w.unit));
    } else {
      benchmark::DoNotOptimize(kernels::serial::residual_matrix(w.candidates, w.unit));
    }
  }
}

template <bool Parallel>
void BM_AssignColumns(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::omp::assign_columns(w.selected, w.unit));
    } else {
      benchmark::DoNotOptimize(kernels::serial::assign_columns(w.selected, w.unit));
    }
  }
}

template <bool Parallel>
void BM_LocalFits(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::omp::local_fits(w.z, w.seeds, 6, 3));
    } else {
      benchmark::DoNotOptimize(kernels::serial::local_fits(w.z, w.seeds, 6, 3));
    }
  }
}

template <bool Parallel>
void BM_MinSqDistance(benchmark::State& state) {
  const Workload& w = workload();
  std::vector<double> d2(static_cast<std::size_t>(w.z.cols()), std::numeric_limits<double>::infinity());
  Index seed = 0;
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::omp::update_min_sq_distance(w.z, seed, d2);
    } else {
      kernels::serial::update_min_sq_distance(w.z, seed, d2);
    }
    seed = (seed + 97) % w.z.cols();
    benchmark::ClobberMemory();
  }
}

template <bool Parallel>
void BM_FacilityTotals(benchmark::State& state) {
  const Workload& w = workload();
  std::vector<double> current(static_cast<std::size_t>(w.residuals.cols()), 1.0);
  std::vector<bool> chosen(static_cast<std::size_t>(w.residuals.rows()), false);
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(kernels::omp::facility_totals(w.residuals, current, chosen));
    } else {
      benchmark::DoNotOptimize(kernels::serial::facility_totals(w.residuals, current, chosen));
    }
  }
}

BENCHMARK(BM_ResidualMatrix<false>)->Name("residual_matrix/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResidualMatrix<true>)->Name("residual_matrix/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_AssignColumns<false>)->Name("assign_columns/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssignColumns<true>)->Name("assign_columns/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LocalFits<false>)->Name("local_fits/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LocalFits<true>)->Name("local_fits/omp")->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MinSqDistance<false>)->Name("update_min_sq_distance/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_MinSqDistance<true>)->Name("update_min_sq_distance/omp")->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_FacilityTotals<false>)->Name("facility_totals/serial")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_FacilityTotals<true>)->Name("facility_totals/omp")->Unit(benchmark::kMicrosecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
