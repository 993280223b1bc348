// Serial references against the OpenMP kernels. Thread counts are passed as
// the benchmark argument; on a single core the parallel rows show the
// scheduling overhead only.
#include <benchmark/benchmark.h>

#include <omp.h>

#include "ccx/expectation.hpp"
#include "ccx/gaussian.hpp"
#include "ccx/trees.hpp"

namespace {

ccx::ExpectationProblem problem(double source) {
  const auto g = ccx::line_grid(0.0, 4.0, 0.5);
  ccx::ExpectationProblem p;
  p.cov = ccx::grid_covariance(g);
  p.lambda_h = 0.01;
  if (source != 0.0) p.source_h.assign(g.size(), source);
  const std::vector<char> all(g.size(), 1);
  p.tasks.push_back({all, {{1.0, {}}}});
  p.tasks.push_back({all, {{1.0, {{0, 1, 0}, {6, 1, 0}}}}});
  p.tasks.push_back({all, {{1.0, {{3, 2, 0}}}}});
  return p;
}

const ccx::QuadratureOptions kQuad{6, 2, 3.0};

void BM_QuadratureSerial(benchmark::State& st) {
  const auto p = problem(0.0);
  for (auto _ : st) benchmark::DoNotOptimize(ccx::expect_quadrature_serial(p, kQuad));
  st.counters["nodes"] = static_cast<double>(ccx::quadrature_node_count(p.cov, kQuad));
}

void BM_QuadratureParallel(benchmark::State& st) {
  omp_set_num_threads(static_cast<int>(st.range(0)));
  const auto p = problem(0.0);
  for (auto _ : st) benchmark::DoNotOptimize(ccx::expect_quadrature(p, kQuad));
  omp_set_num_threads(1);
}

void BM_QuadratureParallelSourced(benchmark::State& st) {
  // A source disables the folding, so this row isolates the threading gain.
  omp_set_num_threads(static_cast<int>(st.range(0)));
  const auto p = problem(0.05);
  for (auto _ : st) benchmark::DoNotOptimize(ccx::expect_quadrature(p, kQuad));
  omp_set_num_threads(1);
}

void BM_QuadratureSerialSourced(benchmark::State& st) {
  const auto p = problem(0.05);
  for (auto _ : st) benchmark::DoNotOptimize(ccx::expect_quadrature_serial(p, kQuad));
}

void BM_Lemma3Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(ccx::lemma3_sum_serial(static_cast<int>(st.range(0))));
}

void BM_Lemma3Parallel(benchmark::State& st) {
  omp_set_num_threads(static_cast<int>(st.range(1)));
  for (auto _ : st) benchmark::DoNotOptimize(ccx::lemma3_sum(static_cast<int>(st.range(0))));
  omp_set_num_threads(1);
}

void BM_MonteCarlo(benchmark::State& st) {
  omp_set_num_threads(static_cast<int>(st.range(0)));
  const auto p = problem(0.0);
  for (auto _ : st) benchmark::DoNotOptimize(ccx::expect_monte_carlo(p, 200000, 1));
  omp_set_num_threads(1);
}

}  // namespace

BENCHMARK(BM_QuadratureSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureSerialSourced)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_QuadratureParallelSourced)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lemma3Serial)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Lemma3Parallel)->Args({9, 1})->Args({9, 2})->Args({9, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarlo)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
