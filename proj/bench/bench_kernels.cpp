// Serial reference kernels against the OpenMP kernels, for the raw products
// and for a full forward/backward pass of the classifier.
//
//   bench_kernels --benchmark_filter=matmul
//   OMP_NUM_THREADS=4 bench_kernels

#include <benchmark/benchmark.h>
#include <omp.h>

#include "rankcal/kernels.hpp"
#include "rankcal/model.hpp"

namespace {

using rankcal::Matrix;
using rankcal::kernels::Exec;

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  rankcal::Rng rng(seed);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

template <Exec E>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  Matrix out(n, n);
  for (auto _ : state) {
    rankcal::kernels::matmul(a, b, out, E);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
  state.counters["threads"] = E == Exec::serial ? 1 : omp_get_max_threads();
}

template <Exec E>
void BM_matmul_at_b(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 3), b = random_matrix(n, n, 4);
  Matrix out(n, n);
  for (auto _ : state) {
    rankcal::kernels::matmul_at_b(a, b, out, E);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <Exec E>
void BM_matmul_a_bt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix a = random_matrix(n, n, 5), b = random_matrix(n, n, 6);
  Matrix out(n, n);
  for (auto _ : state) {
    rankcal::kernels::matmul_a_bt(a, b, out, E);
    benchmark::DoNotOptimize(out.data().data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

// One training step's worth of model work on a 32x32 toy batch.
template <Exec E>
void BM_forward_backward(benchmark::State& state) {
  const auto batch = static_cast<std::size_t>(state.range(0));
  rankcal::Rng rng(7);
  const rankcal::MlpModel model = rankcal::init_model({1024, 64, 7}, rng);
  const Matrix x = random_matrix(batch, 1024, 8);
  const Matrix up = random_matrix(batch, 7, 9);
  for (auto _ : state) {
    const auto pass = rankcal::forward(model, x, E);
    auto grad = rankcal::backward(model, pass, up, E);
    benchmark::DoNotOptimize(grad.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(batch));
}

}  // namespace

BENCHMARK(BM_matmul<Exec::serial>)->Name("matmul/serial")->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(BM_matmul<Exec::parallel>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(64, 256);
BENCHMARK(BM_matmul_at_b<Exec::serial>)->Name("matmul_at_b/serial")->Arg(128);
BENCHMARK(BM_matmul_at_b<Exec::parallel>)->Name("matmul_at_b/parallel")->Arg(128);
BENCHMARK(BM_matmul_a_bt<Exec::serial>)->Name("matmul_a_bt/serial")->Arg(128);
BENCHMARK(BM_matmul_a_bt<Exec::parallel>)->Name("matmul_a_bt/parallel")->Arg(128);
BENCHMARK(BM_forward_backward<Exec::serial>)->Name("forward_backward/serial")->Arg(32)->Arg(256);
BENCHMARK(BM_forward_backward<Exec::parallel>)->Name("forward_backward/parallel")->Arg(32)->Arg(256);

BENCHMARK_MAIN();
