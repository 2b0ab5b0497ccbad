// Serial reference vs OpenMP kernels, plus one full training step.
//   owcl_bench --benchmark_filter=gram

#include <benchmark/benchmark.h>

#include "owcl/kernels.hpp"
#include "owcl/pipeline.hpp"
#include "owcl/rng.hpp"

using namespace owcl;
namespace k = owcl::kernels;

namespace {

RowMatrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  Rng rng(seed);
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

template <bool Parallel>
void project_bench(benchmark::State& st) {
  const auto n = st.range(0), m = st.range(1);
  const RowMatrix x = random_matrix(n, 32, 1), w = random_matrix(32, m, 2);
  RowMatrix out(n, m);
  for (auto _ : st) {
    if constexpr (Parallel) k::parallel::project(k::view(x), k::view(w), true, k::mutable_view(out));
    else k::serial::project(k::view(x), k::view(w), true, k::mutable_view(out));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

template <bool Parallel>
void gram_bench(benchmark::State& st) {
  const auto n = st.range(0), m = st.range(1);
  const RowMatrix h = random_matrix(n, m, 3);
  RowMatrix g = RowMatrix::Zero(m, m);
  for (auto _ : st) {
    if constexpr (Parallel) k::parallel::gram_update(k::view(h), k::mutable_view(g));
    else k::serial::gram_update(k::view(h), k::mutable_view(g));
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * n);
}

template <bool Parallel>
void multiply_bench(benchmark::State& st) {
  const auto n = st.range(0), m = st.range(1);
  const RowMatrix h = random_matrix(n, m, 4), w = random_matrix(m, 20, 5);
  RowMatrix out(n, 20);
  for (auto _ : st) {
    if constexpr (Parallel) k::parallel::multiply(k::view(h), k::view(w), k::mutable_view(out));
    else k::serial::multiply(k::view(h), k::view(w), k::mutable_view(out));
    benchmark::DoNotOptimize(out.data());
  }
  st.SetItemsProcessed(st.iterations() * n);
}

void train_step(benchmark::State& st) {
  RunConfig c;
  c.projection_dim = static_cast<std::size_t>(st.range(0));
  const auto tasks = load_stream(c, 0);
  for (auto _ : st) {
    KnowledgeState s = initial_state(c, tasks.front().dimension, 0);
    train_task(s, tasks.front(), 0, c, 0);
    benchmark::DoNotOptimize(s.threshold_ratio());
  }
}

void shapes(benchmark::internal::Benchmark* b) {
  for (auto m : {512, 1000, 2500}) b->Args({400, m});
}

}  // namespace

BENCHMARK(project_bench<false>)->Name("project/serial")->Apply(shapes)->UseRealTime();
BENCHMARK(project_bench<true>)->Name("project/parallel")->Apply(shapes)->UseRealTime();
BENCHMARK(gram_bench<false>)->Name("gram/serial")->Apply(shapes)->UseRealTime();
BENCHMARK(gram_bench<true>)->Name("gram/parallel")->Apply(shapes)->UseRealTime();
BENCHMARK(multiply_bench<false>)->Name("multiply/serial")->Apply(shapes)->UseRealTime();
BENCHMARK(multiply_bench<true>)->Name("multiply/parallel")->Apply(shapes)->UseRealTime();
BENCHMARK(train_step)->Arg(1000)->Arg(2500)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
