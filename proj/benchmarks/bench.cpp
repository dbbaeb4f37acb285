#include <benchmark/benchmark.h>

#include <memory>

#include <dsy/cascade.hpp>
#include <dsy/criteria.hpp>
#include <dsy/kernels.hpp>

namespace {

using namespace dsy;

CascadeModel yule() {
  CascadeModel m;
  m.kernel = std::make_shared<MarkovKernel>(mean_field_point_mass(1.0));
  m.initial_state = 1.0;
  return m;
}

void BM_zeta_yule(benchmark::State& state) {
  const auto m = yule();
  const int n = static_cast<int>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const auto z = zeta_to_depth(m, n, 1 << 22, 1, trial++);
    benchmark::DoNotOptimize(z.zeta.back());
  }
}
BENCHMARK(BM_zeta_yule)->Arg(15)->Arg(20)->Arg(25);

void BM_zeta_bessel(benchmark::State& state) {
  CascadeModel m;
  m.kernel = std::make_shared<MarkovKernel>(bessel_kernel());
  m.initial_state = 1.0;
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const auto z = zeta_to_depth(m, 15, 1 << 22, 2, trial++);
    benchmark::DoNotOptimize(z.zeta.back());
  }
}
BENCHMARK(BM_zeta_bessel);

void BM_frontier_yule(benchmark::State& state) {
  const auto m = yule();
  const double t = static_cast<double>(state.range(0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    const auto r = simulate_frontier(m, t, 1 << 22, 3, trial++);
    benchmark::DoNotOptimize(r.crossed_count);
  }
}
BENCHMARK(BM_frontier_yule)->Arg(3)->Arg(6)->Arg(9);

void BM_discretize_bessel(benchmark::State& state) {
  const auto k = bessel_kernel();
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto op = discretize_operator(k, {0.0, 25.0, n}, 1.0);
    benchmark::DoNotOptimize(op.trans.data());
  }
}
BENCHMARK(BM_discretize_bessel)->Arg(250)->Arg(500)->Arg(1000);

void BM_operator_norm_bessel(benchmark::State& state) {
  const auto k = bessel_kernel();
  const auto op =
      discretize_operator(k, {0.0, 25.0, static_cast<int>(state.range(0))}, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(operator_norm(op));
}
BENCHMARK(BM_operator_norm_bessel)->Arg(250)->Arg(500)->Arg(1000);

void BM_pair_sequence(benchmark::State& state) {
  const auto k = bessel_kernel();
  const auto op = discretize_operator(k, {0.0, 25.0, 500}, 1.0);
  for (auto _ : state) {
    const auto rows = pair_sequence(op, 50);
    benchmark::DoNotOptimize(rows.back().nth_root);
  }
}
BENCHMARK(BM_pair_sequence);

}  // namespace

BENCHMARK_MAIN();
