#include "anderson/accel.hpp"
#include "anderson/problems.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace anderson;

namespace {

Vector random_vector(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = n01(rng);
  return v;
}

// Steady-state history update: drop the oldest column, append a new one.
void BM_QrSlide(benchmark::State& state) {
  const Index n = state.range(0);
  const Index m = state.range(1);
  std::mt19937_64 rng(1);
  DifferenceQr qr(n, m);
  std::vector<std::pair<Vector, Vector>> cols;
  for (int i = 0; i < 64; ++i) cols.emplace_back(random_vector(n, rng), random_vector(n, rng));
  for (Index i = 0; i < m; ++i) qr.append_column(cols[i].first, cols[i].second);
  std::size_t next = 0;
  for (auto _ : state) {
    qr.drop_oldest();
    qr.append_column(cols[next].first, cols[next].second);
    next = (next + 1) % cols.size();
  }
}
BENCHMARK(BM_QrSlide)->Args({2500, 8})->Args({2500, 32})->Args({750, 16});

void BM_QrMixing(benchmark::State& state) {
  const Index n = state.range(0);
  const Index m = state.range(1);
  std::mt19937_64 rng(2);
  DifferenceQr qr(n, m);
  for (Index i = 0; i < m; ++i) qr.append_column(random_vector(n, rng), random_vector(n, rng));
  const Vector f = random_vector(n, rng);
  const Vector x = random_vector(n, rng);
  const Vector gx = x + f;
  for (auto _ : state) benchmark::DoNotOptimize(qr.solve_mixing(f, x, gx));
}
BENCHMARK(BM_QrMixing)->Args({2500, 8})->Args({2500, 32});

void BM_BratuMap(benchmark::State& state) {
  const auto p = BratuProblem::make(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(3);
  const Vector x = random_vector(p.dimension(), rng) * 0.1;
  for (auto _ : state) benchmark::DoNotOptimize(p.map(x));
}
BENCHMARK(BM_BratuMap)->Arg(50)->Arg(100);

void BM_AdmixtureEm(benchmark::State& state) {
  const auto p = gen_admixture_data(1);
  for (auto _ : state) benchmark::DoNotOptimize(p.em_map(p.start));
}
BENCHMARK(BM_AdmixtureEm)->Unit(benchmark::kMicrosecond);

void BM_AdmixtureLoglik(benchmark::State& state) {
  const auto p = gen_admixture_data(1);
  for (auto _ : state) benchmark::DoNotOptimize(p.loglik(p.start));
}
BENCHMARK(BM_AdmixtureLoglik)->Unit(benchmark::kMicrosecond);

// Full Bratu solve from a fixed uniform start.
void BM_BratuSolve(benchmark::State& state) {
  const auto p = BratuProblem::make(50).as_mapping();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector x0(p.dimension);
  for (Index i = 0; i < x0.size(); ++i) x0(i) = u(rng);
  Algorithm algo;
  algo.relax = static_cast<Relaxation>(state.range(0));
  algo.composite = state.range(1) != 0;
  SolveOptions opts;
  opts.m = static_cast<int>(state.range(2));
  long maps = 0;
  for (auto _ : state) {
    const auto r = solve(p, x0, algo, opts);
    maps = r.map_count;
  }
  state.counters["maps"] = static_cast<double>(maps);
}
BENCHMARK(BM_BratuSolve)
    ->ArgNames({"relax", "composite", "m"})
    ->Args({static_cast<int>(Relaxation::constant), 0, 64})
    ->Args({static_cast<int>(Relaxation::opt1), 0, 32})
    ->Args({static_cast<int>(Relaxation::md), 0, 32})
    ->Args({static_cast<int>(Relaxation::md), 1, 32})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
