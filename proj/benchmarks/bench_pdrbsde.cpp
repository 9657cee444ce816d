#include "pdrbsde/calculus_checks.hpp"
#include "pdrbsde/drbsde.hpp"
#include "pdrbsde/snell.hpp"

#include <benchmark/benchmark.h>

#include <random>

namespace {

using namespace pdrbsde;

// N steps with a fair mark at instants 0..N-1: 4^N paths.
FilteredSpace marked_grid(int N) {
  SpaceSpec s;
  s.N = N;
  s.T = Rational(N, 16);
  for (int k = 0; k < N; ++k) s.marks.push_back({k, {"u", "d"}, {{Rational(1, 2), Rational(1, 2)}}});
  return build_space(s);
}

template <class S>
BarrierPair<S> random_pair(const FilteredSpace& sp, std::mt19937_64& rng) {
  BarrierPair<S> b;
  auto lo = random_predictable<Rational>(sp, rng, -8, 8, 4);
  auto gap = random_predictable<Rational>(sp, rng, 0, 6, 4);
  auto hi = lo + gap;
  hi.mid[sp.N] = lo.mid[sp.N];
  b.lower = convert<S>(lo);
  b.upper = convert<S>(hi);
  return b;
}

template <class S>
void BM_PreValue(benchmark::State& state) {
  auto sp = marked_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  auto xi = convert<S>(random_predictable<Rational>(sp, rng, -8, 8, 4));
  for (auto _ : state) benchmark::DoNotOptimize(pre_value(sp, xi));
  state.counters["paths"] = sp.n_paths;
}

template <class S>
void BM_SolveDrbsde(benchmark::State& state) {
  auto sp = marked_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(2);
  auto b = random_pair<S>(sp, rng);
  auto g = IntegrandProcess<S>::constant(sp, S(1));
  long iterations = 0;
  for (auto _ : state) {
    auto run = solve_drbsde(sp, b, g);
    iterations = run.picard.trace.iterations;
    benchmark::DoNotOptimize(run);
  }
  state.counters["paths"] = sp.n_paths;
  state.counters["picard_iterations"] = static_cast<double>(iterations);
}

template <class S>
void BM_PicardCoupled(benchmark::State& state) {
  auto sp = marked_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(3);
  auto shifted = shift_barriers(sp, random_pair<S>(sp, rng), IntegrandProcess<S>::constant(sp, S(1)));
  for (auto _ : state) benchmark::DoNotOptimize(picard_coupled(sp, shifted));
}

void BM_GalchoukLenglart(benchmark::State& state) {
  auto sp = marked_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(4);
  std::vector<OptionalSemimartingale<Rational>> X{OptionalSemimartingale<Rational>::random(sp, rng),
                                                  OptionalSemimartingale<Rational>::random(sp, rng)};
  auto F = Polynomial::random(2, 4, rng);
  for (auto _ : state) benchmark::DoNotOptimize(galchouk_lenglart_check(sp, X, F));
}

void BM_SnellBruteforce(benchmark::State& state) {
  auto sp = marked_grid(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(5);
  auto xi = random_predictable<Rational>(sp, rng, -8, 8, 4);
  for (auto _ : state) benchmark::DoNotOptimize(snell_bruteforce(sp, xi));
}

}  // namespace

BENCHMARK(BM_PreValue<double>)->DenseRange(1, 5);
BENCHMARK(BM_PreValue<Rational>)->DenseRange(1, 4);
BENCHMARK(BM_SolveDrbsde<double>)->DenseRange(1, 5)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SolveDrbsde<Rational>)->DenseRange(1, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_PicardCoupled<double>)->DenseRange(1, 4)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GalchoukLenglart)->DenseRange(1, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_SnellBruteforce)->DenseRange(1, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
