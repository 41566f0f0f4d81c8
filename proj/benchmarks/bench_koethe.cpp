// Microbenchmarks for the hot paths: weight evaluation, seminorm partial
// sums with tail certificates, domination checks, coefficient products,
// and the splitting-matrix construction.

#include <benchmark/benchmark.h>

#include <complex>
#include <random>

#include "koethe/approx.hpp"
#include "koethe/classifier.hpp"

using namespace koethe;

static void BM_WeightEval(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  std::uint64_t i = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(s.weight_at_rank(4, i));
    i = i % 10000 + 1;
  }
}
BENCHMARK(BM_WeightEval);

static void BM_SeminormL1(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  const SeqElement a = SeqElement::from_abs_expr(
      dsl::parse("2^(-i)"), IndexSet::naturals(), static_cast<std::uint64_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(seminorm_l1(a, s, 1));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SeminormL1)->Range(256, 16384)->Complexity(benchmark::oN);

static void BM_Membership(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  const SeqElement a =
      SeqElement::from_abs_expr(dsl::parse("2^(-i)"), IndexSet::naturals(), 2000);
  for (auto _ : state) benchmark::DoNotOptimize(membership(a, s, 2000));
}
BENCHMARK(BM_Membership);

static void BM_Dominates(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  const WeightFamily entire = make_builtin("entire", {});
  for (auto _ : state) benchmark::DoNotOptimize(dominates(s, entire, 2000, 8));
}
BENCHMARK(BM_Dominates);

static void BM_HadamardMul(benchmark::State& state) {
  const std::size_t N = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  CoeffSeq f(N), g(N);
  for (std::size_t k = 0; k < N; ++k) {
    f[k] = {U(rng), U(rng)};
    g[k] = {U(rng), U(rng)};
  }
  for (auto _ : state) benchmark::DoNotOptimize(hadamard_mul(f, g, N));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_HadamardMul)->Range(1024, 65536)->Complexity(benchmark::oN);

static void BM_ConstructMMatrices(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  const std::uint64_t cap = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(construct_M_matrices(s, cap, 16));
}
BENCHMARK(BM_ConstructMMatrices)->Arg(50)->Arg(100)->Arg(200);

static void BM_ProfileAndClassify(benchmark::State& state) {
  const WeightFamily s = make_builtin("s", {});
  for (auto _ : state) {
    ConditionProfile c = profile_conditions(s, 2000, 8);
    benchmark::DoNotOptimize(classify(c));
  }
}
BENCHMARK(BM_ProfileAndClassify);

BENCHMARK_MAIN();
