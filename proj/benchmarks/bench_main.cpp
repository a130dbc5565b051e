#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "linkvar/solver.hpp"
#include "linkvar/toylink.hpp"

using namespace linkvar;

namespace {

const testing::Setup& setup(int n) {
  static std::map<int, std::unique_ptr<testing::Setup>> cache;
  auto& s = cache[n];
  if (!s) s = testing::make_setup(testing::reference_spec(), n, n);
  return *s;
}

void BM_Energy(benchmark::State& st) {
  const auto& s = setup(static_cast<int>(st.range(0)));
  std::mt19937_64 rng(1);
  const Vector u = testing::smooth_field(s.g, rng);
  for (auto _ : st) benchmark::DoNotOptimize(J(*s.ctx, u));
}
BENCHMARK(BM_Energy)->Arg(48)->Arg(96);

void BM_Derivative(benchmark::State& st) {
  const auto& s = setup(static_cast<int>(st.range(0)));
  std::mt19937_64 rng(2);
  const Vector u = testing::smooth_field(s.g, rng);
  const Vector v = testing::smooth_field(s.g, rng);
  for (auto _ : st) benchmark::DoNotOptimize(dJ(*s.ctx, u, v));
}
BENCHMARK(BM_Derivative)->Arg(48)->Arg(96);

void BM_RieszGradient(benchmark::State& st) {
  const auto& s = setup(static_cast<int>(st.range(0)));
  std::mt19937_64 rng(3);
  const Vector u = testing::smooth_field(s.g, rng);
  for (auto _ : st) benchmark::DoNotOptimize(gradX(*s.ctx, u));
}
BENCHMARK(BM_RieszGradient)->Arg(48)->Arg(96);

void BM_Eigendecompose(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  const ProblemSpec spec = testing::reference_spec();
  const Grid g = build_grid(spec, n, n, 6.0, 4.0);
  const SymmetricOperator op = assemble_operator(spec, g);
  for (auto _ : st) benchmark::DoNotOptimize(eigendecompose(op, g));
}
BENCHMARK(BM_Eigendecompose)->Arg(24)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_InnerMaximize(benchmark::State& st) {
  const auto& s = setup(48);
  const Vector u = initial_direction(s.split);
  for (auto _ : st) benchmark::DoNotOptimize(inner_maximize(*s.ctx, u, 40.0));
}
BENCHMARK(BM_InnerMaximize)->Unit(benchmark::kMillisecond);

void BM_Toy(benchmark::State& st) {
  ToyProblem tp;
  tp.n_plus = static_cast<int>(st.range(0));
  tp.n_minus = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(run_toy(tp));
}
BENCHMARK(BM_Toy)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
