#include <memory>

#include <benchmark/benchmark.h>

#include "specfw/baselines.hpp"
#include "specfw/sensing.hpp"

namespace {

using namespace specfw;

std::shared_ptr<const SensingProblem> problem(Index n, Index r) {
  return std::make_shared<const SensingProblem>(generate_problem(n, r, 15 * n * r, 0.5, true, 3));
}

SymMat random_state(Index n, Index rank, Rng& rng) {
  SymMat x(n);
  for (Index i = 0; i < rank; ++i) x.add_outer(random_unit_vector(n, rng), 1.0 / rank);
  return x;
}

void BM_LeadingEigenpair(benchmark::State& st) {
  const Index n = st.range(0);
  Rng rng = make_rng(1, 0);
  Mat g = Mat::Random(n, n);
  const SymMat a(Mat(g + g.transpose()));
  const LinOp op(n, [&](const Vec& x, Vec& y) { y = a * x; });
  for (auto _ : st) benchmark::DoNotOptimize(leading_eigenpair(op, rng, {1e-13, 0}));
}
BENCHMARK(BM_LeadingEigenpair)->Arg(20)->Arg(60)->Arg(100);

void BM_PinvRankOneUpdate(benchmark::State& st) {
  const Index n = st.range(0);
  Rng rng = make_rng(2, 0);
  const SymMat x = random_state(n, n / 2, rng);
  const SymMat xp = pinv_via_eigen(x);
  const Vec v = random_unit_vector(n, rng);
  for (auto _ : st) benchmark::DoNotOptimize(pinv_rank_one_update(xp, x, v, 0.1, {}));
}
BENCHMARK(BM_PinvRankOneUpdate)->Arg(20)->Arg(60)->Arg(100);

void BM_SensingEvaluate(benchmark::State& st) {
  const auto p = problem(st.range(0), st.range(1));
  const SensingOracle oracle(p);
  Rng rng = make_rng(3, 0);
  const SymMat x = random_state(p->n, p->r_star, rng);
  for (auto _ : st) benchmark::DoNotOptimize(oracle.evaluate(x));
}
BENCHMARK(BM_SensingEvaluate)->Args({60, 1})->Args({60, 5})->Args({60, 10});

void BM_SensingLowRankStep(benchmark::State& st) {
  const auto p = problem(st.range(0), st.range(1));
  const SensingOracle oracle(p);
  Rng rng = make_rng(4, 0);
  const SymMat x = random_state(p->n, p->r_star, rng);
  const Evaluation e = oracle.evaluate(x);
  const LowRankDirection dir{-1.0, {{1.0, random_unit_vector(p->n, rng)}}};
  for (auto _ : st) benchmark::DoNotOptimize(oracle.directional(e, dir));
}
BENCHMARK(BM_SensingLowRankStep)->Args({60, 5});

void BM_Alg1Iteration(benchmark::State& st) {
  const auto p = problem(st.range(0), st.range(1));
  const SensingOracle oracle(p);
  SolverConfig cfg;
  cfg.beta = oracle.beta();
  cfg.max_iters = 30;
  const SolveResult warm = solve(initial_vertex(oracle), oracle, cfg);
  const SolverPoint at = make_point(init_state(warm.x), oracle, cfg, 30);
  for (auto _ : st) benchmark::DoNotOptimize(iterate_once(at, oracle, cfg, 31));
}
BENCHMARK(BM_Alg1Iteration)->Args({60, 5})->Unit(benchmark::kMillisecond);

void BM_BlockFwStep(benchmark::State& st) {
  const auto p = problem(st.range(0), st.range(1));
  const SensingOracle oracle(p);
  Rng rng = make_rng(5, 0);
  const SymMat x = random_state(p->n, p->r_star, rng);
  const SymMat g = oracle.gradient(x);
  for (auto _ : st)
    benchmark::DoNotOptimize(block_fw_step(x, g, static_cast<int>(p->r_star), 0.3, oracle.beta()));
}
BENCHMARK(BM_BlockFwStep)->Args({60, 5})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
