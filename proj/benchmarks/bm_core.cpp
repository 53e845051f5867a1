#include <benchmark/benchmark.h>

#include "nssaddle/estimator.hpp"
#include "nssaddle/solvers_eg.hpp"
#include "nssaddle/solvers_fw.hpp"

namespace {

using namespace nssaddle;

QuadraticSaddleInstance bench_instance(int d, double sigma) {
  return QuadraticSaddleInstance(Vec::Constant(d, 0.3), Vec::Constant(d, -0.2), 1.0, 1.0,
                                 0.3 * Mat::Identity(d, d), sigma, FeasibleSet::unconstrained(d),
                                 FeasibleSet::unconstrained(d));
}

void BM_NormalDraws(benchmark::State& state) {
  Rng rng(1);
  std::uint64_t c = 0;
  double acc = 0;
  for (auto _ : state) acc += rng.normal(c++);
  benchmark::DoNotOptimize(acc);
}
BENCHMARK(BM_NormalDraws);

void BM_ZogSample(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  auto inst = bench_instance(d, 0.5);
  const PointPair z(Vec::Constant(d, 0.7), Vec::Constant(d, -0.4));
  const int m = 4096;
  std::uint64_t trial = 0;
  for (auto _ : state) {
    GradEstimate g = zog(inst, z, m, m, 1e-3, 1e-3, Rng(9).fork(trial++));
    benchmark::DoNotOptimize(g.g_x.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * m);
}
BENCHMARK(BM_ZogSample)->Arg(1)->Arg(2)->Arg(4);

void BM_EgRound(benchmark::State& state) {
  SequenceSpec s;
  s.horizon = 8;
  s.d_x = s.d_y = 2;
  s.mu_x = s.mu_y = 1.0;
  s.coupling = 0.4 * Mat::Identity(2, 2);
  s.sigma = 0.5;
  s.set_x = FeasibleSet::unconstrained(2);
  s.set_y = FeasibleSet::unconstrained(2);
  ProblemSequence seq(s);
  StepParams p;
  p.eta = 0.2;
  p.m_x = p.m_y = 64;
  EGSchedule sched =
      EGSchedule::custom(Mode::kDynamic, Order::kFirst, [p](int, const ProblemSequence&) { return p; });
  const PointPair z(Vec::Constant(2, 1.0), Vec::Constant(2, -1.0));
  std::uint64_t trial = 0;
  for (auto _ : state) {
    EgStepResult r = eg_step(seq, 3, z, sched, Rng(11).fork(trial++));
    benchmark::DoNotOptimize(r.z_next.x.data());
  }
}
BENCHMARK(BM_EgRound);

void BM_ProxSolve(benchmark::State& state) {
  auto inst = bench_instance(4, 0.0);
  const PointPair z(Vec::Constant(4, 1.2), Vec::Constant(4, -0.8));
  for (auto _ : state) {
    PointPair r = prox_step_quadratic(inst, z, 0.3);
    benchmark::DoNotOptimize(r.x.data());
  }
}
BENCHMARK(BM_ProxSolve);

}  // namespace

BENCHMARK_MAIN();
