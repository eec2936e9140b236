#include <benchmark/benchmark.h>

#include "sparseid/experiments.hpp"
#include "sparseid/operator.hpp"
#include "sparseid/pdhg.hpp"

using namespace sparseid;

namespace {

ProblemConfig case_i(double dx) {
  return make_case(CaseId::I, 2.0, 1.0, dx, dx, 0.05, 0.1);
}

void BM_AssembleOperator(benchmark::State& state) {
  const ProblemConfig cfg = case_i(1.0 / static_cast<double>(state.range(0)));
  for (auto _ : state) {
    const TimeStepOperator op =
        assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
    benchmark::DoNotOptimize(op.step_matrix().nonZeros());
  }
}
BENCHMARK(BM_AssembleOperator)->Arg(20)->Arg(50);

void BM_ForwardSolve(benchmark::State& state) {
  const ProblemConfig cfg = case_i(1.0 / static_cast<double>(state.range(0)));
  const TimeStepOperator op = assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
  const Field u0 = source_to_field(cfg.reference, op.grid());
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.forward_solve(u0).values.data());
  }
}
BENCHMARK(BM_ForwardSolve)->Arg(20)->Arg(50);

void BM_AdjointSolve(benchmark::State& state) {
  const ProblemConfig cfg = case_i(1.0 / static_cast<double>(state.range(0)));
  const TimeStepOperator op = assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
  const Field p = make_target(cfg, op);
  for (auto _ : state) {
    benchmark::DoNotOptimize(op.adjoint_solve(p).values.data());
  }
}
BENCHMARK(BM_AdjointSolve)->Arg(20)->Arg(50);

void BM_PdhgIteration(benchmark::State& state) {
  const ProblemConfig cfg = case_i(1.0 / static_cast<double>(state.range(0)));
  const TimeStepOperator op = assemble_operator(cfg.grid(), cfg.coeffs, cfg.dt, cfg.nsteps());
  const Field uT = make_target(cfg, op);
  PdhgParams params = validate_params(cfg.pdhg, estimate_opnorm(op).value);
  params.kmax = 1;
  params.tol = 1e-300;
  Field u(op.grid()), p(op.grid());
  for (auto _ : state) {
    const OptimizerResult step = run_pdhg(op, uT, params, u, p);
    u = step.u0_star;
    p = step.p_star;
    benchmark::DoNotOptimize(u.values.data());
  }
}
BENCHMARK(BM_PdhgIteration)->Arg(20)->Arg(50);

void BM_IdentifyPipeline(benchmark::State& state) {
  const ProblemConfig cfg = case_i(0.05);
  for (auto _ : state) {
    const Report rep = run_experiment(cfg);
    benchmark::DoNotOptimize(rep.iterations);
  }
}
BENCHMARK(BM_IdentifyPipeline)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
