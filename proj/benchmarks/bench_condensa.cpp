#include <benchmark/benchmark.h>

#include "condensa/assembly.hpp"
#include "condensa/condense.hpp"
#include "condensa/krylov.hpp"
#include "condensa/precond.hpp"

using namespace condensa;

namespace {

struct Setup {
  Mesh mesh;
  LayoutPtr layout;
  BlockSystem system;
};

Setup make(Problem p, int n) {
  Mesh m = unit_box_mesh(2, n);
  auto L = std::make_shared<const BlockLayout>(make_layout(m, p, 2));
  const ProblemParams params;
  BlockSystem s;
  if (p == Problem::darcy) {
    const ManufacturedProblem mp = manufactured_rhs("darcy", 2, params);
    s = assemble_darcy(m, L, params, mp.f_darcy, mp.p_dirichlet);
  } else {
    const ManufacturedProblem mp = manufactured_rhs("stokes", 2, params);
    s = assemble_stokes(m, L, params, mp.f_stokes, mp.u_dirichlet);
  }
  return {std::move(m), L, std::move(s)};
}

void BM_AssembleDarcy(benchmark::State& state) {
  const Mesh m = unit_box_mesh(2, static_cast<int>(state.range(0)));
  auto L = std::make_shared<const BlockLayout>(make_layout(m, Problem::darcy, 2));
  const ManufacturedProblem mp = manufactured_rhs("darcy", 2, {});
  for (auto _ : state) benchmark::DoNotOptimize(assemble_darcy(m, L, {}, mp.f_darcy, mp.p_dirichlet));
  state.SetItemsProcessed(state.iterations() * m.num_cells());
}

void BM_AssembleStokes(benchmark::State& state) {
  const Mesh m = unit_box_mesh(2, static_cast<int>(state.range(0)));
  auto L = std::make_shared<const BlockLayout>(make_layout(m, Problem::stokes, 2));
  const ManufacturedProblem mp = manufactured_rhs("stokes", 2, {});
  for (auto _ : state) benchmark::DoNotOptimize(assemble_stokes(m, L, {}, mp.f_stokes, mp.u_dirichlet));
  state.SetItemsProcessed(state.iterations() * m.num_cells());
}

void BM_Condense(benchmark::State& state) {
  const Setup s = make(state.range(1) ? Problem::stokes : Problem::darcy, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(condense(s.system));
  state.SetItemsProcessed(state.iterations() * s.mesh.num_cells());
}

void BM_BuildReducedPreconditioner(benchmark::State& state) {
  const Setup s = make(state.range(1) ? Problem::stokes : Problem::darcy, static_cast<int>(state.range(0)));
  PreconditionerSpec spec;
  spec.problem = s.layout->problem;
  for (auto _ : state) benchmark::DoNotOptimize(build_reduced(spec, s.mesh, s.layout));
}

void BM_ReducedSolve(benchmark::State& state) {
  const Setup s = make(state.range(1) ? Problem::stokes : Problem::darcy, static_cast<int>(state.range(0)));
  const CondensedSystem cs = condense(s.system);
  PreconditionerSpec spec;
  spec.problem = s.layout->problem;
  const PrecondOperator P = build_reduced(spec, s.mesh, s.layout);
  KrylovOptions o;
  int iters = 0;
  for (auto _ : state) {
    KrylovResult r;
    if (spec.problem == Problem::darcy) {
      r = cg(as_operator(cs.S), P.inverse(), cs.rhs, o);
    } else {
      o.tol = 1e-8;
      o.deflate = {stokes_trace_kernel(s.mesh, *s.layout)};
      r = minres(as_operator(cs.S), P.inverse(), cs.rhs, o);
    }
    iters = r.report.iterations;
    benchmark::DoNotOptimize(r.x.data());
  }
  state.counters["iters"] = iters;
}

void BM_BackSubstitute(benchmark::State& state) {
  const Setup s = make(Problem::darcy, static_cast<int>(state.range(0)));
  const CondensedSystem cs = condense(s.system);
  const Vector t = factor_spd(cs.S).solve(cs.rhs);
  for (auto _ : state) benchmark::DoNotOptimize(back_substitute(cs, t));
}

}  // namespace

BENCHMARK(BM_AssembleDarcy)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AssembleStokes)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Condense)->ArgsProduct({{8, 16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildReducedPreconditioner)->ArgsProduct({{8, 16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReducedSolve)->ArgsProduct({{8, 16, 32}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackSubstitute)->Arg(8)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
