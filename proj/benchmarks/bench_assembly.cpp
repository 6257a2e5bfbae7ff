#include "dpq2p1/assembly.hpp"
#include "dpq2p1/cavitation.hpp"
#include "dpq2p1/mesh.hpp"
#include "dpq2p1/newton.hpp"

#include <benchmark/benchmark.h>

#include <algorithm>

using namespace dpq2p1;

namespace {

struct Setup {
  Mesh mesh;
  DofMap dofs;
  Discretization disc;
  DiscreteState state;

  explicit Setup(int row, int jobs = 1)
      : mesh(build_table_mesh(0.01, mesh_table(0.01).at(row))), dofs(build_dof_map(mesh)) {
    disc.mesh = &mesh;
    disc.dofs = &dofs;
    disc.jobs = jobs;
    const AnalyticCavitation a(0.01, 2.0);
    state.u = interpolate(mesh, [&](const Vec2& x) { return a.displacement(x); });
    state.p = project_pressure(mesh, [&](const Vec2& x) { return a.pressure(std::clamp(x.norm(), 0.01, 1.0)); });
  }
};

void BM_AssembleSystem(benchmark::State& st) {
  Setup s(static_cast<int>(st.range(0)), static_cast<int>(st.range(1)));
  const TractionSpec t = TractionSpec::radial(traction_for(0.01, 2.0));
  for (auto _ : st) benchmark::DoNotOptimize(assemble_system(s.disc, s.state, t));
  st.counters["dofs"] = s.dofs.total();
}
BENCHMARK(BM_AssembleSystem)->Args({0, 1})->Args({3, 1})->Args({3, 4})->Unit(benchmark::kMillisecond);

void BM_LinearSolve(benchmark::State& st) {
  Setup s(static_cast<int>(st.range(0)));
  const SaddleSystem sys = assemble_system(s.disc, s.state, TractionSpec::radial(traction_for(0.01, 2.0)));
  for (auto _ : st) benchmark::DoNotOptimize(linear_solve(sys));
  st.counters["dofs"] = sys.size();
}
BENCHMARK(BM_LinearSolve)->Arg(0)->Arg(1)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_CheckC1(benchmark::State& st) {
  Setup s(3);
  for (auto _ : st) benchmark::DoNotOptimize(check_c1(s.disc, s.state.u, 0.005, 1e-2, 1e2));
}
BENCHMARK(BM_CheckC1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
