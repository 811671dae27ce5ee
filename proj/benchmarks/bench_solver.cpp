#include <benchmark/benchmark.h>

#include <random>

#include "mab/experiments.hpp"

namespace {

using namespace mab;

const Mesh& level_mesh(int level) {
  static const DomainGeometry geom;
  static const Mesh meshes[] = {benchmark_mesh(geom, 0), benchmark_mesh(geom, 1),
                                benchmark_mesh(geom, 2), benchmark_mesh(geom, 3)};
  return meshes[level];
}

void BM_LocatePoint(benchmark::State& state) {
  const Mesh& mesh = level_mesh(static_cast<int>(state.range(0)));
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::vector<Vec2> pts;
  for (int i = 0; i < 1024; ++i) pts.push_back({u(rng), u(rng)});
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mesh.locate_point(pts[i++ & 1023]));
  }
}
BENCHMARK(BM_LocatePoint)->Arg(1)->Arg(3);

void BM_StencilTable(benchmark::State& state) {
  const Mesh& mesh = level_mesh(static_cast<int>(state.range(0)));
  const ControlGrid grid = build_control_grid(64, 33);
  const DirectionSet ds = build_direction_set(grid);
  StencilConfig cfg;
  cfg.m = 8.0;
  const StencilGeometry geo = build_stencil_geometry(mesh, ds, cfg.m * mesh.h_avg());
  for (auto _ : state) {
    StencilTable table(geo, cfg);
    benchmark::DoNotOptimize(table);
  }
}
BENCHMARK(BM_StencilTable)->Arg(1)->Arg(2);

void BM_PolicyImprove(benchmark::State& state) {
  const Mesh& mesh = level_mesh(static_cast<int>(state.range(0)));
  const ControlGrid grid = build_control_grid(64, 33);
  const ProblemSpec spec = quartic_problem();
  const FeFunction v = interpolate(mesh, spec.exact);
  StencilConfig cfg;
  cfg.m = 8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(policy_improve(mesh, v, grid, spec.f, spec.g, cfg));
  }
}
BENCHMARK(BM_PolicyImprove)->Arg(1)->Arg(2);

void BM_HowardSolve(benchmark::State& state) {
  const Mesh& mesh = level_mesh(static_cast<int>(state.range(0)));
  const ControlGrid grid = build_control_grid(64, 33);
  const ProblemSpec spec = quartic_problem();
  StencilConfig cfg;
  cfg.m = 4.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(howard_solve(mesh, grid, spec.f, spec.g, cfg));
  }
}
BENCHMARK(BM_HowardSolve)->Arg(0)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
