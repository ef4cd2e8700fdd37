// Timing comparison of the OpenMP kernels against their serial references.
// Run with OMP_NUM_THREADS set to compare thread counts.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "blochfem/runner.hpp"

using namespace blochfem;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) fn();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
  int N = 20;
  double h = 0.16;
  if (argc > 1) N = std::atoi(argv[1]);
  if (argc > 2) h = std::atof(argv[2]);
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (OpenMP disabled)\n");
#endif
  std::printf("problem: N=%d h=%g (Example 1 configuration)\n\n", N, h);

  RunConfig cfg = example_config(1, RunConfig{});
  cfg.N = N;
  cfg.h = h;
  Diagnostics diag;

  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out = solve_pipeline(cfg, diag);
  const double full = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("full pipeline: %.3f s (solve %.3f s, %s, %d iterations)\n\n", full,
              out.report.wall_time, out.report.method.c_str(), out.report.iterations);

  // rebuild the system once for the kernel benchmarks
  auto [l1, l2] = std::pair{make_layer1_group1(), make_layer2_group1()};
  AssemblyCounters counters;
  std::vector<DtnSymbolTable> tables;
  for (int j = 1; j <= N; ++j)
    tables.push_back(build_dtn_table(cfg.k, out.grid.alpha(j), out.mesh.nx / 2,
                                     out.grid.Lambda_star()));
  BlockSystemInputs inputs;
  BlockSystem sys = build_block_system(out.mesh, out.medium, out.grid, cfg.k, tables,
                                       std::move(inputs), counters);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec> x(N), y;
  for (int j = 0; j < N; ++j) {
    x[j] = Vec(sys.M);
    for (int i = 0; i < sys.M; ++i) x[j][i] = cdouble(u(rng), u(rng));
  }

  const double t_par = time_of([&] { block_matvec(sys, x, y); }, 20);
  const double t_ser = time_of([&] { serial_ref::block_matvec(sys, x, y); }, 20);
  std::printf("%-28s %10.4f ms\n", "block matvec (openmp)", 1e3 * t_par);
  std::printf("%-28s %10.4f ms  speedup %.2fx\n", "block matvec (serial ref)", 1e3 * t_ser,
              t_ser / t_par);

  const double t_asm = time_of(
      [&] {
        AssemblyCounters c;
        BlockSystemInputs in;
        build_block_system(out.mesh, out.medium, out.grid, cfg.k, tables, std::move(in), c);
      },
      3);
  std::printf("%-28s %10.1f ms\n", "block system assembly", 1e3 * t_asm);

  const HalfSpaceSource src = make_volume_source({0.5, 0.4}, cfg.k, cfg.h0);
  BlochSource source(src, l1, l2, out.grid, SourceRoute::spectral, cfg.Jmax);
  const auto qpts = quadrature_points(out.mesh);
  const double t_src = time_of([&] { source.volume_table(qpts, Diagnostics::ignore()); }, 3);
  std::printf("%-28s %10.1f ms\n", "spectral source table", 1e3 * t_src);

  BlochSource latsrc(src, l1, l2, out.grid, SourceRoute::lattice, cfg.Jmax);
  const double t_lat = time_of([&] { latsrc.volume_table(qpts, Diagnostics::ignore()); }, 1);
  std::printf("%-28s %10.1f ms  (Jmax=%d)\n", "lattice source table", 1e3 * t_lat, cfg.Jmax);
  return 0;
}
