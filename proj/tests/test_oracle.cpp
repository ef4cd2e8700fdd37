#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blochfem/runner.hpp"

using namespace blochfem;

TEST_CASE("zero index and zero source give the zero field") {
  RunConfig cfg;
  cfg.N = 2;
  cfg.h = 0.8;
  cfg.n1_scale = 0.0;
  cfg.n2_scale = 0.0;
  Diagnostics diag;
  RunOutput out = solve_pipeline(cfg, diag);
  const SupercellMesh sm = tile_mesh(out.mesh, cfg.N);
  // incident-free, data-free problem: assemble with a zero-amplitude source
  LayerIndex z1 = make_layer1_group1(0.0);
  LayerIndex z2 = make_layer2_group1(0.0);
  z1.eval = [](double, double) { return 0.0; };
  z2.eval = [](double, double) { return 0.0; };
  BlochSource source(make_volume_source({0.5, 0.4}, cfg.k, cfg.h0), z1, z2, out.grid,
                     SourceRoute::lattice, 10);
  const auto fs = solve_supercell(sm, out.medium, cfg.k, out.grid, source, out.mesh.nx / 2, {});
  for (const cdouble& v : fs.nodal) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("N=1 finite section equals the single-cell periodic solve") {
  OracleCheck chk = run_oracle_check(1, 0.5, 1, RunConfig{});
  CHECK(chk.rel_diff <= 1e-10);
  CHECK(chk.counts_match);
}

TEST_CASE("N=2, zero index: both paths reduce to the same homogeneous solve") {
  RunConfig base;
  base.n1_scale = 0.0;
  base.n2_scale = 0.0;
  OracleCheck chk = run_oracle_check(2, 0.8, 1, base);
  CHECK(chk.rel_diff <= 1e-10);
  CHECK(chk.counts_match);
}

TEST_CASE("DFT equivalence: N=4 windowed medium, manufactured source") {
  OracleCheck chk = run_oracle_check(4, 0.8, 1, RunConfig{});
  CHECK(chk.rel_diff <= 1e-8);
  CHECK(chk.counts_match);
  CHECK(chk.bloch_ops == (2 + 4) * chk.quad_points);
  CHECK(chk.supercell_ops == 3 * 4 * chk.quad_points);
}

TEST_CASE("DFT equivalence holds for the second index group (lattice source route)") {
  OracleCheck chk = run_oracle_check(3, 0.8, 3, RunConfig{});
  CHECK(chk.rel_diff <= 1e-8);
  CHECK(chk.counts_match);
}

TEST_CASE("supercell/grid N mismatch is rejected") {
  RunConfig cfg;
  cfg.N = 2;
  cfg.h = 0.8;
  Diagnostics diag;
  RunOutput out = solve_pipeline(cfg, diag);
  const SupercellMesh sm = tile_mesh(out.mesh, 3);
  BlochSource source(make_volume_source({0.5, 0.4}, cfg.k, cfg.h0), out.medium.layer1,
                     out.medium.layer2, out.grid, SourceRoute::spectral, 200);
  CHECK_THROWS_AS(solve_supercell(sm, out.medium, cfg.k, out.grid, source, 2, {}),
                  std::invalid_argument);
}
