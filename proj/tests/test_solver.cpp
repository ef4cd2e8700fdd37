#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/SparseLU>

#include <cmath>
#include <random>

#include "blochfem/greens.hpp"
#include "blochfem/solver.hpp"

using namespace blochfem;

namespace {

struct Setup {
  PeriodicCellMesh mesh;
  AlphaGrid grid;
  MediumModel medium;
  std::vector<DtnSymbolTable> tables;
  double k;
};

Setup make_setup(int N, double h, double k, bool zero_n1 = false) {
  Setup s;
  s.k = k;
  s.mesh = build_cell_mesh(2.0 * pi, 1.0, 3.0, h);
  s.grid = AlphaGrid{N, s.mesh.Lambda};
  LayerIndex l1 = make_layer1_group1();
  if (zero_n1) l1.eval = [](double, double) { return 0.0; };
  s.medium = build_medium(l1, make_layer2_group1(), k, N, s.mesh);
  for (int j = 1; j <= N; ++j)
    s.tables.push_back(build_dtn_table(k, s.grid.alpha(j), s.mesh.nx / 2, s.grid.Lambda_star()));
  return s;
}

BlockSystem manufactured_system(Setup& s, AssemblyCounters& cnt, SourceRoute route = SourceRoute::spectral) {
  const auto src = make_volume_source({0.5, 0.4}, s.k, s.mesh.h0);
  BlochSource source(src, s.medium.layer1, s.medium.layer2, s.grid, route, 200);
  Diagnostics diag;
  BlockSystemInputs inputs;
  inputs.rhs = assemble_rhs_volume(s.mesh, s.grid, source.volume_table(quadrature_points(s.mesh), diag));
  std::vector<Point> bottom;
  for (int c = 1; c <= s.mesh.nx; ++c) bottom.push_back(s.mesh.nodes[s.mesh.node_id(c, 0)]);
  inputs.dirichlet = source.dirichlet_data(bottom, diag);
  return build_block_system(s.mesh, s.medium, s.grid, s.k, s.tables, std::move(inputs), cnt);
}

}  // namespace

TEST_CASE("zero right-hand side gives the zero field") {
  Setup s = make_setup(3, 0.5, 1.0);
  AssemblyCounters cnt;
  BlockSystemInputs inputs;
  const BlockSystem sys = build_block_system(s.mesh, s.medium, s.grid, s.k, s.tables,
                                             std::move(inputs), cnt);
  auto [w, rep] = solve(sys);
  CHECK(rep.iterations == 0);
  CHECK(rep.residual == 0.0);
  for (const Vec& b : w.blocks) CHECK(b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solution is linear in the data") {
  Setup s = make_setup(2, 0.5, 1.0);
  AssemblyCounters cnt;
  BlockSystem sys = manufactured_system(s, cnt);
  auto [w1, r1] = solve(sys);
  BlockSystem sys2 = sys;
  for (auto& g : sys2.rhs) g *= 2.0;
  for (auto& d : sys2.bottom_data) d *= 2.0;
  auto [w2, r2] = solve(sys2);
  for (int j = 0; j < s.grid.N; ++j)
    CHECK((w2.blocks[j] - 2.0 * w1.blocks[j]).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("decoupling: zero layer-1 index reduces to independent single-alpha solves") {
  Setup s = make_setup(6, 0.4, 1.0, /*zero_n1=*/true);
  AssemblyCounters cnt;
  BlockSystem sys = manufactured_system(s, cnt);
  auto [w, rep] = solve(sys);
  // standalone per-block solves
  for (int j = 1; j <= s.grid.N; ++j) {
    Eigen::SparseLU<SpMat> lu(sys.A[j - 1]);
    REQUIRE(lu.info() == Eigen::Success);
    const Vec wj = lu.solve(sys.rhs[j - 1]);
    const Vec got = w.blocks[j - 1].segment(s.mesh.nx, sys.M);
    CHECK((wj - got).cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + wj.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("direct and iterative methods agree") {
  Setup s = make_setup(2, 0.8, 1.0);
  AssemblyCounters cnt;
  BlockSystem sys = manufactured_system(s, cnt);
  SolverConfig direct;
  direct.method = SolverConfig::Method::direct;
  SolverConfig gm;
  gm.method = SolverConfig::Method::gmres;
  gm.tol_iter = 1e-12;
  auto [wd, rd] = solve(sys, direct);
  auto [wi, ri] = solve(sys, gm);
  CHECK(rd.method == "direct");
  CHECK(ri.method == "iterative");
  CHECK(ri.iterations > 0);
  double scale = 0.0;
  for (const Vec& b : wd.blocks) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  for (int j = 0; j < s.grid.N; ++j)
    CHECK((wd.blocks[j] - wi.blocks[j]).cwiseAbs().maxCoeff() <= 1e-8 * scale);
  CHECK(rd.residual <= 1e-10);
  CHECK(ri.residual <= 1e-12);
}

TEST_CASE("iterative non-convergence raises a solver failure with the trace") {
  Setup s = make_setup(4, 0.5, 6.0);
  AssemblyCounters cnt;
  BlockSystem sys = manufactured_system(s, cnt);
  SolverConfig gm;
  gm.method = SolverConfig::Method::gmres;
  gm.tol_iter = 1e-14;
  gm.max_iter = 1;
  CHECK_THROWS_AS(solve(sys, gm), SolverError);
}

TEST_CASE("homogeneous medium: reconstruction converges to the Green trace") {
  // with n = 0 the exact solution of the manufactured problem is G itself;
  // the remaining errors are the FEM h-error and the alpha-aliasing N-error
  double prev = 1e9;
  for (const auto [N, h] : {std::pair{8, 0.4}, std::pair{16, 0.2}}) {
    Setup s = make_setup(N, h, 1.0, /*zero_n1=*/true);
    LayerIndex z2 = make_layer2_group1();
    z2.eval = [](double, double) { return 0.0; };
    s.medium = build_medium(s.medium.layer1, z2, s.k, N, s.mesh);
    AssemblyCounters cnt;
    BlockSystem sys = manufactured_system(s, cnt);
    auto [w, rep] = solve(sys);
    std::vector<double> x1s;
    for (int n : s.mesh.top_nodes) x1s.push_back(s.mesh.nodes[n].x1);
    const auto trace = reconstruct_on_trace(w, x1s);
    const auto src = make_volume_source({0.5, 0.4}, s.k, s.mesh.h0);
    std::vector<cdouble> exact;
    for (double x1 : x1s) exact.push_back(green_half_space({x1, s.mesh.H}, src));
    const std::vector<double> wts(x1s.size(), s.mesh.dx());
    const double err = relative_trace_error(trace, exact, wts);
    CHECK(err < 0.2);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.06);
}

TEST_CASE("relative trace error metric") {
  const std::vector<cdouble> ref = {cdouble(1.0, 0.5), cdouble(-0.3, 0.2), cdouble(0.0, 1.0)};
  const std::vector<double> w = {0.5, 1.0, 0.5};
  CHECK(relative_trace_error(ref, ref, w) == 0.0);
  std::vector<cdouble> twice = ref;
  for (auto& v : twice) v *= 2.0;
  CHECK(relative_trace_error(twice, ref, w) == doctest::Approx(1.0).epsilon(1e-14));
  // single-sample bump of size eps: err = eps sqrt(w_i / sum w |ref|^2)
  std::vector<cdouble> bump = ref;
  const double eps = 1e-3;
  bump[1] += eps;
  double den = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) den += w[i] * std::norm(ref[i]);
  CHECK(relative_trace_error(bump, ref, w) ==
        doctest::Approx(eps * std::sqrt(w[1] / den)).epsilon(1e-12));
  CHECK_THROWS_AS(relative_trace_error(ref, {cdouble(0.0), cdouble(0.0), cdouble(0.0)}, w),
                  std::invalid_argument);
  CHECK_THROWS_AS(relative_trace_error(ref, ref, {1.0}), std::invalid_argument);
}
