#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blochfem/solver.hpp"
#include "blochfem/spectral.hpp"

using namespace blochfem;

TEST_CASE("alpha grid: range, spacing, interval cover") {
  const AlphaGrid g{7, 2.0 * pi};
  CHECK(g.Lambda_star() == doctest::Approx(1.0));
  for (int j = 1; j <= g.N; ++j) {
    CHECK(g.alpha(j) > 0.0);
    CHECK(g.alpha(j) <= g.Lambda_star() + 1e-15);
  }
  CHECK(g.alpha(g.N) == doctest::Approx(g.Lambda_star()).epsilon(1e-15));
  for (int j = 2; j <= g.N; ++j)
    CHECK(g.alpha(j) - g.alpha(j - 1) == doctest::Approx(g.spacing()).epsilon(1e-13));
  // intervals tile (0, Lambda*]
  CHECK(g.interval(1).first == doctest::Approx(0.0).epsilon(1e-15));
  for (int j = 2; j <= g.N; ++j)
    CHECK(g.interval(j).first == doctest::Approx(g.interval(j - 1).second).epsilon(1e-13));
  CHECK(g.interval(g.N).second == doctest::Approx(g.Lambda_star()));
}

TEST_CASE("dtn symbol: propagating, cutoff, evanescent branches") {
  Diagnostics diag;
  const cdouble prop = dtn_symbol(1.0, 0.5, 0, 1.0, diag);
  CHECK(prop.real() == 0.0);
  CHECK(prop.imag() == doctest::Approx(0.8660254037844386).epsilon(1e-12));  // sqrt(3)/2

  const cdouble cut = dtn_symbol(1.0, 1.0, 0, 1.0, diag);
  CHECK(cut == cdouble(0.0, 0.0));
  CHECK(!diag.warnings().empty());  // Wood anomaly reported

  const cdouble evan = dtn_symbol(1.0, 0.5, 2, 1.0, diag);
  CHECK(evan.imag() == 0.0);
  CHECK(evan.real() == doctest::Approx(-1.118033988749895).epsilon(1e-12));  // -sqrt(1.25)

  CHECK_THROWS_AS(dtn_symbol(0.0, 0.5, 0, 1.0), std::invalid_argument);
}

TEST_CASE("dtn symbol is continuous across the cutoff") {
  for (double eps : {1e-4, 1e-6}) {
    CHECK(std::abs(dtn_symbol(1.0, 1.0 - eps, 0, 1.0)) < 2.0 * std::sqrt(2.0 * eps));
    CHECK(std::abs(dtn_symbol(1.0, 1.0 + eps, 0, 1.0)) < 2.0 * std::sqrt(2.0 * eps));
  }
}

TEST_CASE("dtn table applies sigma_q to trace modes exactly") {
  Diagnostics diag;
  const auto table = build_dtn_table(1.0, 1.0, 3, 1.0, diag);
  std::vector<cdouble> coeffs(7, cdouble(0.0));
  coeffs[3 + 0] = 2.0;  // cutoff mode q=0 at alpha=k
  auto out = table.apply(coeffs);
  CHECK(out[3] == cdouble(0.0));
  coeffs.assign(7, cdouble(0.0));
  coeffs[3 + 1] = 1.0;  // q=1: |1-1|=0 -> sigma = i k
  out = table.apply(coeffs);
  CHECK(out[4] == doctest::Approx(0.0).epsilon(1e-15));  // real part
  CHECK(out[4].imag() == doctest::Approx(1.0).epsilon(1e-14));
  coeffs.assign(7, cdouble(0.0));
  coeffs[3 - 2] = 1.0;  // q=-2: |-2-1| = 3 evanescent
  out = table.apply(coeffs);
  CHECK(out[1].real() == doctest::Approx(-std::sqrt(8.0)).epsilon(1e-14));
  CHECK_THROWS_AS(table.apply(std::vector<cdouble>(5)), std::invalid_argument);
}

TEST_CASE("bloch transform samples: single-cell support, constants, zero") {
  const double Lambda = 2.0 * pi;
  auto f = [Lambda](double x1, double x2) -> cdouble {
    if (std::fabs(x1) > 0.45 * Lambda) return 0.0;
    return cdouble(std::cos(x1), x2);
  };
  const double C_Lambda = std::sqrt(Lambda / (2.0 * pi));
  CHECK(C_Lambda == doctest::Approx(1.0));  // Lambda = 2 pi
  for (double alpha : {0.1, 0.6, 1.0}) {
    const cdouble v = bloch_transform_samples(f, alpha, {0.3, 2.0}, 10, Lambda);
    CHECK(std::abs(v - C_Lambda * f(0.3, 2.0)) <= 1e-14);
  }
  auto zero = [](double, double) -> cdouble { return 0.0; };
  CHECK(bloch_transform_samples(zero, 0.3, {0.0, 0.0}, 5, Lambda) == cdouble(0.0));
}

TEST_CASE("bloch transform samples: truncation warning carries the tail bound") {
  auto slow = [](double x1, double) -> cdouble {
    return 1.0 / std::pow(1.0 + std::fabs(x1), 1.5);
  };
  Diagnostics diag;
  double tail = 0.0;
  bloch_transform_samples(slow, 0.3, {0.0, 1.0}, 50, 2.0 * pi, &tail, 1e-12, diag);
  CHECK(tail > 0.0);
  CHECK(!diag.warnings().empty());
}

TEST_CASE("discrete Bloch round trip and Parseval on random compact fields") {
  for (int N : {3, 8}) {
    const double Lambda = 2.0 * pi;
    const AlphaGrid grid{N, Lambda};
    const auto mesh = build_cell_mesh(Lambda, 1.0, 3.0, 0.5);
    const double C_Lambda = std::sqrt(Lambda / (2.0 * pi));

    // random nodal field per copy m in {-floor(N/2), ..., ceil(N/2)-1}
    const int m_lo = -(N / 2), m_hi = (N + 1) / 2 - 1;
    std::mt19937 rng(41 + N);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int np = periodic_node_count(mesh);
    std::vector<std::vector<cdouble>> f(m_hi - m_lo + 1, std::vector<cdouble>(np));
    for (auto& copy : f)
      for (auto& v : copy) v = cdouble(u(rng), u(rng));

    // periodic node coordinates (columns 1..nx)
    std::vector<Point> coords(np);
    for (int r = 0; r <= mesh.ny; ++r)
      for (int c = 1; c <= mesh.nx; ++c)
        coords[r * mesh.nx + (c - 1)] = mesh.nodes[mesh.node_id(c, r)];

    // forward transform sampled on the alpha grid
    BlochField w;
    w.mesh = &mesh;
    w.grid = grid;
    w.blocks.assign(N, Vec::Zero(np));
    for (int j = 1; j <= N; ++j) {
      for (int p = 0; p < np; ++p) {
        cdouble sum = 0.0;
        for (int m = m_lo; m <= m_hi; ++m)
          sum += f[m - m_lo][p] * std::polar(1.0, -grid.alpha(j) * Lambda * m);
        // stored blocks are the periodic parts w~ = e^{-i alpha x1} (J f)
        w.blocks[j - 1][p] = C_Lambda * sum * std::polar(1.0, -grid.alpha(j) * coords[p].x1);
      }
    }

    // inverse reproduces the field at every copy and node
    double worst = 0.0;
    for (int m = m_lo; m <= m_hi; ++m)
      for (int p = 0; p < np; ++p)
        worst = std::max(worst,
                         std::abs(inverse_bloch(w, grid, m, coords[p]) - f[m - m_lo][p]));
    CHECK(worst <= 1e-12);

    // Parseval with the alpha-grid weight 2 pi / (N Lambda)
    double lhs = 0.0, rhs = 0.0;
    for (int j = 0; j < N; ++j) lhs += (2.0 * pi / (N * Lambda)) * w.blocks[j].squaredNorm();
    for (const auto& copy : f)
      for (const auto& v : copy) rhs += std::norm(v);
    CHECK(std::fabs(lhs - rhs) <= 1e-12 * rhs);

    // spec'd single-block and constant-block reconstructions
    BlochField single = w;
    for (int j = 0; j < N; ++j) single.blocks[j].setZero();
    std::vector<cdouble> vfix(np);
    for (auto& v : vfix) v = cdouble(u(rng), u(rng));
    const int j0 = std::min(2, N);
    for (int p = 0; p < np; ++p) single.blocks[j0 - 1][p] = vfix[p];
    for (int m = m_lo; m <= m_hi; ++m) {
      const Point x = coords[7 % np];
      const cdouble expect = (1.0 / N) * std::sqrt(2.0 * pi / Lambda) *
                             std::polar(1.0, grid.alpha(j0) * (x.x1 + Lambda * m)) *
                             single.eval_block(j0, x);
      CHECK(std::abs(inverse_bloch(single, grid, m, x) - expect) <= 1e-14);
    }

    // all quasi-periodic blocks equal to v: delta comb at copies m = 0 mod N
    BlochField comb = w;
    for (int j = 1; j <= N; ++j)
      for (int p = 0; p < np; ++p)
        comb.blocks[j - 1][p] = vfix[p] * std::polar(1.0, -grid.alpha(j) * coords[p].x1);
    for (int m = -N; m <= N; ++m) {
      for (int p = 0; p < np; p += 3) {
        const cdouble got = inverse_bloch(comb, grid, m, coords[p]);
        const cdouble expect =
            (m % N == 0) ? std::sqrt(2.0 * pi / Lambda) * vfix[p] : cdouble(0.0);
        CHECK(std::abs(got - expect) <= 1e-12);
      }
    }

    // zero field
    BlochField zero = w;
    for (auto& b : zero.blocks) b.setZero();
    CHECK(inverse_bloch(zero, grid, 0, coords[0]) == cdouble(0.0));

    // block-count mismatch
    BlochField bad = w;
    bad.blocks.pop_back();
    CHECK_THROWS_AS(inverse_bloch(bad, grid, 0, coords[0]), std::invalid_argument);
  }
}
