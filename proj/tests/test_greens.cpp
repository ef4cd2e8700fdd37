#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blochfem/greens.hpp"
#include "blochfem/special.hpp"

using namespace blochfem;

namespace {

// clean-room Bessel series for the cross-check at modest arguments
void series_j0y0(double z, double& j0, double& y0) {
  const double g = 0.57721566490153286;
  const double q = 0.25 * z * z;
  double term = 1.0, sj = 1.0, sy = 0.0, hm = 0.0;
  for (int m = 1; m <= 48; ++m) {
    term *= -q / (static_cast<double>(m) * m);
    hm += 1.0 / m;
    sj += term;
    sy += term * hm;
  }
  j0 = sj;
  y0 = (2.0 / pi) * ((std::log(0.5 * z) + g) * sj - sy);
}

cdouble green_oracle(Point x, Point y, double k) {
  const double r = std::hypot(x.x1 - y.x1, x.x2 - y.x2);
  const double rp = std::hypot(x.x1 - y.x1, x.x2 + y.x2);
  double j0, y0, j0p, y0p;
  series_j0y0(k * r, j0, y0);
  series_j0y0(k * rp, j0p, y0p);
  return 0.25 * cdouble(0.0, 1.0) * (cdouble(j0, y0) - cdouble(j0p, y0p));
}

}  // namespace

TEST_CASE("source kind preconditions") {
  CHECK_THROWS_AS(make_volume_source({0.0, 1.5}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_volume_source({0.0, -0.2}, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_incident_source({0.0, 2.0}, 1.0, 3.0), std::invalid_argument);
}

TEST_CASE("half-space Green: ground-line cancellation, reciprocity, value") {
  const auto src = make_volume_source({0.5, 0.4}, 1.0, 1.0);
  CHECK(green_half_space({1.7, 0.0}, src) == cdouble(0.0));
  CHECK(green_half_space({-4.2, 0.0}, src) == cdouble(0.0));

  // reciprocity via the image construction
  const auto src_b = make_volume_source({-1.0, 0.7}, 1.3, 1.0);
  const cdouble gab = green_half_space({2.0, 0.3}, src_b);
  const auto src_c = make_volume_source({2.0, 0.3}, 1.3, 1.0);
  const cdouble gba = green_half_space({-1.0, 0.7}, src_c);
  CHECK(std::abs(gab - gba) <= 1e-14);

  // independent evaluation with the clean-room series
  const cdouble got = green_half_space({pi, 3.0}, src);
  const cdouble ref = green_oracle({pi, 3.0}, {0.5, 0.4}, 1.0);
  CHECK(std::abs(got - ref) <= 1e-10);

  CHECK_THROWS_AS(green_half_space({0.5, 0.4}, src), std::domain_error);
}

TEST_CASE("G solves Helmholtz: 5-point residual converges at order 2") {
  const auto src = make_volume_source({0.5, 0.4}, 1.0, 1.0);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(1.2, 2.8);
  std::vector<double> spacings = {2e-2, 1e-2, 5e-3};
  std::vector<double> residuals(spacings.size(), 0.0);
  for (int pt = 0; pt < 12; ++pt) {
    const Point x{ux(rng), uy(rng)};
    for (std::size_t si = 0; si < spacings.size(); ++si) {
      const double s = spacings[si];
      const cdouble lap = (green_half_space({x.x1 + s, x.x2}, src) +
                           green_half_space({x.x1 - s, x.x2}, src) +
                           green_half_space({x.x1, x.x2 + s}, src) +
                           green_half_space({x.x1, x.x2 - s}, src) -
                           4.0 * green_half_space(x, src)) /
                          (s * s);
      residuals[si] += std::abs(lap + green_half_space(x, src));
    }
  }
  // slope of log(residual) vs log(s) ~ 2
  const double slope = (std::log(residuals[0]) - std::log(residuals[2])) /
                       (std::log(spacings[0]) - std::log(spacings[2]));
  CHECK(slope == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("dG/dx2 against central differences") {
  const auto src = make_volume_source({0.5, 0.4}, 1.3, 1.0);
  for (const Point x : {Point{0.9, 1.7}, Point{-2.0, 2.5}}) {
    const double s = 1e-6;
    const cdouble fd = (green_half_space({x.x1, x.x2 + s}, src) -
                        green_half_space({x.x1, x.x2 - s}, src)) /
                       (2.0 * s);
    CHECK(std::abs(green_half_space_dx2(x, src) - fd) <= 1e-8);
  }
}

TEST_CASE("manufactured volume source") {
  const auto src = make_volume_source({0.5, 0.4}, 1.0, 1.0);
  const auto l1 = make_layer1_group1();
  const auto l2 = make_layer2_group1();
  // outside both support bands the index vanishes
  CHECK(manufactured_volume_source(src, l1, l2, {0.3, 1.95}) == cdouble(0.0));
  CHECK(manufactured_volume_source(src, l1, l2, {0.3, 2.05}) == cdouble(0.0));
  LayerIndex z1 = l1, z2 = l2;
  z1.eval = [](double, double) { return 0.0; };
  z2.eval = [](double, double) { return 0.0; };
  CHECK(manufactured_volume_source(src, z1, z2, {0.3, 1.5}) == cdouble(0.0));
  // compose independently evaluated factors
  const Point x{0.5, 1.5};
  const cdouble expect = 1.0 * l1.eval(x.x1, x.x2) * green_oracle(x, {0.5, 0.4}, 1.0);
  CHECK(std::abs(manufactured_volume_source(src, l1, l2, x) - expect) <= 1e-10);
}

TEST_CASE("lattice Green agrees with the direct phased sum") {
  const auto src = make_volume_source({0.5, 0.4}, 1.0, 1.0);
  const double Lambda = 2.0 * pi;
  for (double chi : {0.37, -0.41}) {
    for (const Point x : {Point{0.9, 1.5}, Point{-1.2, 2.6}}) {
      cdouble direct = 0.0;
      const int J = 40000;
      for (int m = -J; m <= J; ++m)
        direct += green_half_space({x.x1 + Lambda * m, x.x2}, src) *
                  std::polar(1.0, -chi * Lambda * m);
      CHECK(std::abs(lattice_green(src, Lambda, chi, x) - direct) <= 5e-9);
    }
  }
}

TEST_CASE("outgoing-mode pairing: i beta(alpha + Lstar q) equals the stored symbol") {
  // radiation annihilation reduces to this identity: the mode e^{i(alpha+Lstar q)x1}
  // of a periodic block must see the symbol at that physical frequency.
  const double k = 1.0, Lstar = 1.0;
  for (double alpha : {0.25, 1.0}) {
    for (int q : {-3, -1, 0, 1, 4}) {
      const double xi = alpha + Lstar * q;
      const cdouble ibeta = cdouble(0.0, 1.0) * std::sqrt(cdouble(k * k - xi * xi, 0.0));
      const cdouble sym = dtn_symbol(k, alpha, -q, Lstar);
      CHECK(std::abs(ibeta - sym) <= 1e-14);
    }
  }
}

TEST_CASE("incident boundary data: spectral and lattice routes agree") {
  const auto src = make_incident_source({pi, 4.0}, 1.0, 3.0);
  const AlphaGrid grid{4, 2.0 * pi};
  const int L = 4;
  Diagnostics diag;
  const auto spec = incident_boundary_data(src, grid, L, 3.0, SourceRoute::spectral, 0, diag);
  const auto latt = incident_boundary_data(src, grid, L, 3.0, SourceRoute::lattice, 1200, diag);
  REQUIRE(spec.size() == latt.size());
  double scale = 0.0;
  for (const auto& row : spec)
    for (const cdouble& v : row) scale = std::max(scale, std::abs(v));
  for (int j = 0; j < grid.N; ++j)
    for (int q = 0; q <= 2 * L; ++q)
      CHECK(std::abs(spec[j][q] - latt[j][q]) <= 2e-5 * scale);
  // finite data for the paper configuration (smoke)
  for (const auto& row : spec)
    for (const cdouble& v : row) CHECK(std::isfinite(std::abs(v)));
}

TEST_CASE("volume tables: spectral and lattice routes agree within the tail bound") {
  const auto l1 = make_layer1_group1();
  const auto l2 = make_layer2_group1();
  const AlphaGrid grid{3, 2.0 * pi};
  const auto src = make_volume_source({0.5, 0.4}, 1.0, 1.0);
  std::vector<Point> pts = {{0.3, 1.5}, {-1.0, 1.4}, {2.0, 2.5}, {0.0, 1.7}};

  Diagnostics diag;
  BlochSource spectral(src, l1, l2, grid, SourceRoute::spectral, 0);
  BlochSource lattice(src, l1, l2, grid, SourceRoute::lattice, 3000);
  const auto ts = spectral.volume_table(pts, diag);
  const auto tl = lattice.volume_table(pts, diag);
  double scale = 0.0;
  for (const auto& row : ts)
    for (const cdouble& v : row) scale = std::max(scale, std::abs(v));
  for (int j = 0; j < grid.N; ++j)
    for (std::size_t i = 0; i < pts.size(); ++i)
      CHECK(std::abs(ts[j][i] - tl[j][i]) <= 2e-3 * scale);  // lattice tail at Jmax = 3000
}
