#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "blochfem/medium.hpp"

using namespace blochfem;

TEST_CASE("cutoff: plateau, support edge, midpoint value") {
  const double a = 0.7;
  CHECK(cutoff_Xa(0.5 * a, a) == 1.0);
  CHECK(cutoff_Xa(0.2 * a, a) == 1.0);
  CHECK(cutoff_Xa(a, a) == 0.0);
  CHECK(cutoff_Xa(1.5 * a, a) == 0.0);
  // direct evaluation of the cubic at t = 3a/4: -4 (a/4)^2 (-2a) / a^3 = 1/2
  CHECK(cutoff_Xa(0.75 * a, a) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(cutoff_Xa(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("cutoff is C1 at the junctions") {
  const double a = 1.3, eps = 1e-7;
  for (double t0 : {0.5 * a, a}) {
    const double dl = (cutoff_Xa(t0, a) - cutoff_Xa(t0 - eps, a)) / eps;
    const double dr = (cutoff_Xa(t0 + eps, a) - cutoff_Xa(t0, a)) / eps;
    CHECK(std::fabs(dl - dr) < 1e-5);
  }
}

TEST_CASE("built-in groups evaluate per their defining formulas") {
  const auto l1 = make_layer1_group1();
  const auto l2 = make_layer2_group1();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux(-20.0, 20.0), uy(1.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double x1 = ux(rng), x2 = uy(rng);
    const double n1 = 0.1 * std::sin(x1 / std::sqrt(2.0)) * cutoff_Xa(std::fabs(x2 - 1.5), 0.3);
    const double n2 = 0.25 * std::sin(x1) * cutoff_Xa(std::fabs(x2 - 2.5), 0.3);
    CHECK(l1.eval(x1, x2) == doctest::Approx(n1).epsilon(1e-13));
    CHECK(l2.eval(x1, x2) == doctest::Approx(n2).epsilon(1e-13));
  }
  const auto g2l1 = make_layer1_group2();
  const auto g2l2 = make_layer2_group2();
  for (int i = 0; i < 200; ++i) {
    const double x1 = ux(rng), x2 = uy(rng);
    double u = std::remainder(x1, 15.0);
    const double n1 = -0.25 * cutoff_Xa(std::fabs(u), 4.0) * cutoff_Xa(std::fabs(x2 - 1.5), 0.3);
    double v = std::remainder(x1, 2.0 * pi);
    const double n2 = 0.25 * cutoff_Xa(std::hypot(v, x2 - 2.5), 0.3);
    CHECK(g2l1.eval(x1, x2) == doctest::Approx(n1).epsilon(1e-12));
    CHECK(g2l2.eval(x1, x2) == doctest::Approx(n2).epsilon(1e-12));
  }
}

TEST_CASE("layer periodicity and support bands") {
  for (const LayerIndex& l : {make_layer1_group1(), make_layer2_group1(), make_layer1_group2(),
                              make_layer2_group2()}) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> ux(-30.0, 30.0), uy(0.0, 4.0);
    for (int i = 0; i < 100; ++i) {
      const double x1 = ux(rng), x2 = uy(rng);
      CHECK(std::fabs(l.eval(x1 + l.period, x2) - l.eval(x1, x2)) <= 1e-12);
      if (x2 <= l.band_lo || x2 >= l.band_hi) CHECK(l.eval(x1, x2) == 0.0);
      CHECK(std::fabs(l.eval(x1, x2)) < 1.0);
    }
  }
}

TEST_CASE("window: identity region, vanishing edge, periodic extension") {
  const int N = 4;
  const double Lambda = 2.0 * pi;
  const auto l1 = make_layer1_group1();
  const auto w = window_layer1(l1, N, Lambda);
  const double P = N * Lambda;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ux(-P / 4.0, P / 4.0);
  for (int i = 0; i < 100; ++i) {
    const double x1 = ux(rng);
    CHECK(w(x1, 1.5) == doctest::Approx(l1.eval(x1, 1.5)).epsilon(1e-13));
  }
  CHECK(w(P / 2.0, 1.5) == 0.0);
  // periodic extension just right of the window edge
  CHECK(w(P / 2.0 + 0.25, 1.5) == doctest::Approx(w(-P / 2.0 + 0.25, 1.5)).epsilon(1e-12));
  CHECK(std::fabs(w(7 * P + 1.1, 1.4) - w(1.1, 1.4)) <= 1e-12);
  // |n_N| <= |n| on a sample grid
  for (int i = 0; i < 300; ++i) {
    const double x1 = ux(rng) * 3.9, x2 = 1.2 + 0.6 * (i / 300.0);
    CHECK(std::fabs(w(x1, x2)) <= std::fabs(l1.eval(x1, x2)) + 1e-15);
  }
}

TEST_CASE("fourier_decompose: single real mode lands on the right coefficients") {
  const int N = 3;
  const double Lambda = 2.0;
  const double P = N * Lambda;
  auto chi = [](double x2) { return cutoff_Xa(std::fabs(x2 - 1.5), 0.3); };
  auto f = [&](double x1, double x2) { return std::cos(2.0 * pi * x1 / P) * chi(x2); };
  const auto table = fourier_decompose(f, N, Lambda, 300, 101, 2 * N, 1.2, 1.8);
  for (double x2 : {1.35, 1.5, 1.62}) {
    CHECK(std::abs(table.coeff(1, x2) - 0.5 * chi(x2)) <= 1e-12);
    CHECK(std::abs(table.coeff(-1, x2) - 0.5 * chi(x2)) <= 1e-12);
    for (int m : {0, 2, 3, 4, 5, 6}) {
      if (m != 1) CHECK(std::abs(table.coeff(m, x2)) <= 1e-12);
    }
  }
}

TEST_CASE("fourier_decompose: zero input, bad arguments") {
  auto zero = [](double, double) { return 0.0; };
  const auto table = fourier_decompose(zero, 2, 1.0, 100, 11, 4, 1.0, 2.0);
  CHECK(table.max_abs(0) == 0.0);
  CHECK(table.max_abs(3) == 0.0);
  CHECK_THROWS_AS(fourier_decompose(zero, 4, 1.0, 100, 11, 3, 1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(fourier_decompose(zero, 3, 1.0, 100, 11, 4, 1.0, 2.0), std::invalid_argument);
}

TEST_CASE("decomposition identity against the band-truncated series") {
  for (const char* group : {"group1", "group2"}) {
    const int N = 5;
    const auto mesh = build_cell_mesh(2.0 * pi, 1.0, 3.0, 0.4);
    const LayerIndex l1 =
        group == std::string("group1") ? make_layer1_group1() : make_layer1_group2();
    const LayerIndex l2 =
        group == std::string("group1") ? make_layer2_group1() : make_layer2_group2();
    const MediumModel medium = build_medium(l1, l2, 1.0, N, mesh);

    std::mt19937 rng(17);
    std::uniform_real_distribution<double> ux(-pi, pi), uy(1.2, 1.8);
    double scale = 0.0;
    std::vector<Point> pts;
    for (int i = 0; i < 1000; ++i) {
      pts.push_back({ux(rng), uy(rng)});
      scale = std::max(scale, std::abs(medium.band_truncated(pts.back().x1, pts.back().x2)));
    }
    for (const Point& p : pts) {
      cdouble resum = 0.0;
      for (int ell = 1; ell <= N; ++ell)
        resum += std::polar(1.0, 2.0 * ell * pi * p.x1 / (N * medium.Lambda)) *
                 medium.component(ell, p.x1, p.x2);
      CHECK(std::abs(resum - medium.band_truncated(p.x1, p.x2)) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("components are Lambda-periodic and approximate the windowed index") {
  const int N = 5;
  const auto mesh = build_cell_mesh(2.0 * pi, 1.0, 3.0, 0.4);
  const MediumModel medium = build_medium(make_layer1_group1(), make_layer2_group1(), 1.0, N, mesh);
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> ux(-pi, pi), uy(1.25, 1.75);
  for (int i = 0; i < 50; ++i) {
    const double x1 = ux(rng), x2 = uy(rng);
    for (int ell = 1; ell <= N; ++ell)
      CHECK(std::abs(medium.component(ell, x1 + medium.Lambda, x2) -
                     medium.component(ell, x1, x2)) <= 1e-12);
  }

  // band-truncation error bound: measured tail of |n_hat| extrapolated as C/m^2
  const auto windowed = window_layer1(medium.layer1, N, medium.Lambda);
  double c2 = 0.0;
  for (int m = medium.band / 2; m <= medium.band; ++m)
    c2 = std::max(c2, medium.fourier.max_abs(m) * m * static_cast<double>(m));
  const double tail_bound = 2.0 * c2 / medium.band;
  for (int i = 0; i < 200; ++i) {
    const double x1 = ux(rng) * N, x2 = uy(rng);
    CHECK(std::abs(medium.band_truncated(x1, x2) - windowed(x1, x2)) <= 10.0 * tail_bound + 1e-9);
  }
}

TEST_CASE("coefficient decay: octave-maximum slope at most -1.5") {
  for (const char* group : {"group1", "group2"}) {
    const int N = 6;
    const auto mesh = build_cell_mesh(2.0 * pi, 1.0, 3.0, 0.5);
    const LayerIndex l1 =
        group == std::string("group1") ? make_layer1_group1() : make_layer1_group2();
    const LayerIndex l2 =
        group == std::string("group1") ? make_layer2_group1() : make_layer2_group2();
    const MediumModel medium = build_medium(l1, l2, 1.0, N, mesh);
    // max |n_hat_m| per octave [N,2N), [2N,4N), [4N,8N]
    std::vector<double> centers, maxima;
    for (int lo = N; lo < 8 * N; lo *= 2) {
      double mx = 0.0;
      for (int m = lo; m < std::min(2 * lo, 8 * N + 1); ++m)
        mx = std::max(mx, medium.fourier.max_abs(m));
      centers.push_back(1.5 * lo);
      maxima.push_back(mx);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
      const double x = std::log(centers[i]), y = std::log(maxima[i] + 1e-300);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(centers.size());
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(slope <= -1.5);
  }
}

TEST_CASE("tilde index") {
  const auto mesh = build_cell_mesh(2.0 * pi, 1.0, 3.0, 0.25);
  const auto l2 = make_layer2_group1();
  const auto v = tilde_index(l2, mesh);
  for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
    const Point& p = mesh.nodes[n];
    if (p.x2 < 2.0) CHECK(v[n] == 1.0);
    CHECK(v[n] == doctest::Approx(1.0 + l2.eval(p.x1, p.x2)).epsilon(1e-14));
  }
  LayerIndex zero = l2;
  zero.eval = [](double, double) { return 0.0; };
  for (double x : tilde_index(zero, mesh)) CHECK(x == 1.0);
}
