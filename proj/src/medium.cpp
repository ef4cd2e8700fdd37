#include "blochfem/medium.hpp"

#include <fftw3.h>

#include <cmath>

namespace blochfem {

double cutoff_Xa(double t, double a) {
  if (!(a > 0.0)) throw std::invalid_argument("cutoff_Xa: a must be positive");
  if (t <= 0.5 * a) return 1.0;
  if (t >= a) return 0.0;
  const double d = a - t;
  return -4.0 * d * d * (a - 4.0 * t) / (a * a * a);
}

namespace {

double wrap_period(double x, double period) {
  // reduce to (-period/2, period/2]
  double y = std::remainder(x, period);
  if (y <= -0.5 * period) y += period;
  return y;
}

// Fourier coefficients of a real even 1-D profile by one dense r2c transform.
std::vector<double> even_profile_coeffs(const std::function<double(double)>& f, double period,
                                        int band) {
  const int S = 1 << 17;
  std::vector<double> in(S);
  const double dx = period / S;
  for (int s = 0; s < S; ++s) in[s] = f(-0.5 * period + s * dx);

  std::vector<cdouble> out(S / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(S, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                        FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  std::vector<double> c(band + 1);
  for (int p = 0; p <= band; ++p) {
    const double phase = (p % 2 == 0) ? 1.0 : -1.0;  // grid starts at -period/2
    c[p] = phase * out[p].real() / S;
  }
  return c;
}

}  // namespace

LayerIndex make_layer1_group1(double amplitude, double Lambda1) {
  LayerIndex l;
  l.period = Lambda1;
  l.band_lo = 1.2;
  l.band_hi = 1.8;
  const double kappa = 2.0 * pi / Lambda1;
  l.profile = [](double x2) { return cutoff_Xa(std::fabs(x2 - 1.5), 0.3); };
  l.eval = [amplitude, kappa, prof = l.profile](double x1, double x2) {
    return amplitude * std::sin(kappa * x1) * prof(x2);
  };
  // sin(kappa x1) = (e^{i kappa x1} - e^{-i kappa x1}) / (2i)
  l.mode_freqs = {kappa, -kappa};
  l.mode_coeffs = {amplitude / cdouble(0.0, 2.0), -amplitude / cdouble(0.0, 2.0)};
  return l;
}

LayerIndex make_layer2_group1(double amplitude) {
  LayerIndex l;
  l.period = 2.0 * pi;
  l.band_lo = 2.2;
  l.band_hi = 2.8;
  l.eval = [amplitude](double x1, double x2) {
    return amplitude * std::sin(x1) * cutoff_Xa(std::fabs(x2 - 2.5), 0.3);
  };
  return l;
}

LayerIndex make_layer1_group2(double amplitude, int mode_band) {
  LayerIndex l;
  l.period = 15.0;
  l.band_lo = 1.2;
  l.band_hi = 1.8;
  l.profile = [](double x2) { return cutoff_Xa(std::fabs(x2 - 1.5), 0.3); };
  l.eval = [amplitude, prof = l.profile](double x1, double x2) {
    return amplitude * cutoff_Xa(std::fabs(wrap_period(x1, 15.0)), 4.0) * prof(x2);
  };
  const auto c = even_profile_coeffs([](double t) { return cutoff_Xa(std::fabs(t), 4.0); }, 15.0,
                                     mode_band);
  l.mode_freqs.push_back(0.0);
  l.mode_coeffs.push_back(amplitude * c[0]);
  for (int p = 1; p <= mode_band; ++p) {
    const double w = 2.0 * pi * p / 15.0;
    l.mode_freqs.push_back(w);
    l.mode_coeffs.push_back(amplitude * c[p]);
    l.mode_freqs.push_back(-w);
    l.mode_coeffs.push_back(amplitude * c[p]);
  }
  return l;
}

LayerIndex make_layer2_group2(double amplitude) {
  LayerIndex l;
  l.period = 2.0 * pi;
  l.band_lo = 2.2;
  l.band_hi = 2.8;
  l.eval = [amplitude](double x1, double x2) {
    const double u = wrap_period(x1, 2.0 * pi);
    const double r = std::sqrt(u * u + (x2 - 2.5) * (x2 - 2.5));
    return amplitude * cutoff_Xa(r, 0.3);
  };
  return l;
}

std::function<double(double, double)> window_layer1(const LayerIndex& layer1, int N, double Lambda) {
  if (N < 1) throw std::invalid_argument("window_layer1: N must be >= 1");
  const double period = N * Lambda;
  const double a = 0.5 * period;
  return [eval = layer1.eval, period, a](double x1, double x2) {
    const double u = wrap_period(x1, period);
    const double w = cutoff_Xa(std::fabs(u), a);
    return w == 0.0 ? 0.0 : eval(u, x2) * w;
  };
}

namespace {

// Fritsch-Carlson slopes on a uniform grid (C1 shape-preserving cubic).
std::vector<double> pchip_slopes(const std::vector<double>& y, double h) {
  const int n = static_cast<int>(y.size());
  std::vector<double> d(n, 0.0);
  if (n < 2) return d;
  std::vector<double> del(n - 1);
  for (int i = 0; i + 1 < n; ++i) del[i] = (y[i + 1] - y[i]) / h;
  if (n == 2) {
    d[0] = d[1] = del[0];
    return d;
  }
  for (int i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) d[i] = 0.0;
    else d[i] = 2.0 * del[i - 1] * del[i] / (del[i - 1] + del[i]);
  }
  auto end_slope = [](double d0, double d1) {
    double s = 1.5 * d0 - 0.5 * d1;
    if (s * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::fabs(s) > 3.0 * std::fabs(d0)) return 3.0 * d0;
    return s;
  };
  d[0] = end_slope(del[0], del[1]);
  d[n - 1] = end_slope(del[n - 2], del[n - 3]);
  return d;
}

double hermite_eval(double y0, double y1, double d0, double d1, double h, double t) {
  const double s = t / h;
  const double s2 = s * s, s3 = s2 * s;
  return y0 * (2 * s3 - 3 * s2 + 1) + y1 * (-2 * s3 + 3 * s2) + h * d0 * (s3 - 2 * s2 + s) +
         h * d1 * (s3 - s2);
}

}  // namespace

FourierTable::FourierTable(std::vector<std::vector<cdouble>> coeffs, double x2_lo, double x2_hi,
                           int band)
    : coeffs_(std::move(coeffs)), lo_(x2_lo), hi_(x2_hi), band_(band) {
  const int ns = static_cast<int>(coeffs_.front().size());
  dx_ = (hi_ - lo_) / (ns - 1);
  slopes_.resize(coeffs_.size());
  std::vector<double> re(ns), im(ns);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    for (int s = 0; s < ns; ++s) {
      re[s] = coeffs_[i][s].real();
      im[s] = coeffs_[i][s].imag();
    }
    const auto dre = pchip_slopes(re, dx_);
    const auto dim = pchip_slopes(im, dx_);
    slopes_[i].resize(ns);
    for (int s = 0; s < ns; ++s) slopes_[i][s] = {dre[s], dim[s]};
  }
}

cdouble FourierTable::coeff(int m, double x2) const {
  if (std::abs(m) > band_) return 0.0;
  if (x2 <= lo_ || x2 >= hi_) return 0.0;
  const auto& y = coeffs_[m + band_];
  const auto& d = slopes_[m + band_];
  int i = static_cast<int>((x2 - lo_) / dx_);
  if (i >= static_cast<int>(y.size()) - 1) i = static_cast<int>(y.size()) - 2;
  const double t = x2 - (lo_ + i * dx_);
  const double re = hermite_eval(y[i].real(), y[i + 1].real(), d[i].real(), d[i + 1].real(), dx_, t);
  const double im = hermite_eval(y[i].imag(), y[i + 1].imag(), d[i].imag(), d[i + 1].imag(), dx_, t);
  return {re, im};
}

double FourierTable::max_abs(int m) const {
  if (std::abs(m) > band_) return 0.0;
  double mx = 0.0;
  for (const cdouble& v : coeffs_[m + band_]) mx = std::max(mx, std::abs(v));
  return mx;
}

FourierTable fourier_decompose(const std::function<double(double, double)>& windowed, int N,
                               double Lambda, int samples_x1, int samples_x2, int band,
                               double x2_lo, double x2_hi) {
  if (band < N) throw std::invalid_argument("fourier_decompose: insufficient band (need band >= N)");
  if (samples_x1 % N != 0)
    throw std::invalid_argument("fourier_decompose: samples_x1 must be divisible by N");
  if (samples_x1 < 2 * band + 2)
    throw std::invalid_argument("fourier_decompose: samples_x1 too small for the requested band");

  const int S = samples_x1;
  const double period = N * Lambda;
  const double dx = period / S;

  std::vector<std::vector<cdouble>> table(2 * band + 1,
                                          std::vector<cdouble>(samples_x2, cdouble(0.0)));

  double* in = fftw_alloc_real(S);
  fftw_complex* out = fftw_alloc_complex(S / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(S, in, out, FFTW_ESTIMATE);

  const double dx2 = (x2_hi - x2_lo) / (samples_x2 - 1);
  for (int line = 0; line < samples_x2; ++line) {
    const double x2 = x2_lo + line * dx2;
    for (int s = 0; s < S; ++s) in[s] = windowed(-0.5 * period + s * dx, x2);
    fftw_execute(plan);
    for (int m = 0; m <= band; ++m) {
      const double phase = (m % 2 == 0) ? 1.0 : -1.0;  // grid origin at -period/2
      const cdouble c = phase * cdouble(out[m][0], out[m][1]) / static_cast<double>(S);
      table[band + m][line] = c;
      table[band - m][line] = std::conj(c);
    }
  }

  fftw_destroy_plan(plan);
  fftw_free(in);
  fftw_free(out);
  return FourierTable(std::move(table), x2_lo, x2_hi, band);
}

cdouble MediumModel::component(int ell, double x1, double x2) const {
  const double Lstar = 2.0 * pi / Lambda;
  cdouble sum = 0.0;
  const int t_lo = static_cast<int>(std::floor((-band - ell) / static_cast<double>(N)));
  const int t_hi = static_cast<int>(std::ceil((band - ell) / static_cast<double>(N)));
  for (int t = t_lo; t <= t_hi; ++t) {
    const int m = ell + N * t;
    if (std::abs(m) > band) continue;
    const cdouble c = fourier.coeff(m, x2);
    if (c == cdouble(0.0)) continue;
    sum += c * std::polar(1.0, Lstar * t * x1);
  }
  return sum;
}

cdouble MediumModel::band_truncated(double x1, double x2) const {
  const double mu = 2.0 * pi / (N * Lambda);
  cdouble sum = fourier.coeff(0, x2);
  for (int m = 1; m <= band; ++m) {
    const cdouble c = fourier.coeff(m, x2);
    if (c == cdouble(0.0)) continue;
    const cdouble e = std::polar(1.0, mu * m * x1);
    sum += c * e + std::conj(c) * std::conj(e);
  }
  return sum;
}

std::vector<double> tilde_index(const LayerIndex& layer2, const PeriodicCellMesh& mesh) {
  std::vector<double> v(mesh.nodes.size(), 1.0);
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    v[i] = 1.0 + layer2.eval(mesh.nodes[i].x1, mesh.nodes[i].x2);
  return v;
}

MediumModel build_medium(const LayerIndex& layer1, const LayerIndex& layer2, double k, int N,
                         const PeriodicCellMesh& mesh, MediumParams params) {
  MediumModel m;
  m.layer1 = layer1;
  m.layer2 = layer2;
  m.k = k;
  m.N = N;
  m.Lambda = mesh.Lambda;
  m.band = params.band > 0 ? params.band : 8 * N;
  const int sx1 = params.samples_x1 > 0 ? params.samples_x1 : 1000 * N;
  const int sx2 = params.samples_x2;

  const auto windowed = window_layer1(layer1, N, mesh.Lambda);
  m.fourier = fourier_decompose(windowed, N, mesh.Lambda, sx1, sx2, m.band, layer1.band_lo,
                                layer1.band_hi);

  m.components.assign(N, std::vector<cdouble>(mesh.nodes.size(), cdouble(0.0)));
#pragma omp parallel for schedule(dynamic)
  for (int ell = 1; ell <= N; ++ell)
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
      m.components[ell - 1][i] = m.component(ell, mesh.nodes[i].x1, mesh.nodes[i].x2);

  m.tilde_nN = tilde_index(layer2, mesh);
  return m;
}

}  // namespace blochfem
