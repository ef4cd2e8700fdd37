#pragma once

#include <cmath>
#include <functional>

#include "blochfem/mesh.hpp"

namespace blochfem {

// C1 bump used by the built-in indices and the periodization window:
// 1 for t <= a/2, 0 for t >= a, cubic blend in between.
double cutoff_Xa(double t, double a);

// One refractive-index layer: x1-periodic evaluator supported in a x2-band.
struct LayerIndex {
  std::function<double(double, double)> eval;
  double period = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;

  // Layer-1 indices additionally expose a finite modulated-exponential form
  // n1(x) = sum_p coeff[p] * profile(x2) * exp(i freq[p] x1), used by the
  // spectral source evaluator. Empty for layers without one.
  std::vector<cdouble> mode_coeffs;
  std::vector<double> mode_freqs;
  std::function<double(double)> profile;
};

LayerIndex make_layer1_group1(double amplitude = 0.1, double Lambda1 = 2.0 * std::sqrt(2.0) * pi);
LayerIndex make_layer2_group1(double amplitude = 0.25);
LayerIndex make_layer1_group2(double amplitude = -0.25, int mode_band = 600);
LayerIndex make_layer2_group2(double amplitude = 0.25);

// n1 windowed to one NLambda supercell and extended periodically.
std::function<double(double, double)> window_layer1(const LayerIndex& layer1, int N, double Lambda);

// Fourier data of the windowed layer: coefficients m -> n_hat_m(x2) on a
// uniform x2 grid over the layer band, interpolated C1 (pchip) off the grid.
class FourierTable {
 public:
  FourierTable() = default;
  FourierTable(std::vector<std::vector<cdouble>> coeffs, double x2_lo, double x2_hi, int band);

  int band() const { return band_; }
  // n_hat_m(x2); zero outside the tabulated band.
  cdouble coeff(int m, double x2) const;
  double max_abs(int m) const;

 private:
  std::vector<std::vector<cdouble>> coeffs_;  // [m + band][x2 sample]
  std::vector<std::vector<cdouble>> slopes_;  // pchip derivatives
  double lo_ = 0.0, hi_ = 0.0, dx_ = 0.0;
  int band_ = 0;
};

// Discrete Fourier analysis of the windowed index: samples_x1 equispaced
// points per line, samples_x2 lines across the layer band.
FourierTable fourier_decompose(const std::function<double(double, double)>& windowed, int N,
                               double Lambda, int samples_x1, int samples_x2, int band,
                               double x2_lo, double x2_hi);

// Everything the assembly needs about the medium on one cell mesh.
struct MediumModel {
  LayerIndex layer1, layer2;
  double k = 0.0;
  int N = 1;
  double Lambda = 0.0;
  int band = 0;
  FourierTable fourier;

  // nodal samples, complex: components[l][node] = n1N(l+1)(node), l = 0..N-1
  std::vector<std::vector<cdouble>> components;
  std::vector<double> tilde_nN;  // nodal 1 + n2 in D2, 1 elsewhere

  // Quasi-periodic component l (1-based) at an arbitrary point.
  cdouble component(int ell, double x1, double x2) const;
  // Band-truncated windowed index sum_{|m|<=band} n_hat_m(x2) e^{i 2 pi m x1/(N Lambda)}.
  cdouble band_truncated(double x1, double x2) const;
};

// Nodal samples of tilde_n = 1 + n2 in the layer-2 band, 1 elsewhere.
std::vector<double> tilde_index(const LayerIndex& layer2, const PeriodicCellMesh& mesh);

struct MediumParams {
  int samples_x1 = 0;  // default 1000 N
  int samples_x2 = 1000;
  int band = 0;  // default 8 N
};

MediumModel build_medium(const LayerIndex& layer1, const LayerIndex& layer2, double k, int N,
                         const PeriodicCellMesh& mesh, MediumParams params = {});

}  // namespace blochfem
