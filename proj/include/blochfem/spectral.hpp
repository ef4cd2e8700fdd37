#pragma once

#include <functional>

#include "blochfem/core.hpp"

namespace blochfem {

// Uniform sample points of the Brillouin zone (0, 2 pi / Lambda].
struct AlphaGrid {
  int N = 1;
  double Lambda = 0.0;

  double Lambda_star() const { return 2.0 * pi / Lambda; }
  double spacing() const { return 2.0 * pi / (N * Lambda); }
  // alpha_N^(j) = 2 pi j / (N Lambda), j = 1..N
  double alpha(int j) const { return 2.0 * pi * j / (N * Lambda); }
  // I_j = (alpha_j - spacing, alpha_j]
  std::pair<double, double> interval(int j) const { return {alpha(j) - spacing(), alpha(j)}; }
};

// DtN symbol i sqrt(k^2 - (Lambda* l - alpha)^2) with the Im >= 0 branch:
// purely imaginary (Im > 0) for propagating modes, real <= 0 for evanescent
// ones, exactly 0 at cutoff (Wood anomaly, reported through diag).
cdouble dtn_symbol(double k, double alpha, int ell, double Lambda_star,
                   Diagnostics& diag = Diagnostics::ignore());

// Symbols for |l| <= truncation at fixed (k, alpha).
struct DtnSymbolTable {
  double k = 0.0;
  double alpha = 0.0;
  double Lambda_star = 0.0;
  int truncation = 0;
  std::vector<cdouble> symbols;  // index l + truncation

  cdouble symbol(int ell) const { return symbols[ell + truncation]; }
  // Trace-mode action: multiplies the coefficient of e^{i Lambda* l x1} by sigma_l.
  std::vector<cdouble> apply(const std::vector<cdouble>& mode_coeffs) const;
};

DtnSymbolTable build_dtn_table(double k, double alpha, int truncation, double Lambda_star,
                               Diagnostics& diag = Diagnostics::ignore());

// Truncated lattice sum C_Lambda sum_{|j| <= Jmax} f(x1 + Lambda j, x2) e^{-i alpha Lambda j}.
// tail_estimate receives a bound on the dropped tail from the O(|Lambda j|^{-3/2})
// half-space decay model; a truncation warning is emitted when it exceeds tail_tol.
cdouble bloch_transform_samples(const std::function<cdouble(double, double)>& f, double alpha,
                                Point x, int Jmax, double Lambda,
                                double* tail_estimate = nullptr, double tail_tol = 1e30,
                                Diagnostics& diag = Diagnostics::ignore());

}  // namespace blochfem
