#include "blochfem/spectral.hpp"

#include <cmath>
#include <sstream>

namespace blochfem {

cdouble dtn_symbol(double k, double alpha, int ell, double Lambda_star, Diagnostics& diag) {
  if (!(k > 0.0)) throw std::invalid_argument("dtn_symbol: k must be positive");
  const double xi = Lambda_star * ell - alpha;
  const double disc = k * k - xi * xi;
  if (disc == 0.0 || std::fabs(disc) < 1e-12 * k * k) {
    if (disc != 0.0) {
      std::ostringstream os;
      os << "dtn_symbol: near-cutoff mode l=" << ell << " at alpha=" << alpha;
      diag.warn(os.str());
      return cdouble(0.0, 1.0) * std::sqrt(cdouble(disc, 0.0));
    }
    std::ostringstream os;
    os << "dtn_symbol: Wood anomaly (cutoff) at l=" << ell << ", alpha=" << alpha;
    diag.warn(os.str());
    return 0.0;
  }
  if (disc > 0.0) return cdouble(0.0, std::sqrt(disc));
  return cdouble(-std::sqrt(-disc), 0.0);
}

DtnSymbolTable build_dtn_table(double k, double alpha, int truncation, double Lambda_star,
                               Diagnostics& diag) {
  DtnSymbolTable t;
  t.k = k;
  t.alpha = alpha;
  t.Lambda_star = Lambda_star;
  t.truncation = truncation;
  t.symbols.resize(2 * truncation + 1);
  for (int ell = -truncation; ell <= truncation; ++ell)
    t.symbols[ell + truncation] = dtn_symbol(k, alpha, ell, Lambda_star, diag);
  return t;
}

std::vector<cdouble> DtnSymbolTable::apply(const std::vector<cdouble>& mode_coeffs) const {
  if (mode_coeffs.size() != symbols.size())
    throw std::invalid_argument("DtnSymbolTable::apply: coefficient count mismatch");
  std::vector<cdouble> out(mode_coeffs.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = symbols[i] * mode_coeffs[i];
  return out;
}

cdouble bloch_transform_samples(const std::function<cdouble(double, double)>& f, double alpha,
                                Point x, int Jmax, double Lambda, double* tail_estimate,
                                double tail_tol, Diagnostics& diag) {
  const double C_Lambda = std::sqrt(Lambda / (2.0 * pi));
  cdouble sum = f(x.x1, x.x2);
  double edge = 0.0;
  for (int j = 1; j <= Jmax; ++j) {
    const cdouble fp = f(x.x1 + Lambda * j, x.x2);
    const cdouble fm = f(x.x1 - Lambda * j, x.x2);
    sum += fp * std::polar(1.0, -alpha * Lambda * j) + fm * std::polar(1.0, alpha * Lambda * j);
    if (j == Jmax) edge = std::max(std::abs(fp), std::abs(fm));
  }
  // |f| ~ C (Lambda j)^{-3/2}  =>  tail <= 2 C_Lambda * C Lambda^{-3/2} * 2 / sqrt(Jmax)
  const double C = edge * std::pow(Lambda * Jmax, 1.5);
  const double tail = 4.0 * C_Lambda * C * std::pow(Lambda, -1.5) / std::sqrt(static_cast<double>(Jmax));
  if (tail_estimate) *tail_estimate = tail;
  if (tail > tail_tol) {
    std::ostringstream os;
    os << "bloch_transform_samples: truncation tail estimate " << tail << " exceeds tolerance "
       << tail_tol << " (Jmax=" << Jmax << ")";
    diag.warn(os.str());
  }
  return C_Lambda * sum;
}

}  // namespace blochfem
