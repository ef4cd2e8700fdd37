#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace blochfem {

using cdouble = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

// Thrown when a linear solve does not reach its residual target.
struct SolverError : std::runtime_error {
  double residual;
  explicit SolverError(const std::string& msg, double res = -1.0)
      : std::runtime_error(msg), residual(res) {}
};

// Collects non-fatal warnings (Wood anomalies, lattice-sum truncation, ...).
// Callers that don't care can pass the ignore() sink.
class Diagnostics {
 public:
  void warn(const std::string& msg) { warnings_.push_back(msg); }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void clear() { warnings_.clear(); }
  bool empty() const { return warnings_.empty(); }

  static Diagnostics& ignore() {
    static Diagnostics sink;
    if (sink.warnings_.size() > 4096) sink.clear();
    return sink;
  }

 private:
  std::vector<std::string> warnings_;
};

}  // namespace blochfem
