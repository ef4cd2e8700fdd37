#include "blochfem/solver.hpp"

#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

namespace blochfem {

namespace {

using Clock = std::chrono::steady_clock;

double block_norm(const std::vector<Vec>& v) {
  double s = 0.0;
  for (const Vec& b : v) s += b.squaredNorm();
  return std::sqrt(s);
}

std::vector<Vec> unflatten(const Vec& x, int N, int M) {
  std::vector<Vec> out(N);
  for (int j = 0; j < N; ++j) out[j] = x.segment(j * M, M);
  return out;
}

Vec flatten(const std::vector<Vec>& x) {
  const int N = static_cast<int>(x.size());
  const int M = static_cast<int>(x.front().size());
  Vec out(N * M);
  for (int j = 0; j < N; ++j) out.segment(j * M, M) = x[j];
  return out;
}

double true_residual(const BlockSystem& sys, const Vec& x, const Vec& b) {
  std::vector<Vec> xb = unflatten(x, sys.N, sys.M), yb;
  block_matvec(sys, xb, yb);
  double num = 0.0;
  for (int j = 0; j < sys.N; ++j) num += (yb[j] - b.segment(j * sys.M, sys.M)).squaredNorm();
  const double den = b.norm();
  return den > 0.0 ? std::sqrt(num) / den : std::sqrt(num);
}

struct BlockJacobi {
  std::vector<std::unique_ptr<Eigen::SparseLU<SpMat>>> lu;
  int N = 0, M = 0;

  explicit BlockJacobi(const BlockSystem& sys) : N(sys.N), M(sys.M) {
    lu.resize(N);
    bool ok = true;
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < N; ++j) {
      lu[j] = std::make_unique<Eigen::SparseLU<SpMat>>();
      lu[j]->compute(sys.A[j]);
      if (lu[j]->info() != Eigen::Success) ok = false;
    }
    if (!ok) throw SolverError("block-Jacobi preconditioner: singular diagonal block");
  }

  Vec apply(const Vec& x) const {
    Vec out(N * M);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < N; ++j) out.segment(j * M, M) = lu[j]->solve(x.segment(j * M, M));
    return out;
  }
};

// Right-preconditioned restarted GMRES on the block operator.
int gmres(const BlockSystem& sys, const Vec& b, Vec& x, const BlockJacobi& prec, double tol,
          int max_iter, int restart, std::vector<double>& res_history) {
  const int n = static_cast<int>(b.size());
  const double bnorm = b.norm();
  x = Vec::Zero(n);
  if (bnorm == 0.0) return 0;

  auto op = [&sys](const Vec& v) {
    std::vector<Vec> vb = unflatten(v, sys.N, sys.M), yb;
    block_matvec(sys, vb, yb);
    return flatten(yb);
  };

  int total_iters = 0;
  while (total_iters < max_iter) {
    Vec r = b - op(x);
    const double beta = r.norm();
    res_history.push_back(beta / bnorm);
    if (beta / bnorm <= tol) return total_iters;

    std::vector<Vec> V;
    V.push_back(r / beta);
    const int mdim = std::min(restart, max_iter - total_iters);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(mdim + 1, mdim);
    Vec g = Vec::Zero(mdim + 1);
    g[0] = beta;
    std::vector<cdouble> cs(mdim), sn(mdim);
    int i = 0;
    for (; i < mdim; ++i) {
      Vec w = op(prec.apply(V[i]));
      for (int k2 = 0; k2 <= i; ++k2) {
        H(k2, i) = V[k2].dot(w);  // Eigen dot conjugates the first argument
        w -= H(k2, i) * V[k2];
      }
      const double hnorm = w.norm();
      // previously accumulated rotations touch rows 0..i only
      for (int k2 = 0; k2 < i; ++k2) {
        const cdouble t = cs[k2] * H(k2, i) + sn[k2] * H(k2 + 1, i);
        H(k2 + 1, i) = -std::conj(sn[k2]) * H(k2, i) + std::conj(cs[k2]) * H(k2 + 1, i);
        H(k2, i) = t;
      }
      H(i + 1, i) = hnorm;
      const double denom = std::sqrt(std::norm(H(i, i)) + hnorm * hnorm);
      if (denom == 0.0) {
        cs[i] = 1.0;
        sn[i] = 0.0;
      } else {
        cs[i] = std::conj(H(i, i)) / denom;
        sn[i] = hnorm / denom;
      }
      H(i, i) = cs[i] * H(i, i) + sn[i] * H(i + 1, i);
      H(i + 1, i) = 0.0;
      g[i + 1] = -std::conj(sn[i]) * g[i];
      g[i] = cs[i] * g[i];
      ++total_iters;
      res_history.push_back(std::abs(g[i + 1]) / bnorm);
      if (std::abs(g[i + 1]) / bnorm <= tol || hnorm == 0.0) {
        ++i;
        break;
      }
      V.push_back(w / hnorm);
    }
    // back substitution on the i x i triangular system
    Vec y = Vec::Zero(i);
    for (int r2 = i - 1; r2 >= 0; --r2) {
      cdouble s = g[r2];
      for (int c2 = r2 + 1; c2 < i; ++c2) s -= H(r2, c2) * y[c2];
      y[r2] = s / H(r2, r2);
    }
    Vec u = Vec::Zero(n);
    for (int k2 = 0; k2 < i; ++k2) u += y[k2] * V[k2];
    x += prec.apply(u);
    if (res_history.back() <= tol) return total_iters;
  }
  return total_iters;
}

}  // namespace

std::pair<BlochField, SolveReport> solve(const BlockSystem& sys, const SolverConfig& config,
                                         Diagnostics& diag) {
  const auto t0 = Clock::now();
  const int N = sys.N, M = sys.M;
  Vec b(N * M);
  for (int j = 0; j < N; ++j) b.segment(j * M, M) = sys.rhs[j];

  SolveReport rep;
  Vec x;

  SolverConfig::Method method = config.method;
  if (method == SolverConfig::Method::automatic)
    method = (static_cast<long long>(N) * M <= config.direct_limit) ? SolverConfig::Method::direct
                                                                    : SolverConfig::Method::gmres;

  if (b.norm() == 0.0) {
    x = Vec::Zero(N * M);
    rep.method = method == SolverConfig::Method::direct ? "direct" : "iterative";
    rep.residual = 0.0;
    rep.iterations = 0;
  } else if (method == SolverConfig::Method::direct) {
    rep.method = "direct";
    const SpMat G = global_matrix(sys);
    Eigen::SparseLU<SpMat> lu;
    lu.compute(G);
    if (lu.info() != Eigen::Success)
      throw SolverError("solve: sparse LU factorization failed (singular system?)");
    x = lu.solve(b);
    rep.residual = true_residual(sys, x, b);
    if (!(rep.residual <= config.tol_direct)) {
      std::ostringstream os;
      os << "solve: direct residual " << rep.residual << " exceeds tolerance " << config.tol_direct;
      throw SolverError(os.str(), rep.residual);
    }
  } else {
    rep.method = "iterative";
    BlockJacobi prec(sys);
    std::vector<double> hist;
    rep.iterations = gmres(sys, b, x, prec, config.tol_iter, config.max_iter, config.restart, hist);
    rep.residual = true_residual(sys, x, b);
    if (!(rep.residual <= config.tol_iter)) {
      std::ostringstream os;
      os << "solve: GMRES did not converge after " << rep.iterations
         << " iterations; residual trace:";
      for (std::size_t i = 0; i < hist.size(); i += std::max<std::size_t>(1, hist.size() / 8))
        os << ' ' << hist[i];
      os << " final " << rep.residual;
      throw SolverError(os.str(), rep.residual);
    }
  }

  // scatter to nodal blocks; bottom row carries the Dirichlet data
  BlochField field;
  field.mesh = sys.mesh;
  field.grid = sys.grid;
  field.blocks.assign(N, Vec::Zero(M + sys.mesh->nx));
  for (int j = 0; j < N; ++j) {
    field.blocks[j].segment(sys.mesh->nx, M) = x.segment(j * M, M);
    field.blocks[j].segment(0, sys.mesh->nx) = sys.bottom_data[j];
  }

  rep.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  rep.warnings = diag.warnings();
  return {std::move(field), rep};
}

cdouble BlochField::eval_block(int j, Point x) const {
  const PeriodicCellMesh& m = *mesh;
  const double dx = m.dx(), dy = m.dy();
  double u = (x.x1 + 0.5 * m.Lambda) / dx;
  double v = (x.x2 - m.h0) / dy;
  int c = static_cast<int>(std::floor(u));
  int r = static_cast<int>(std::floor(v));
  c = std::clamp(c, 0, m.nx - 1);
  r = std::clamp(r, 0, m.ny - 1);
  u -= c;
  v -= r;
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  auto pval = [&](int col, int row) {
    const int pcol = col == 0 ? m.nx : col;
    return blocks[j - 1][row * m.nx + (pcol - 1)];
  };
  const cdouble bl = pval(c, r), br = pval(c + 1, r), tr = pval(c + 1, r + 1), tl = pval(c, r + 1);
  if (u >= v) return bl * (1.0 - u) + br * (u - v) + tr * v;
  return bl * (1.0 - v) + tr * u + tl * (v - u);
}

cdouble inverse_bloch(const BlochField& w, const AlphaGrid& grid, int copy_m, Point x) {
  if (static_cast<int>(w.blocks.size()) != grid.N)
    throw std::invalid_argument("inverse_bloch: block count does not match the grid");
  const double scale = std::sqrt(2.0 * pi / grid.Lambda) / grid.N;
  cdouble sum = 0.0;
  for (int j = 1; j <= grid.N; ++j)
    sum += std::polar(1.0, grid.alpha(j) * (x.x1 + grid.Lambda * copy_m)) * w.eval_block(j, x);
  return scale * sum;
}

std::vector<cdouble> reconstruct_on_trace(const BlochField& w, const std::vector<double>& x1_samples) {
  std::vector<cdouble> out(x1_samples.size());
  for (std::size_t i = 0; i < x1_samples.size(); ++i)
    out[i] = inverse_bloch(w, w.grid, 0, {x1_samples[i], w.mesh->H});
  return out;
}

double relative_trace_error(const std::vector<cdouble>& u_num, const std::vector<cdouble>& u_ref,
                            const std::vector<double>& weights) {
  if (u_num.size() != u_ref.size() || u_num.size() != weights.size())
    throw std::invalid_argument("relative_trace_error: sample grids do not match");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u_num.size(); ++i) {
    num += weights[i] * std::norm(u_num[i] - u_ref[i]);
    den += weights[i] * std::norm(u_ref[i]);
  }
  if (den <= 0.0) throw std::invalid_argument("relative_trace_error: degenerate reference");
  return std::sqrt(num / den);
}

}  // namespace blochfem
