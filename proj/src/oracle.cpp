#include "blochfem/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace blochfem {

namespace {

double sinc(double u) { return std::fabs(u) < 1e-8 ? 1.0 - u * u / 6.0 : std::sin(u) / u; }

}  // namespace

SupercellResult solve_supercell(const SupercellMesh& supermesh, const MediumModel& medium, double k,
                                const AlphaGrid& grid, const BlochSource& source, int L_cell,
                                const std::vector<std::vector<cdouble>>& dirichlet,
                                Diagnostics& diag) {
  const int N = grid.N;
  if (supermesh.N != N) throw std::invalid_argument("solve_supercell: supercell/grid N mismatch");
  const PeriodicCellMesh& sm = supermesh.mesh;
  const double Lambda = grid.Lambda;
  const double P = N * Lambda;
  const int cell_nx = sm.nx / N;
  const int NP = cell_nx * (sm.ny + 1);  // periodic nodes of the underlying cell
  const int dim = N * NP;

  SupercellResult result;
  result.counters.cell_quad_points = static_cast<long long>(3) * sm.triangles.size();

  std::vector<double> alphas(N + 1);
  for (int j = 1; j <= N; ++j) alphas[j] = grid.alpha(j);

  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);

  // volume terms: loop supercell elements, trial e^{i a_j'' X1} phi_l', test e^{i a_j X1} phi_l
  const std::vector<Point> qpts = quadrature_points(sm);
  std::vector<int> qpt_offsets;  // lattice offset of the copy that owns each point
  qpt_offsets.reserve(qpts.size());
  for (std::size_t t = 0; t < sm.triangles.size(); ++t) {
    const int col = static_cast<int>(t) / 2 % sm.nx;
    const int copy = col / cell_nx;
    for (int q = 0; q < 3; ++q) qpt_offsets.push_back(copy - N / 2);
  }

  std::vector<cdouble> gN;
  if (source.source().kind == HalfSpaceSource::Kind::volume)
    gN = source.supercell_volume(qpts, qpt_offsets, diag);

  std::vector<cdouble> phases(N + 1);
  std::size_t qp = 0;
  for (std::size_t t = 0; t < sm.triangles.size(); ++t) {
    const auto& tri = sm.triangles[t];
    Point p[3];
    int cpn[3];  // cell periodic node of each vertex
    for (int i = 0; i < 3; ++i) {
      p[i] = sm.nodes[tri[i]];
      auto [copy, cell_node] = supermesh.copy_of_node(tri[i]);
      const int cols = cell_nx + 1;
      const int row = cell_node / cols;
      int col = cell_node % cols;
      if (col == 0) col = cell_nx;
      cpn[i] = row * cell_nx + (col - 1);
    }
    const double d1x = p[1].x1 - p[0].x1, d1y = p[1].x2 - p[0].x2;
    const double d2x = p[2].x1 - p[0].x1, d2y = p[2].x2 - p[0].x2;
    const double det = d1x * d2y - d2x * d1y;
    const double area = 0.5 * det;
    double gx[3], gy[3];
    gx[1] = d2y / det;
    gy[1] = -d2x / det;
    gx[2] = -d1y / det;
    gy[2] = d1x / det;
    gx[0] = -gx[1] - gx[2];
    gy[0] = -gy[1] - gy[2];
    const double w = area / 3.0;

    // tilde_n and components are cached on cell nodes; map vertices back
    double tilde_v[3];
    std::vector<const cdouble*> comp_rows(N);
    for (int c = 0; c < N; ++c) comp_rows[c] = medium.components[c].data();
    int cell_node_of[3];
    for (int i = 0; i < 3; ++i) {
      auto [copy, cell_node] = supermesh.copy_of_node(tri[i]);
      cell_node_of[i] = cell_node;
      tilde_v[i] = medium.tilde_nN[cell_node];
    }

    for (int q = 0; q < 3; ++q, ++qp) {
      // midpoint opposite vertex q
      const Point mid{0.5 * (p[(q + 1) % 3].x1 + p[(q + 2) % 3].x1),
                      0.5 * (p[(q + 1) % 3].x2 + p[(q + 2) % 3].x2)};
      result.counters.grad_evals += 2;
      result.counters.mass_evals += 1;
      // resummed band-truncated index at the quadrature point
      cdouble n1 = 0.0;
      for (int c = 1; c <= N; ++c) {
        cdouble comp = 0.0;
        for (int i = 0; i < 3; ++i)
          comp += (i == q ? 0.0 : 0.5) * comp_rows[c - 1][cell_node_of[i]];
        n1 += comp * std::polar(1.0, 2.0 * pi * c * mid.x1 / P);
      }
      double tilde_q = 0.0;
      for (int i = 0; i < 3; ++i) tilde_q += (i == q ? 0.0 : 0.5) * tilde_v[i];
      const cdouble index_q = tilde_q + n1;

      for (int j = 1; j <= N; ++j) phases[j] = std::polar(1.0, alphas[j] * mid.x1);

      for (int jt = 1; jt <= N; ++jt) {          // test block
        for (int jr = 1; jr <= N; ++jr) {        // trial block
          const cdouble ph = phases[jr] * std::conj(phases[jt]);
          for (int i = 0; i < 3; ++i) {          // test vertex
            const double bi = (i == q) ? 0.0 : 0.5;
            const cdouble gtestx = gx[i] - cdouble(0.0, alphas[jt]) * bi;  // conj of (grad + i a) phi
            const double gtesty = gy[i];
            for (int jj = 0; jj < 3; ++jj) {     // trial vertex
              const double bj = (jj == q) ? 0.0 : 0.5;
              const cdouble gtrialx = gx[jj] + cdouble(0.0, alphas[jr]) * bj;
              const cdouble grad_term = gtrialx * gtestx + gy[jj] * gtesty;
              const cdouble val = w * ph * (grad_term - k * k * index_q * bi * bj);
              A((jt - 1) * NP + cpn[i], (jr - 1) * NP + cpn[jj]) += val;
            }
          }
        }
      }

      if (!gN.empty() && gN[qp] != cdouble(0.0)) {
        for (int jt = 1; jt <= N; ++jt) {
          const cdouble common = -w * gN[qp] * std::conj(phases[jt]);
          for (int i = 0; i < 3; ++i) {
            const double bi = (i == q) ? 0.0 : 0.5;
            if (bi != 0.0) rhs[(jt - 1) * NP + cpn[i]] += common * bi;
          }
        }
      }
    }
  }

  // DtN over the union mode set {N q + j : |q| <= L_cell, j = 1..N}
  std::vector<int> mode_ids;
  for (int j = 1; j <= N; ++j)
    for (int q = -L_cell; q <= L_cell; ++q) mode_ids.push_back(N * q + j);

  const int n_top = cell_nx;  // top nodes per copy share cell pnodes
  std::vector<double> top_cell_x1(n_top);
  std::vector<int> top_cpn(n_top);
  for (int c = 1; c <= cell_nx; ++c) {
    top_cell_x1[c - 1] = -0.5 * Lambda + c * (Lambda / cell_nx);
    top_cpn[c - 1] = sm.ny * cell_nx + (c - 1);
  }
  const double delta = Lambda / cell_nx;

  // supercell trace coefficient of e^{i a_j X} phi_l at mode mu_p (literal copy sum)
  auto trace_coeff = [&](int j, int l, double mu) -> cdouble {
    const double xi = alphas[j] - mu;
    const double s = sinc(0.5 * xi * delta);
    cdouble copy_sum = 0.0;
    for (int m = 0; m < N; ++m)
      copy_sum += std::polar(1.0, xi * (top_cell_x1[l] + supermesh.copy_shift(m)));
    return (delta / P) * s * s * copy_sum;
  };

  std::vector<cdouble> fsuper;
  if (source.source().kind == HalfSpaceSource::Kind::incident)
    fsuper = source.supercell_boundary_modes(mode_ids, sm.H);

  for (std::size_t pi = 0; pi < mode_ids.size(); ++pi) {
    const int p = mode_ids[pi];
    const double mu = 2.0 * pi * p / P;
    const cdouble sigma = dtn_symbol(k, 0.0, p, 2.0 * pi / P, diag);
    std::vector<cdouble> coef(static_cast<std::size_t>(N) * n_top);
    for (int j = 1; j <= N; ++j)
      for (int l = 0; l < n_top; ++l) coef[(j - 1) * n_top + l] = trace_coeff(j, l, mu);
    for (int jt = 1; jt <= N; ++jt)
      for (int lt = 0; lt < n_top; ++lt) {
        const cdouble ct = coef[(jt - 1) * n_top + lt];
        if (fsuper.size()) rhs[(jt - 1) * NP + top_cpn[lt]] += P * fsuper[pi] * std::conj(ct);
        for (int jr = 1; jr <= N; ++jr)
          for (int lr = 0; lr < n_top; ++lr) {
            const cdouble cr = coef[(jr - 1) * n_top + lr];
            A((jt - 1) * NP + top_cpn[lt], (jr - 1) * NP + top_cpn[lr]) -= P * sigma * cr * std::conj(ct);
          }
      }
  }

  // bottom rows: impose coefficients; interior rows keep the weak equations.
  // Coefficients relate to the cell path's w~ by the factor 1/(N C_Lambda).
  const double data_scale = std::sqrt(2.0 * pi / Lambda) / N;
  std::vector<char> is_bottom(NP, 0);
  for (int c = 0; c < cell_nx; ++c) is_bottom[c] = 1;

  Eigen::MatrixXcd Ared = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::VectorXcd bred = rhs;
  for (int j = 0; j < N; ++j) {
    for (int l = 0; l < NP; ++l) {
      const int row = j * NP + l;
      if (is_bottom[l]) {
        Ared.row(row).setZero();
        Ared(row, row) = 1.0;
        bred[row] = dirichlet.empty() ? cdouble(0.0) : data_scale * dirichlet[j][l];
      } else {
        Ared.row(row) = A.row(row);
        // move known bottom columns to the right-hand side
        if (!dirichlet.empty()) {
          for (int jj = 0; jj < N; ++jj)
            for (int c = 0; c < cell_nx; ++c)
              bred[row] -= A(row, jj * NP + c) * (data_scale * dirichlet[jj][c]);
        }
      }
    }
  }
  if (!dirichlet.empty()) {
    for (int j = 0; j < N; ++j)
      for (int l = 0; l < NP; ++l)
        if (!is_bottom[l])
          for (int jj = 0; jj < N; ++jj)
            for (int c = 0; c < cell_nx; ++c) Ared(j * NP + l, jj * NP + c) = 0.0;
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Ared);
  Eigen::VectorXcd sol = lu.solve(bred);
  const double rres = (Ared * sol - bred).norm() / std::max(1e-300, bred.norm());
  if (!(rres < 1e-8)) throw SolverError("solve_supercell: dense solve residual too large", rres);

  result.coefficients.assign(N, Vec::Zero(NP));
  for (int j = 0; j < N; ++j)
    for (int l = 0; l < NP; ++l) result.coefficients[j][l] = sol[j * NP + l];

  // nodal field U(X) = sum_j e^{i alpha_j X1} w_{j,l} phi_l(X)
  result.nodal.assign(sm.nodes.size(), cdouble(0.0));
  for (std::size_t n = 0; n < sm.nodes.size(); ++n) {
    auto [copy, cell_node] = supermesh.copy_of_node(static_cast<int>(n));
    const int cols = cell_nx + 1;
    const int row = cell_node / cols;
    int col = cell_node % cols;
    if (col == 0) col = cell_nx;
    const int cpn = row * cell_nx + (col - 1);
    cdouble v = 0.0;
    for (int j = 1; j <= N; ++j)
      v += std::polar(1.0, alphas[j] * sm.nodes[n].x1) * result.coefficients[j - 1][cpn];
    result.nodal[n] = v;
  }
  return result;
}

double supercell_vs_bloch(const SupercellResult& fs, const SupercellMesh& supermesh,
                          const BlochField& w) {
  const PeriodicCellMesh& sm = supermesh.mesh;
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < sm.nodes.size(); ++n) {
    auto [copy, cell_node] = supermesh.copy_of_node(static_cast<int>(n));
    const Point cell_pt = {sm.nodes[n].x1 - supermesh.copy_shift(copy), sm.nodes[n].x2};
    const cdouble ub = inverse_bloch(w, w.grid, copy - supermesh.N / 2, cell_pt);
    num += std::norm(ub - fs.nodal[n]);
    den += std::norm(fs.nodal[n]);
  }
  return std::sqrt(num / std::max(den, 1e-300));
}

}  // namespace blochfem
